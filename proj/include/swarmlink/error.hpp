#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace swarmlink {

/// A precondition on a numeric argument was violated (negative speed, dt <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A configuration is incomplete or inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A graph-shaped input violates its structural contract (cycle, orphan, missing node).
class StructuralError : public std::runtime_error {
 public:
  StructuralError(const std::string& what, std::vector<int> nodes = {})
      : std::runtime_error(what), nodes_(std::move(nodes)) {}

  /// Node ids implicated in the failure, e.g. orphaned UAVs.
  const std::vector<int>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<int> nodes_;
};

namespace detail {

inline void require(bool condition, const char* message) {
  if (!condition) throw DomainError(message);
}

}  // namespace detail
}  // namespace swarmlink
