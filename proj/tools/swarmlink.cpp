// swarmlink <subcommand> --config <path> [--out dir] [--seed N] [--mode paper|corrected]
//
// Exit codes: 0 ok, 2 invalid config or arguments, 3 I/O failure, 1 anything else.
// Failures print exactly one line to stderr:
//   swarmlink: error kind=<validation|io|runtime> detail="..."

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "swarmlink/scenario.hpp"

namespace fs = std::filesystem;
namespace sc = swarmlink::scenario;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string escape(std::string s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out += ch;
  }
  return out;
}

int fail(const char* kind, const std::string& detail, int code) {
  std::cerr << "swarmlink: error kind=" << kind << " detail=\"" << escape(detail) << "\"\n";
  return code;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("swarmlink");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("SWARMLINK_LOG_LEVEL"))
    spdlog::set_level(spdlog::level::from_str(lvl));
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    swarmlink::scenario::Issues i;
    i.add("config", std::string("malformed JSON: ") + e.what());
    throw sc::ValidationError(std::move(i));
  }
}

void write_file(const fs::path& p, const std::string& content) {
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << content;
  if (!out.flush()) throw IoError("write failed for '" + p.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"swarmlink: UAV swarm modelling scenarios"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".", mode;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool sweep = false;

  const std::map<std::string, std::string> blurb{
      {"dynamics", "fly the configured UAVs under PD control"},
      {"wind", "turbulence spectra, a synthesized gust series, shear split"},
      {"optimize", "run PSO, GWO or WPA on a benchmark function"},
      {"formation", "leader-follower formation flight"},
      {"channel", "Friis vs two-ray sweep, QPSK constellations, BER curves"},
      {"budget", "link budget report"},
      {"berdist", "BER against distance"},
      {"network", "topology, routing vs flooding, potential-field planning"}};
  for (const auto& name : sc::subcommands()) {
    auto* sub = app.add_subcommand(name, blurb.at(name));
    sub->add_option("--config", config_path, "scenario JSON")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--mode", mode, "budget mode")->check(CLI::IsMember({"paper", "corrected"}));
    sub->add_option("--workers", workers, "Monte Carlo threads")->check(CLI::PositiveNumber);
    if (name == "channel") sub->add_flag("--sweep", sweep, "power sweep only");
  }
  auto* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("--config", config_path, "scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    const auto root = read_json(config_path);
    if (validate->parsed()) {
      sc::Issues issues;
      sc::parse_config(root, issues);
      for (const auto& v : issues.list()) std::cout << v << "\n";
      return issues.empty() ? 0 : 2;
    }

    const auto cfg = sc::load_config(root);
    sc::RunOptions opts;
    opts.seed = seed;
    opts.workers = workers;
    opts.sweep_only = sweep;
    if (mode == "paper") opts.mode = swarmlink::budget::BudgetMode::PaperLiteral;
    if (mode == "corrected") opts.mode = swarmlink::budget::BudgetMode::CorrectedSum;

    const std::string sub = app.get_subcommands().front()->get_name();
    spdlog::info("running {} from {}", sub, config_path);
    const auto artifacts = sc::run(sub, cfg, opts);
    for (const auto& a : artifacts) {
      const fs::path p = fs::path(out_dir) / sc::output_path(cfg, a.what);
      write_file(p, a.content);
      spdlog::debug("wrote {} ({} bytes)", p.string(), a.content.size());
      std::cout << p.string() << "\n";
      if (a.what == "budget_report") std::cout << a.content;
    }
    return 0;
  } catch (const sc::ValidationError& e) {
    return fail("validation", e.what(), 2);
  } catch (const IoError& e) {
    return fail("io", e.what(), 3);
  } catch (const swarmlink::ConfigError& e) {
    return fail("validation", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
}
