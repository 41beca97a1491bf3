#pragma once

// Swarm network topologies, routing-vs-flooding propagation, and
// representative planners (Dijkstra, A*, artificial potential field).
//
// Node 0 is always the ground station; UAVs are numbered 1..n.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "swarmlink/dynamics.hpp"
#include "swarmlink/error.hpp"

namespace swarmlink::network {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class TopologyKind { Star, MultiStar, SingleGroupAdHoc, MultiGroupAdHoc, MultiLayerAdHoc };
enum class NodeRole { GroundStation, MasterUav, SlaveUav };

struct Node {
  int id = 0;
  NodeRole role = NodeRole::SlaveUav;
  int group = -1;  ///< -1 for the ground station
  Vec3 position = Vec3::Zero();
};

struct Link {
  int a = 0;
  int b = 0;
  double cost = 0.0;
};

struct Arc {
  int to;
  double cost;
};

using Adjacency = std::vector<std::vector<Arc>>;

struct TopologyGraph {
  TopologyKind kind = TopologyKind::Star;
  std::vector<Node> nodes;
  std::vector<Link> links;

  static constexpr int ground_station() { return 0; }
  int size() const { return static_cast<int>(nodes.size()); }

  bool has_link(int a, int b) const {
    return std::any_of(links.begin(), links.end(), [&](const Link& l) {
      return (l.a == a && l.b == b) || (l.a == b && l.b == a);
    });
  }

  void add_link(int a, int b) {
    if (a == b || has_link(a, b)) return;
    links.push_back({std::min(a, b), std::max(a, b),
                     (nodes[a].position - nodes[b].position).norm()});
  }

  bool remove_link(int a, int b) {
    const auto before = links.size();
    std::erase_if(links, [&](const Link& l) {
      return (l.a == a && l.b == b) || (l.a == b && l.b == a);
    });
    return links.size() != before;
  }

  /// Neighbour lists sorted by node id.
  Adjacency adjacency() const {
    Adjacency adj(nodes.size());
    for (const auto& l : links) {
      adj[l.a].push_back({l.b, l.cost});
      adj[l.b].push_back({l.a, l.cost});
    }
    for (auto& list : adj)
      std::sort(list.begin(), list.end(), [](const Arc& x, const Arc& y) { return x.to < y.to; });
    return adj;
  }
};

// ---------------------------------------------------------------------------
// Connectivity helpers

/// Nodes reachable from src using only nodes for which `allowed` is true.
inline std::vector<bool> reachable(const Adjacency& adj, int src,
                                   const std::function<bool(int)>& allowed = nullptr) {
  std::vector<bool> seen(adj.size(), false);
  if (src < 0 || src >= static_cast<int>(adj.size())) return seen;
  if (allowed && !allowed(src)) return seen;
  std::queue<int> q;
  q.push(src);
  seen[src] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (const Arc& a : adj[u]) {
      if (seen[a.to] || (allowed && !allowed(a.to))) continue;
      seen[a.to] = true;
      q.push(a.to);
    }
  }
  return seen;
}

// ---------------------------------------------------------------------------
// Topology construction

/// Group sizes for n UAVs in g groups: contiguous blocks by UAV id, the first
/// (n mod g) groups one larger than the rest.
inline std::vector<int> group_assignment(int n_uavs, int n_groups) {
  std::vector<int> group(n_uavs);
  const int base = n_uavs / n_groups;
  const int extra = n_uavs % n_groups;
  int k = 0;
  for (int g = 0; g < n_groups; ++g) {
    const int size = base + (g < extra ? 1 : 0);
    for (int i = 0; i < size; ++i) group[k++] = g;
  }
  return group;
}

/// Builds a topology of the requested kind.
///
/// `positions` has n_uavs + 1 entries, index 0 being the ground station.
/// Links are created only between nodes within `link_range` of each other;
/// every edge cost is the Euclidean distance. The master of each group is
/// its member closest to the ground station (lowest id on ties).
///
/// Per kind:
///   Star             every UAV links to the ground station only.
///   MultiStar        slaves link to their master, masters to the ground station.
///   SingleGroupAdHoc one group; UAVs mesh within range; only the master
///                    links to the ground station.
///   MultiGroupAdHoc  per-group mesh; each master links to the ground station;
///                    no links between groups.
///   MultiLayerAdHoc  per-group mesh; masters mesh among themselves; the
///                    master nearest the ground station is the only gateway.
///
/// Throws StructuralError listing every UAV that cannot be attached.
inline TopologyGraph build_topology(TopologyKind kind, int n_uavs, int n_groups,
                                    double link_range, const std::vector<Vec3>& positions) {
  detail::require(n_uavs >= 1, "build_topology: n_uavs must be >= 1");
  detail::require(n_groups >= 1, "build_topology: n_groups must be >= 1");
  detail::require(link_range > 0, "build_topology: link_range must be > 0");
  detail::require(static_cast<int>(positions.size()) == n_uavs + 1,
                  "build_topology: positions must hold n_uavs + 1 entries");
  const bool single = kind == TopologyKind::Star || kind == TopologyKind::SingleGroupAdHoc;
  const int groups = single ? 1 : n_groups;
  detail::require(groups <= n_uavs, "build_topology: more groups than UAVs");

  TopologyGraph g;
  g.kind = kind;
  g.nodes.push_back({0, NodeRole::GroundStation, -1, positions[0]});
  const auto assignment = group_assignment(n_uavs, groups);
  for (int i = 1; i <= n_uavs; ++i)
    g.nodes.push_back({i, NodeRole::SlaveUav, assignment[i - 1], positions[i]});

  auto dist = [&](int a, int b) { return (g.nodes[a].position - g.nodes[b].position).norm(); };
  auto in_range = [&](int a, int b) { return dist(a, b) <= link_range; };

  std::vector<std::vector<int>> members(groups);
  for (int i = 1; i <= n_uavs; ++i) members[g.nodes[i].group].push_back(i);
  std::vector<int> master(groups, -1);
  if (kind != TopologyKind::Star) {
    for (int k = 0; k < groups; ++k) {
      int best = members[k].front();
      for (int id : members[k])
        if (dist(id, 0) < dist(best, 0)) best = id;
      master[k] = best;
      g.nodes[best].role = NodeRole::MasterUav;
    }
  }

  std::set<int> orphans;
  auto mesh_group = [&](int k) {
    for (std::size_t i = 0; i < members[k].size(); ++i)
      for (std::size_t j = i + 1; j < members[k].size(); ++j)
        if (in_range(members[k][i], members[k][j])) g.add_link(members[k][i], members[k][j]);
  };
  auto check_group_reach = [&](int k) {
    const auto adj = g.adjacency();
    const auto seen = reachable(adj, master[k], [&](int v) { return g.nodes[v].group == k; });
    for (int id : members[k])
      if (!seen[id]) orphans.insert(id);
  };

  switch (kind) {
    case TopologyKind::Star:
      for (int i = 1; i <= n_uavs; ++i) {
        if (in_range(i, 0)) g.add_link(0, i);
        else orphans.insert(i);
      }
      break;
    case TopologyKind::MultiStar:
      for (int k = 0; k < groups; ++k) {
        if (in_range(master[k], 0)) g.add_link(0, master[k]);
        else orphans.insert(master[k]);
        for (int id : members[k]) {
          if (id == master[k]) continue;
          if (in_range(id, master[k])) g.add_link(master[k], id);
          else orphans.insert(id);
        }
      }
      break;
    case TopologyKind::SingleGroupAdHoc:
    case TopologyKind::MultiGroupAdHoc:
      for (int k = 0; k < groups; ++k) {
        if (in_range(master[k], 0)) g.add_link(0, master[k]);
        else orphans.insert(master[k]);
        mesh_group(k);
      }
      for (int k = 0; k < groups; ++k) check_group_reach(k);
      break;
    case TopologyKind::MultiLayerAdHoc: {
      for (int k = 0; k < groups; ++k) mesh_group(k);
      for (int a = 0; a < groups; ++a)
        for (int b = a + 1; b < groups; ++b)
          if (in_range(master[a], master[b])) g.add_link(master[a], master[b]);
      int gateway = master[0];
      for (int m : master)
        if (dist(m, 0) < dist(gateway, 0)) gateway = m;
      if (in_range(gateway, 0)) g.add_link(0, gateway);
      else orphans.insert(gateway);
      for (int k = 0; k < groups; ++k) check_group_reach(k);
      const auto adj = g.adjacency();
      const auto seen = reachable(adj, gateway, [&](int v) {
        return v != 0 && g.nodes[v].role == NodeRole::MasterUav;
      });
      for (int m : master)
        if (!seen[m]) orphans.insert(m);
      break;
    }
  }

  if (!orphans.empty()) {
    std::string msg = "build_topology: unreachable UAV(s):";
    for (int id : orphans) msg += " " + std::to_string(id);
    throw StructuralError(msg, {orphans.begin(), orphans.end()});
  }
  return g;
}

/// Structural rules of each topology kind; returns one message per violation.
inline std::vector<std::string> check_topology(const TopologyGraph& g) {
  std::vector<std::string> v;
  const int gs = TopologyGraph::ground_station();
  const auto count_gs = std::count_if(g.nodes.begin(), g.nodes.end(), [](const Node& n) {
    return n.role == NodeRole::GroundStation;
  });
  if (count_gs != 1) v.push_back("exactly one ground station required");
  if (g.nodes.empty() || g.nodes[gs].role != NodeRole::GroundStation)
    v.push_back("node 0 must be the ground station");
  if (!v.empty()) return v;

  const auto adj = g.adjacency();
  auto is_master = [&](int id) { return g.nodes[id].role == NodeRole::MasterUav; };
  auto all_reachable = [&](const std::vector<bool>& seen, auto&& pred) {
    for (const auto& n : g.nodes)
      if (pred(n.id) && !seen[n.id]) return false;
    return true;
  };
  const auto from_gs = reachable(adj, gs);
  if (!all_reachable(from_gs, [](int) { return true; }))
    v.push_back("graph is not connected");

  switch (g.kind) {
    case TopologyKind::Star:
      for (const auto& l : g.links)
        if (l.a != gs && l.b != gs) v.push_back("star: UAV-UAV link present");
      break;
    case TopologyKind::MultiStar:
      for (const auto& l : g.links) {
        const int a = l.a, b = l.b;
        const bool gs_master = (a == gs && is_master(b)) || (b == gs && is_master(a));
        const bool master_slave =
            a != gs && b != gs && g.nodes[a].group == g.nodes[b].group &&
            (is_master(a) != is_master(b));
        if (!gs_master && !master_slave) v.push_back("multi-star: link outside the star hierarchy");
      }
      break;
    case TopologyKind::SingleGroupAdHoc: {
      int masters_at_gs = 0;
      for (const Arc& a : adj[gs])
        if (is_master(a.to)) ++masters_at_gs;
      if (masters_at_gs != 1 || adj[gs].size() != 1)
        v.push_back("single-group: ground station must link to exactly one master");
      break;
    }
    case TopologyKind::MultiGroupAdHoc: {
      for (const auto& l : g.links)
        if (l.a != gs && l.b != gs && g.nodes[l.a].group != g.nodes[l.b].group)
          v.push_back("multi-group: inter-group UAV link present");
      for (const Arc& a : adj[gs])
        if (!is_master(a.to)) v.push_back("multi-group: ground station links to a slave");
      break;
    }
    case TopologyKind::MultiLayerAdHoc: {
      const int first_uav = 1;
      if (g.size() > 1) {
        const auto without_gs = reachable(adj, first_uav, [&](int id) { return id != gs; });
        if (!all_reachable(without_gs, [&](int id) { return id != gs; }))
          v.push_back("multi-layer: UAVs disconnected without the ground station");
        int some_master = -1;
        for (const auto& n : g.nodes)
          if (n.role == NodeRole::MasterUav) some_master = n.id;
        if (some_master < 0) {
          v.push_back("multi-layer: no master UAVs");
        } else {
          const auto layer = reachable(adj, some_master, is_master);
          if (!all_reachable(layer, is_master))
            v.push_back("multi-layer: master layer is not connected");
        }
      }
      for (const auto& l : g.links)
        if (l.a != gs && l.b != gs && g.nodes[l.a].group != g.nodes[l.b].group &&
            !(is_master(l.a) && is_master(l.b)))
          v.push_back("multi-layer: inter-group link between non-masters");
      break;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Routing and flooding

struct PropagationResult {
  std::vector<int> delivered;  ///< sorted node ids
  int total_messages = 0;
  int hop_count = 0;           ///< path hops (routing) or max depth (flooding)
  std::vector<int> path;       ///< routing only
  double cost = 0.0;           ///< routing only
  bool reached = false;        ///< routing: dst reached
  int expansions = 0;          ///< nodes settled by the search
};

/// Dijkstra on edge cost. Ties in distance are broken by node id, both for
/// the settle order and for the chosen predecessor.
inline PropagationResult route_shortest(const Adjacency& adj, int src, int dst) {
  const int n = static_cast<int>(adj.size());
  if (src < 0 || src >= n || dst < 0 || dst >= n)
    throw StructuralError("route_shortest: unknown node", {src, dst});

  std::vector<double> dist(n, kInfinity);
  std::vector<int> prev(n, -1);
  std::vector<bool> done(n, false);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.emplace(0.0, src);
  PropagationResult r;
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = true;
    ++r.expansions;
    if (u == dst) break;
    for (const Arc& a : adj[u]) {
      if (done[a.to]) continue;
      const double nd = d + a.cost;
      if (nd < dist[a.to] || (nd == dist[a.to] && u < prev[a.to])) {
        dist[a.to] = nd;
        prev[a.to] = u;
        pq.emplace(nd, a.to);
      }
    }
  }
  if (!done[dst]) {
    r.delivered = {src};
    return r;
  }
  r.reached = true;
  r.cost = dist[dst];
  for (int v = dst; v != -1; v = prev[v]) r.path.push_back(v);
  std::reverse(r.path.begin(), r.path.end());
  r.hop_count = static_cast<int>(r.path.size()) - 1;
  r.total_messages = r.hop_count;
  r.delivered = r.path;
  std::sort(r.delivered.begin(), r.delivered.end());
  return r;
}

inline PropagationResult route_shortest(const TopologyGraph& g, int src, int dst) {
  return route_shortest(g.adjacency(), src, dst);
}

struct FloodResult : PropagationResult {
  std::vector<int> depth;  ///< first-reception round per node, -1 if never
};

/// Synchronous-round flooding with duplicate suppression.
///
/// Round 0: src holds the message. A node first reached in round r forwards
/// once in round r + 1 on every incident link except those it received the
/// message over, provided r < ttl. Each such (sender, link) transmission
/// counts as one message; copies arriving at nodes that already hold the
/// message are counted but dropped.
inline FloodResult flood(const Adjacency& adj, int src, int ttl) {
  const int n = static_cast<int>(adj.size());
  if (src < 0 || src >= n) throw StructuralError("flood: unknown node", {src});
  detail::require(ttl >= 0, "flood: ttl must be >= 0");

  FloodResult r;
  r.depth.assign(n, -1);
  std::vector<std::set<int>> heard_from(n);
  r.depth[src] = 0;
  std::vector<int> frontier{src};
  for (int round = 1; round <= ttl && !frontier.empty(); ++round) {
    std::vector<int> next;
    for (int u : frontier) {
      for (const Arc& a : adj[u]) {
        if (heard_from[u].contains(a.to)) continue;
        ++r.total_messages;
        if (r.depth[a.to] == -1) {
          r.depth[a.to] = round;
          next.push_back(a.to);
        }
        if (r.depth[a.to] == round) heard_from[a.to].insert(u);
      }
    }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  for (int v = 0; v < n; ++v) {
    if (r.depth[v] < 0) continue;
    r.delivered.push_back(v);
    r.hop_count = std::max(r.hop_count, r.depth[v]);
  }
  r.reached = true;
  return r;
}

inline FloodResult flood(const TopologyGraph& g, int src, int ttl) {
  return flood(g.adjacency(), src, ttl);
}

/// True if every consecutive pair of the path is still linked.
inline bool path_is_valid(const TopologyGraph& g, const std::vector<int>& path) {
  if (path.empty()) return false;
  for (std::size_t i = 1; i < path.size(); ++i)
    if (!g.has_link(path[i - 1], path[i])) return false;
  return true;
}

struct PropagationComparison {
  struct Routing {
    bool reached = false;
    int hops = 0;
    int messages = 0;
    double cost = 0.0;
    double latency_s = 0.0;
    std::vector<int> path;
  } routing;
  struct Flooding {
    bool reached = false;
    int depth_to_dst = -1;
    int total_messages = 0;
    int delivered = 0;
    double latency_s = 0.0;
  } flooding;
};

/// Routing (Dijkstra, one message per hop) against an unbounded flood.
/// Latency is hops x per-hop delay with no queueing.
inline PropagationComparison compare_propagation(const TopologyGraph& g, int src, int dst,
                                                 double per_hop_delay_s = 1e-3) {
  const auto adj = g.adjacency();
  PropagationComparison c;
  const auto route = route_shortest(adj, src, dst);
  c.routing.reached = route.reached;
  c.routing.hops = route.hop_count;
  c.routing.messages = route.total_messages;
  c.routing.cost = route.cost;
  c.routing.path = route.path;
  c.routing.latency_s = route.hop_count * per_hop_delay_s;
  const auto fl = flood(adj, src, static_cast<int>(adj.size()));
  c.flooding.depth_to_dst = fl.depth[dst];
  c.flooding.reached = fl.depth[dst] >= 0;
  c.flooding.total_messages = fl.total_messages;
  c.flooding.delivered = static_cast<int>(fl.delivered.size());
  c.flooding.latency_s = std::max(0, fl.depth[dst]) * per_hop_delay_s;
  return c;
}

// ---------------------------------------------------------------------------
// A*

struct SearchResult {
  bool reached = false;
  std::vector<int> path;
  double cost = 0.0;
  int expansions = 0;
};

/// A* with a caller-supplied heuristic h(node). Open-list ties on f are
/// broken by node id; with h == 0 the expansion order matches route_shortest.
template <class Heuristic>
SearchResult astar(const Adjacency& adj, int src, int dst, Heuristic&& h) {
  const int n = static_cast<int>(adj.size());
  if (src < 0 || src >= n || dst < 0 || dst >= n)
    throw StructuralError("astar: unknown node", {src, dst});
  std::vector<double> g(n, kInfinity);
  std::vector<int> prev(n, -1);
  std::vector<bool> closed(n, false);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g[src] = 0.0;
  open.emplace(h(src), src);
  SearchResult r;
  while (!open.empty()) {
    const int u = open.top().second;
    open.pop();
    if (closed[u]) continue;
    closed[u] = true;
    ++r.expansions;
    if (u == dst) break;
    for (const Arc& a : adj[u]) {
      if (closed[a.to]) continue;
      const double ng = g[u] + a.cost;
      if (ng < g[a.to] || (ng == g[a.to] && u < prev[a.to])) {
        g[a.to] = ng;
        prev[a.to] = u;
        open.emplace(ng + h(a.to), a.to);
      }
    }
  }
  if (!closed[dst]) return r;
  r.reached = true;
  r.cost = g[dst];
  for (int v = dst; v != -1; v = prev[v]) r.path.push_back(v);
  std::reverse(r.path.begin(), r.path.end());
  return r;
}

/// A* with the Euclidean distance between node positions as heuristic.
inline SearchResult astar(const Adjacency& adj, const std::vector<Vec3>& positions, int src,
                          int dst) {
  const Vec3 goal = positions.at(dst);
  return astar(adj, src, dst, [&](int v) { return (positions[v] - goal).norm(); });
}

/// Occupancy grid, 4-connected with unit step cost.
struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> blocked;  ///< row-major, 1 = wall

  int index(int x, int y) const { return y * width + x; }
  bool is_blocked(int x, int y) const { return blocked[index(x, y)] != 0; }
};

struct GridGraph {
  Adjacency adjacency;
  std::vector<Vec3> positions;
};

inline GridGraph grid_graph(const GridMap& grid) {
  detail::require(grid.width > 0 && grid.height > 0 &&
                      grid.blocked.size() == static_cast<std::size_t>(grid.width * grid.height),
                  "grid_graph: inconsistent grid dimensions");
  GridGraph gg;
  const int n = grid.width * grid.height;
  gg.adjacency.resize(n);
  gg.positions.resize(n);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const int u = grid.index(x, y);
      gg.positions[u] = Vec3(x, y, 0.0);
      if (grid.is_blocked(x, y)) continue;
      constexpr int dx[] = {0, -1, 1, 0};
      constexpr int dy[] = {-1, 0, 0, 1};
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= grid.width || ny >= grid.height) continue;
        if (grid.is_blocked(nx, ny)) continue;
        gg.adjacency[u].push_back({grid.index(nx, ny), 1.0});
      }
      std::sort(gg.adjacency[u].begin(), gg.adjacency[u].end(),
                [](const Arc& p, const Arc& q) { return p.to < q.to; });
    }
  }
  return gg;
}

// ---------------------------------------------------------------------------
// Artificial potential field

struct Obstacle {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct ObstacleField {
  std::vector<Obstacle> obstacles;
  Vec3 goal = Vec3::Zero();
  Vec3 bounds_min = Vec3::Constant(-1e6);
  Vec3 bounds_max = Vec3::Constant(1e6);

  void validate() const {
    for (const auto& o : obstacles)
      detail::require(o.radius > 0, "ObstacleField: obstacle radii must be > 0");
    detail::require((bounds_min.array() < bounds_max.array()).all(),
                    "ObstacleField: bounds_min < bounds_max");
  }

  /// Distance to the nearest obstacle surface (negative inside).
  double clearance(const Vec3& x) const {
    double c = kInfinity;
    for (const auto& o : obstacles) c = std::min(c, (x - o.center).norm() - o.radius);
    return c;
  }
};

/// Quadratic attraction 1/2 ka |x - goal|^2 plus, for each obstacle within
/// the influence radius rho0 of its surface, 1/2 kr (1/rho - 1/rho0)^2.
struct ApfParams {
  double attract_gain = 1.0;
  double repel_gain = 10.0;
  double influence_radius = 2.0;
  double descent_rate = 0.05;     ///< step = rate * -grad U ...
  double max_step = 0.1;          ///< ... capped at this length
  int max_steps = 5000;
  double goal_tolerance = 0.05;
  double stall_tolerance = 1e-4;  ///< per-step displacement that counts as stuck
  int stall_window = 200;         ///< net displacement window for oscillation
};

enum class ApfOutcome { ReachedGoal, LocalMinimum, StepLimit };

struct ApfSample {
  Vec3 position;
  double potential;
};

struct ApfResult {
  std::vector<ApfSample> trajectory;
  ApfOutcome outcome = ApfOutcome::StepLimit;
  double min_clearance = kInfinity;
};

inline double apf_potential(const Vec3& x, const ObstacleField& field, const ApfParams& p) {
  double u = 0.5 * p.attract_gain * (x - field.goal).squaredNorm();
  for (const auto& o : field.obstacles) {
    const double rho = (x - o.center).norm() - o.radius;
    if (rho <= 0.0) return kInfinity;
    if (rho <= p.influence_radius) {
      const double t = 1.0 / rho - 1.0 / p.influence_radius;
      u += 0.5 * p.repel_gain * t * t;
    }
  }
  return u;
}

inline Vec3 apf_gradient(const Vec3& x, const ObstacleField& field, const ApfParams& p) {
  Vec3 grad = p.attract_gain * (x - field.goal);
  for (const auto& o : field.obstacles) {
    const Vec3 r = x - o.center;
    const double dist = r.norm();
    const double rho = dist - o.radius;
    if (rho <= 0.0 || rho > p.influence_radius || dist == 0.0) continue;
    const double t = 1.0 / rho - 1.0 / p.influence_radius;
    grad -= p.repel_gain * t / (rho * rho) * (r / dist);
  }
  return grad;
}

/// Capped gradient descent on the potential. A step that would end inside
/// an obstacle is halved until it does not. LocalMinimum is declared when a
/// step is shorter than stall_tolerance, or the net displacement over the
/// last stall_window steps is under max_step, while the goal is still
/// farther than goal_tolerance.
inline ApfResult apf_plan(const Vec3& start, const ObstacleField& field, const ApfParams& p) {
  field.validate();
  detail::require(field.clearance(start) > 0.0, "apf_plan: start lies inside an obstacle");
  detail::require(p.descent_rate > 0 && p.max_step > 0 && p.max_steps > 0,
                  "apf_plan: descent_rate, max_step and max_steps must be > 0");

  ApfResult r;
  Vec3 x = start.cwiseMax(field.bounds_min).cwiseMin(field.bounds_max);
  r.trajectory.push_back({x, apf_potential(x, field, p)});
  r.min_clearance = field.clearance(x);

  for (int k = 0; k < p.max_steps; ++k) {
    if ((x - field.goal).norm() <= p.goal_tolerance) {
      r.outcome = ApfOutcome::ReachedGoal;
      return r;
    }
    Vec3 step = -p.descent_rate * apf_gradient(x, field, p);
    const double len = step.norm();
    if (len > p.max_step) step *= p.max_step / len;
    Vec3 next = (x + step).cwiseMax(field.bounds_min).cwiseMin(field.bounds_max);
    while (field.clearance(next) <= 0.0 && step.norm() > 1e-12) {
      step *= 0.5;
      next = (x + step).cwiseMax(field.bounds_min).cwiseMin(field.bounds_max);
    }
    const double moved = (next - x).norm();
    x = next;
    r.trajectory.push_back({x, apf_potential(x, field, p)});
    r.min_clearance = std::min(r.min_clearance, field.clearance(x));

    const bool far = (x - field.goal).norm() > p.goal_tolerance;
    const auto n = r.trajectory.size();
    const bool oscillating =
        static_cast<int>(n) > p.stall_window &&
        (x - r.trajectory[n - 1 - p.stall_window].position).norm() < p.max_step;
    if (far && (moved < p.stall_tolerance || oscillating)) {
      r.outcome = ApfOutcome::LocalMinimum;
      return r;
    }
  }
  r.outcome = (x - field.goal).norm() <= p.goal_tolerance ? ApfOutcome::ReachedGoal
                                                          : ApfOutcome::StepLimit;
  return r;
}

}  // namespace swarmlink::network
