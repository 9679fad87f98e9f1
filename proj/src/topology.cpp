#include "shardlearn/topology.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "shardlearn/errors.hpp"
#include "shardlearn/textio.hpp"

namespace shardlearn {

void Topology::finalize() {
  size_t n = nodes.size();
  if (n == 0) throw ConfigError("topology has no nodes");
  for (size_t i = 0; i < n; ++i)
    if (nodes[i].id != i) throw ConfigError("topology node ids must be dense 0..N-1");

  children.assign(n, {});
  parent.assign(n, -1);
  delay_to_parent.assign(n, 0);
  for (const auto& e : edges) {
    if (e.child >= n || e.parent >= n) throw ConfigError("topology edge names unknown node");
    if (parent[e.child] != -1) throw ConfigError("topology node has two parents");
    parent[e.child] = e.parent;
    delay_to_parent[e.child] = e.link_delay;
    children[e.parent].push_back(e.child);
  }
  for (auto& c : children) std::sort(c.begin(), c.end());

  size_t roots = 0;
  for (size_t i = 0; i < n; ++i)
    if (parent[i] == -1) {
      root = uint32_t(i);
      ++roots;
    }
  if (roots != 1) throw ConfigError("topology must have exactly one root");

  int32_t max_shard = -1;
  for (const auto& nd : nodes) {
    if (nd.fan_in != children[nd.id].size())
      throw ConfigError("node fan_in disagrees with edge list");
    if (nd.is_leaf()) {
      if (!children[nd.id].empty()) throw ConfigError("leaf node has children");
      max_shard = std::max(max_shard, nd.shard);
    } else if (children[nd.id].empty() && nd.id != root) {
      throw ConfigError("internal node without children");
    }
    if (int64_t(nd.id) != int64_t(root) && parent[nd.id] >= 0 &&
        nodes[parent[nd.id]].layer <= nd.layer)
      throw ConfigError("child layer must be below parent layer");
  }
  if (max_shard < 0) throw ConfigError("topology has no leaves");
  leaf_of_shard.assign(size_t(max_shard) + 1, UINT32_MAX);
  for (const auto& nd : nodes)
    if (nd.is_leaf()) {
      if (leaf_of_shard[nd.shard] != UINT32_MAX)
        throw ConfigError("two leaves own the same shard");
      leaf_of_shard[nd.shard] = nd.id;
    }
  for (uint32_t v : leaf_of_shard)
    if (v == UINT32_MAX) throw ConfigError("shard ids must be dense 0..n-1");

  // reachability from the root
  std::vector<char> seen(n, 0);
  std::vector<uint32_t> stack = {root};
  size_t count = 0;
  while (!stack.empty()) {
    uint32_t id = stack.back();
    stack.pop_back();
    if (seen[id]) throw ConfigError("topology contains a cycle");
    seen[id] = 1;
    ++count;
    for (uint32_t c : children[id]) stack.push_back(c);
  }
  if (count != n) throw ConfigError("topology is not a single connected tree");
}

uint32_t Topology::depth() const { return nodes[root].layer; }

uint32_t ShardPlan::shard_of_index(uint64_t index) const {
  if (kind != ShardKind::Feature) throw std::logic_error("instance plan asked for a feature shard");
  if (!explicit_map.empty()) {
    if (index >= explicit_map.size()) throw std::out_of_range("index outside explicit shard map");
    return explicit_map[index];
  }
  return uint32_t(index % n_shards);
}

uint32_t ShardPlan::shard_of_instance(uint64_t t) const {
  if (kind != ShardKind::Instance) throw std::logic_error("feature plan asked for an instance shard");
  return uint32_t(t % n_shards);
}

ShardPlan make_shard_plan(ShardKind kind, uint32_t n_shards) {
  if (n_shards < 1) throw ConfigError("shard count must be >= 1");
  ShardPlan p;
  p.kind = kind;
  p.n_shards = n_shards;
  return p;
}

Topology build_topology(TopologyPreset preset, uint32_t n_shards, uint32_t link_delay) {
  if (n_shards < 1) throw ConfigError("shard count must be >= 1");
  Topology t;
  if (preset == TopologyPreset::Flat) {
    for (uint32_t i = 0; i < n_shards; ++i)
      t.nodes.push_back({i, 0, int32_t(i), 0, true, false});
    t.nodes.push_back({n_shards, 1, -1, n_shards, false, true});
    for (uint32_t i = 0; i < n_shards; ++i) t.edges.push_back({i, n_shards, link_delay});
  } else {
    if ((n_shards & (n_shards - 1)) != 0)
      throw ConfigError("binary preset needs a power-of-two shard count");
    std::vector<uint32_t> level;
    for (uint32_t i = 0; i < n_shards; ++i) {
      t.nodes.push_back({i, 0, int32_t(i), 0, true, false});
      level.push_back(i);
    }
    uint32_t next_id = n_shards;
    uint32_t layer = 1;
    while (level.size() > 1) {
      std::vector<uint32_t> up;
      for (size_t i = 0; i < level.size(); i += 2) {
        bool is_root = (level.size() == 2);
        t.nodes.push_back({next_id, layer, -1, 2, !is_root, false});
        t.edges.push_back({level[i], next_id, link_delay});
        t.edges.push_back({level[i + 1], next_id, link_delay});
        up.push_back(next_id++);
      }
      level = up;
      ++layer;
    }
  }
  t.finalize();
  return t;
}

std::vector<SparseVector> route_instance(const ShardPlan& plan, const SparseVector& x) {
  std::vector<SparseVector> parts(plan.n_shards);
  for (const auto& e : x.entries) parts[plan.shard_of_index(e.index)].entries.push_back(e);
  return parts;
}

void save_topology(std::ostream& os, const Topology& t) {
  for (const auto& nd : t.nodes) {
    os << nd.id << ' ' << nd.layer << ' ';
    if (nd.is_leaf())
      os << nd.shard;
    else
      os << "internal";
    os << ' ' << nd.fan_in << ' ' << (nd.threshold_output ? 1 : 0) << ' '
       << (nd.has_constant_feature ? 1 : 0) << '\n';
  }
  for (const auto& e : t.edges)
    os << e.child << ' ' << e.parent << ' ' << e.link_delay << '\n';
}

Topology load_topology(std::istream& is) {
  Topology t;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string s;
    while (ls >> s) tok.push_back(s);
    auto bad = [&](const std::string& why) {
      return ConfigError("topology line " + std::to_string(line_no) + ": " + why);
    };
    auto num = [&](const std::string& v) {
      uint64_t out;
      if (!parse_u64(v, out)) throw bad("expected a number, got '" + v + "'");
      return out;
    };
    if (tok.size() == 6) {
      NodeSpec nd;
      nd.id = uint32_t(num(tok[0]));
      nd.layer = uint32_t(num(tok[1]));
      nd.shard = (tok[2] == "internal") ? -1 : int32_t(num(tok[2]));
      nd.fan_in = uint32_t(num(tok[3]));
      nd.threshold_output = num(tok[4]) != 0;
      nd.has_constant_feature = num(tok[5]) != 0;
      t.nodes.push_back(nd);
    } else if (tok.size() == 3) {
      t.edges.push_back({uint32_t(num(tok[0])), uint32_t(num(tok[1])), uint32_t(num(tok[2]))});
    } else {
      throw bad("expected 6 node fields or 3 edge fields");
    }
  }
  t.finalize();
  return t;
}

}  // namespace shardlearn
