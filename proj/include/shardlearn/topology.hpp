#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "shardlearn/sparse.hpp"

namespace shardlearn {

struct NodeSpec {
  uint32_t id = 0;
  uint32_t layer = 0;
  int32_t shard = -1;  // >= 0 marks a leaf owning that feature shard
  uint32_t fan_in = 0;
  bool threshold_output = false;
  bool has_constant_feature = false;
  bool is_leaf() const { return shard >= 0; }
};

struct TopologyEdge {
  uint32_t child = 0;
  uint32_t parent = 0;
  uint32_t link_delay = 0;
};

// Rooted tree of learners. Node ids are dense 0..N-1; children are ordered
// by id, which fixes every reduction order in the engine.
struct Topology {
  std::vector<NodeSpec> nodes;
  std::vector<TopologyEdge> edges;

  uint32_t root = 0;
  std::vector<std::vector<uint32_t>> children;  // sorted by child id
  std::vector<int64_t> parent;                  // -1 for the root
  std::vector<uint32_t> delay_to_parent;
  std::vector<uint32_t> leaf_of_shard;          // shard id -> node id

  // Rebuilds the derived members and checks tree shape, fan_in consistency,
  // contiguous ids, and shard coverage 0..n_shards-1. Throws ConfigError.
  void finalize();
  uint32_t n_shards() const { return uint32_t(leaf_of_shard.size()); }
  uint32_t depth() const;  // root layer
};

enum class ShardKind { Feature, Instance };

// Feature plans split the hashed index space (index mod n_shards unless an
// explicit per-index table is given); instance plans split the stream
// round-robin (t mod n_shards).
struct ShardPlan {
  ShardKind kind = ShardKind::Feature;
  uint32_t n_shards = 1;
  std::vector<uint32_t> explicit_map;  // feature kind only; empty => mod rule

  uint32_t shard_of_index(uint64_t index) const;
  uint32_t shard_of_instance(uint64_t t) const;
};

ShardPlan make_shard_plan(ShardKind kind, uint32_t n_shards);

enum class TopologyPreset { Flat, Binary };

// Flat: n leaves under one master (constant feature on). Binary: full binary
// tree over n leaves, n a power of two (no constant features). Leaves and
// every other transmitting node threshold their outputs by default.
Topology build_topology(TopologyPreset preset, uint32_t n_shards, uint32_t link_delay = 0);

// Splits x by feature shard; result is indexed by shard id and each piece
// keeps ascending index order.
std::vector<SparseVector> route_instance(const ShardPlan& plan, const SparseVector& x);

// Text form: node lines "id layer kind fan_in threshold constant" (kind is a
// shard id or "internal"), edge lines "child parent delay". Round-trips.
void save_topology(std::ostream& os, const Topology& t);
Topology load_topology(std::istream& is);

}  // namespace shardlearn
