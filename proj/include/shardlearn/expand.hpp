#pragma once

#include "shardlearn/instance.hpp"
#include "shardlearn/sparse.hpp"

namespace shardlearn {

// Hashes base features and crossed namespace pairs into a 2^bits index space.
// Crossed values multiply; colliding indices sum; the result is sorted by
// index. Pairs naming a namespace absent from the instance contribute
// nothing.
SparseVector expand_and_hash(const Instance& inst, const InteractionSpec& q, unsigned bits);

}  // namespace shardlearn
