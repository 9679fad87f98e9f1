#include "shardlearn/expand.hpp"

#include "shardlearn/hashing.hpp"

namespace shardlearn {

SparseVector expand_and_hash(const Instance& inst, const InteractionSpec& q, unsigned bits) {
  SparseVector out;
  for (const auto& ns : inst.namespaces)
    for (const auto& f : ns.features)
      out.entries.push_back({hash_feature(ns.name, f.name, bits), f.value});

  for (const auto& [na, nb] : q.pairs) {
    for (const auto& ga : inst.namespaces) {
      if (ga.name != na) continue;
      for (const auto& gb : inst.namespaces) {
        if (gb.name != nb) continue;
        for (const auto& fa : ga.features)
          for (const auto& fb : gb.features)
            out.entries.push_back(
                {hash_pair(na, fa.name, nb, fb.name, bits), fa.value * fb.value});
      }
    }
  }
  out.normalize();
  return out;
}

}  // namespace shardlearn
