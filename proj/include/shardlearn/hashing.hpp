#pragma once

#include <cstdint>
#include <string_view>

namespace shardlearn {

inline constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ull;

// Separators for hash inputs. 0x1E splits namespace from feature name,
// 0x1F splits the two halves of a crossed feature.
inline constexpr char kNsSep = '\x1e';
inline constexpr char kPairSep = '\x1f';

uint64_t fnv1a64(std::string_view data);
uint64_t fnv1a64_continue(uint64_t h, std::string_view data);

// Index of a feature in a 2^bits weight table. bits must be in [1, 31].
uint32_t hash_feature(std::string_view ns, std::string_view name, unsigned bits);

// Index of a crossed feature (ns_a, a) x (ns_b, b).
uint32_t hash_pair(std::string_view ns_a, std::string_view a,
                   std::string_view ns_b, std::string_view b, unsigned bits);

}  // namespace shardlearn
