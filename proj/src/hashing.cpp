#include "shardlearn/hashing.hpp"

#include <stdexcept>
#include <string>

namespace shardlearn {

uint64_t fnv1a64_continue(uint64_t h, std::string_view data) {
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

uint64_t fnv1a64(std::string_view data) {
  return fnv1a64_continue(kFnvOffsetBasis, data);
}

static void check_bits(unsigned bits) {
  if (bits < 1 || bits > 31)
    throw std::invalid_argument("table bits must be in [1, 31], got " + std::to_string(bits));
}

uint32_t hash_feature(std::string_view ns, std::string_view name, unsigned bits) {
  check_bits(bits);
  uint64_t h = fnv1a64_continue(kFnvOffsetBasis, ns);
  h = fnv1a64_continue(h, std::string_view(&kNsSep, 1));
  h = fnv1a64_continue(h, name);
  return static_cast<uint32_t>(h & ((uint64_t(1) << bits) - 1));
}

uint32_t hash_pair(std::string_view ns_a, std::string_view a,
                   std::string_view ns_b, std::string_view b, unsigned bits) {
  check_bits(bits);
  uint64_t h = fnv1a64_continue(kFnvOffsetBasis, ns_a);
  h = fnv1a64_continue(h, std::string_view(&kNsSep, 1));
  h = fnv1a64_continue(h, a);
  h = fnv1a64_continue(h, std::string_view(&kPairSep, 1));
  h = fnv1a64_continue(h, ns_b);
  h = fnv1a64_continue(h, std::string_view(&kNsSep, 1));
  h = fnv1a64_continue(h, b);
  return static_cast<uint32_t>(h & ((uint64_t(1) << bits) - 1));
}

}  // namespace shardlearn
