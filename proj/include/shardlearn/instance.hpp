#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace shardlearn {

struct RawFeature {
  std::string name;
  double value;  // omitted in the input means 1.0
};

struct NamespaceGroup {
  std::string name;
  std::vector<RawFeature> features;
};

struct Instance {
  uint64_t id = 0;  // 1-based position in the stream
  double label = 0.0;
  std::vector<NamespaceGroup> namespaces;
};

// Namespace pairs to cross. Duplicate pairs are a config error.
struct InteractionSpec {
  std::vector<std::pair<std::string, std::string>> pairs;
};

void validate(const InteractionSpec& q);

}  // namespace shardlearn
