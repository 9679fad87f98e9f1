#include "shardlearn/model.hpp"

#include <stdexcept>
#include <string>

namespace shardlearn {

WeightModel::WeightModel(unsigned bits) : bits_(bits) {
  if (bits < 1 || bits > 31)
    throw std::invalid_argument("table bits must be in [1, 31], got " + std::to_string(bits));
  weights_.assign(size_t(1) << bits, 0.0);
  timestamps_.assign(size_t(1) << bits, 0);
}

}  // namespace shardlearn
