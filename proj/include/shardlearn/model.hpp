#pragma once

#include <cstdint>
#include <vector>

namespace shardlearn {

// Hashed weight table of size 2^bits. Timestamps record the last batch that
// touched an index (0 = never); only the lazy conjugate-gradient path uses
// them, everything else leaves them alone.
class WeightModel {
 public:
  explicit WeightModel(unsigned bits);

  unsigned bits() const { return bits_; }
  size_t size() const { return weights_.size(); }

  double& operator[](uint32_t i) { return weights_[i]; }
  double operator[](uint32_t i) const { return weights_[i]; }

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<uint64_t>& timestamps() { return timestamps_; }
  const std::vector<uint64_t>& timestamps() const { return timestamps_; }

  friend bool operator==(const WeightModel&, const WeightModel&) = default;

 private:
  unsigned bits_;
  std::vector<double> weights_;
  std::vector<uint64_t> timestamps_;
};

}  // namespace shardlearn
