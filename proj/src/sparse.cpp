#include "shardlearn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "shardlearn/model.hpp"

namespace shardlearn {

void SparseVector::normalize() {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
  size_t out = 0;
  for (size_t i = 0; i < entries.size();) {
    uint32_t idx = entries[i].index;
    double sum = entries[i].value;
    size_t j = i + 1;
    while (j < entries.size() && entries[j].index == idx) sum += entries[j++].value;
    entries[out++] = {idx, sum};
    i = j;
  }
  entries.resize(out);
}

double SparseVector::l2_norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.value * e.value;
  return std::sqrt(s);
}

double dot(const SparseVector& x, const WeightModel& w) {
  double acc = 0.0;
  for (const auto& e : x.entries) {
    if (e.index >= w.size()) throw std::out_of_range("feature index exceeds weight table");
    acc += e.value * w[e.index];
  }
  return acc;
}

double dot_dense(const SparseVector& x, const std::vector<double>& w) {
  double acc = 0.0;
  for (const auto& e : x.entries) {
    if (e.index >= w.size()) throw std::out_of_range("feature index exceeds vector size");
    acc += e.value * w[e.index];
  }
  return acc;
}

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace shardlearn
