#pragma once

#include <cstdint>
#include <vector>

namespace shardlearn {

struct FeatureEntry {
  uint32_t index;
  double value;
  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

// Hashed feature vector, entries sorted by index, duplicates merged.
struct SparseVector {
  std::vector<FeatureEntry> entries;

  size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  void clear() { entries.clear(); }

  // Sorts by index and sums values of equal indices. Call after raw appends.
  void normalize();

  double l2_norm() const;
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

class WeightModel;

// Dot product, accumulated in ascending index order. Throws std::out_of_range
// if an index does not fit the model table.
double dot(const SparseVector& x, const WeightModel& w);

// Dot against a plain dense vector (oracle-side helper).
double dot_dense(const SparseVector& x, const std::vector<double>& w);

double clamp01(double v);

}  // namespace shardlearn
