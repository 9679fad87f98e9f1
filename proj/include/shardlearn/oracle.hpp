#pragma once

#include <cstdint>
#include <vector>

namespace shardlearn::oracle {

struct DensePoint {
  std::vector<double> x;
  double y;
};

// Exact empirical second moments: sigma = E[x x^T], b = E[x y].
struct MomentSet {
  std::vector<std::vector<double>> sigma;
  std::vector<double> b;
  size_t dim() const { return b.size(); }
};

// weights empty means uniform; otherwise per-point masses (normalized by sum).
MomentSet moments(const std::vector<DensePoint>& points,
                  const std::vector<double>& weights = {});

struct SolveResult {
  std::vector<double> w;
  // True when elimination hit a (near-)zero pivot and the minimum-norm
  // pseudo-inverse solution was returned instead.
  bool used_pseudo_inverse = false;
};

// Solve sigma w = b by Gaussian elimination with partial pivoting; singular
// systems fall back to the eigendecomposition pseudo-inverse (eigenvalues
// below 1e-10 x the largest treated as zero).
SolveResult least_squares(const MomentSet& m);

struct NaiveBayesResult {
  std::vector<double> w;  // b_i / sigma_ii, 0 where sigma_ii == 0
  size_t zero_variance_count = 0;
};
NaiveBayesResult naive_bayes_weights(const MomentSet& m);

// Mean squared error E[(<w,x> - y)^2] over the points (not halved).
double mse(const std::vector<double>& w, const std::vector<DensePoint>& points);

// Tree shapes for the fixed-point solver. A node is either a leaf owning a
// set of dense feature indices, or an internal node over child nodes.
struct TreeNode {
  std::vector<int> children;        // empty => leaf
  std::vector<int> leaf_features;   // dense indices, leaves only
};
struct TreeSpec {
  std::vector<TreeNode> nodes;
  int root = -1;
};

// All features in one leaf under a root.
TreeSpec single_shard_tree(size_t n_features);
// Singleton leaves; one combining node per group; root over the groups.
TreeSpec grouped_tree(const std::vector<std::vector<int>>& groups);
// Full binary tree over singleton leaves; n_features must be a power of two.
TreeSpec binary_tree(size_t n_features);

struct TreeFixedPoint {
  // Per node: leaf nodes get per-feature weights (aligned with
  // leaf_features), internal nodes get per-child combination weights.
  std::vector<std::vector<double>> node_weights;
  std::vector<double> effective;  // product-expanded dense weight vector
  bool used_pseudo_inverse = false;
};

// Bottom-up fixed point: each leaf solves least squares over its own
// features; each internal node solves the normal equations over its
// children's prediction streams. Single-child internal nodes pass through
// with weight exactly 1.
TreeFixedPoint tree_fixed_point(const TreeSpec& tree, const MomentSet& m);

}  // namespace shardlearn::oracle
