#include "shardlearn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shardlearn::oracle {

using Matrix = std::vector<std::vector<double>>;

MomentSet moments(const std::vector<DensePoint>& points, const std::vector<double>& weights) {
  if (points.empty()) throw std::invalid_argument("moments: no points");
  size_t n = points[0].x.size();
  for (const auto& p : points)
    if (p.x.size() != n) throw std::invalid_argument("moments: inconsistent dimensions");
  std::vector<double> w(points.size(), 1.0);
  if (!weights.empty()) {
    if (weights.size() != points.size())
      throw std::invalid_argument("moments: weight count mismatch");
    w = weights;
  }
  double total = 0.0;
  for (double v : w) {
    if (v < 0.0) throw std::invalid_argument("moments: negative weight");
    total += v;
  }
  if (total <= 0.0) throw std::invalid_argument("moments: weights sum to zero");

  MomentSet m;
  m.sigma.assign(n, std::vector<double>(n, 0.0));
  m.b.assign(n, 0.0);
  for (size_t k = 0; k < points.size(); ++k) {
    double omega = w[k] / total;
    const auto& x = points[k].x;
    for (size_t i = 0; i < n; ++i) {
      m.b[i] += omega * x[i] * points[k].y;
      for (size_t j = 0; j < n; ++j) m.sigma[i][j] += omega * x[i] * x[j];
    }
  }
  return m;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues in eval and eigenvectors as columns of V.
static void jacobi_eigen(Matrix a, std::vector<double>& eval, Matrix& V) {
  size_t n = a.size();
  V.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) V[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-300) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = V[k][p], vkq = V[k][q];
          V[k][p] = c * vkp - s * vkq;
          V[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  eval.resize(n);
  for (size_t i = 0; i < n; ++i) eval[i] = a[i][i];
}

static std::vector<double> pseudo_inverse_solve(const Matrix& sigma, const std::vector<double>& b) {
  size_t n = sigma.size();
  std::vector<double> eval;
  Matrix V;
  jacobi_eigen(sigma, eval, V);
  double max_eval = 0.0;
  for (double v : eval) max_eval = std::max(max_eval, std::abs(v));
  double tol = 1e-10 * max_eval;
  // w = V diag(1/lambda or 0) V^T b
  std::vector<double> vtb(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < n; ++k) vtb[i] += V[k][i] * b[k];
  for (size_t i = 0; i < n; ++i) vtb[i] = (std::abs(eval[i]) > tol) ? vtb[i] / eval[i] : 0.0;
  std::vector<double> w(n, 0.0);
  for (size_t k = 0; k < n; ++k)
    for (size_t i = 0; i < n; ++i) w[k] += V[k][i] * vtb[i];
  return w;
}

static SolveResult solve_system(Matrix a, std::vector<double> rhs) {
  size_t n = a.size();
  if (n == 0) return {{}, false};
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  double tol = scale * 1e-12;

  Matrix a0 = a;
  std::vector<double> rhs0 = rhs;
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;

  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) <= tol)
      return {pseudo_inverse_solve(a0, rhs0), true};
    std::swap(a[piv], a[col]);
    std::swap(rhs[piv], rhs[col]);
    for (size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> w(n, 0.0);
  for (size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (size_t j = i + 1; j < n; ++j) s -= a[i][j] * w[j];
    w[i] = s / a[i][i];
  }
  return {w, false};
}

SolveResult least_squares(const MomentSet& m) { return solve_system(m.sigma, m.b); }

NaiveBayesResult naive_bayes_weights(const MomentSet& m) {
  NaiveBayesResult r;
  r.w.resize(m.dim());
  for (size_t i = 0; i < m.dim(); ++i) {
    if (m.sigma[i][i] == 0.0) {
      r.w[i] = 0.0;
      ++r.zero_variance_count;
    } else {
      r.w[i] = m.b[i] / m.sigma[i][i];
    }
  }
  return r;
}

double mse(const std::vector<double>& w, const std::vector<DensePoint>& points) {
  if (points.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : points) {
    double yhat = 0.0;
    for (size_t i = 0; i < w.size(); ++i) yhat += w[i] * p.x[i];
    double r = yhat - p.y;
    s += r * r;
  }
  return s / double(points.size());
}

TreeSpec single_shard_tree(size_t n_features) {
  TreeSpec t;
  TreeNode leaf;
  for (size_t i = 0; i < n_features; ++i) leaf.leaf_features.push_back(int(i));
  t.nodes.push_back(leaf);
  TreeNode root;
  root.children.push_back(0);
  t.nodes.push_back(root);
  t.root = 1;
  return t;
}

TreeSpec grouped_tree(const std::vector<std::vector<int>>& groups) {
  TreeSpec t;
  TreeNode root;
  for (const auto& g : groups) {
    TreeNode combiner;
    for (int f : g) {
      TreeNode leaf;
      leaf.leaf_features.push_back(f);
      t.nodes.push_back(leaf);
      combiner.children.push_back(int(t.nodes.size()) - 1);
    }
    t.nodes.push_back(combiner);
    root.children.push_back(int(t.nodes.size()) - 1);
  }
  t.nodes.push_back(root);
  t.root = int(t.nodes.size()) - 1;
  return t;
}

TreeSpec binary_tree(size_t n_features) {
  if (n_features == 0 || (n_features & (n_features - 1)) != 0)
    throw std::invalid_argument("binary tree needs a power-of-two feature count");
  TreeSpec t;
  std::vector<int> level;
  for (size_t i = 0; i < n_features; ++i) {
    TreeNode leaf;
    leaf.leaf_features.push_back(int(i));
    t.nodes.push_back(leaf);
    level.push_back(int(t.nodes.size()) - 1);
  }
  while (level.size() > 1) {
    std::vector<int> next;
    for (size_t i = 0; i < level.size(); i += 2) {
      TreeNode node;
      node.children = {level[i], level[i + 1]};
      t.nodes.push_back(node);
      next.push_back(int(t.nodes.size()) - 1);
    }
    level = next;
  }
  t.root = level[0];
  return t;
}

TreeFixedPoint tree_fixed_point(const TreeSpec& tree, const MomentSet& m) {
  size_t n = m.dim();
  TreeFixedPoint out;
  out.node_weights.resize(tree.nodes.size());
  // effective weight vector of each solved subtree
  std::vector<std::vector<double>> eff(tree.nodes.size());

  // sigma-weighted inner products of effective vectors
  auto sigma_dot = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (u[i] == 0.0) continue;
      double row = 0.0;
      for (size_t j = 0; j < n; ++j) row += m.sigma[i][j] * v[j];
      s += u[i] * row;
    }
    return s;
  };

  // depth-first, children before parents
  std::vector<int> order;
  std::vector<int> stack = {tree.root};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    order.push_back(id);
    for (int c : tree.nodes[id].children) stack.push_back(c);
  }
  std::reverse(order.begin(), order.end());

  for (int id : order) {
    const TreeNode& node = tree.nodes[id];
    if (node.children.empty()) {
      const auto& feats = node.leaf_features;
      Matrix block(feats.size(), std::vector<double>(feats.size()));
      std::vector<double> rhs(feats.size());
      for (size_t i = 0; i < feats.size(); ++i) {
        rhs[i] = m.b[feats[i]];
        for (size_t j = 0; j < feats.size(); ++j) block[i][j] = m.sigma[feats[i]][feats[j]];
      }
      SolveResult sr = solve_system(block, rhs);
      out.used_pseudo_inverse |= sr.used_pseudo_inverse;
      out.node_weights[id] = sr.w;
      eff[id].assign(n, 0.0);
      for (size_t i = 0; i < feats.size(); ++i) eff[id][feats[i]] = sr.w[i];
    } else if (node.children.size() == 1) {
      out.node_weights[id] = {1.0};
      eff[id] = eff[node.children[0]];
    } else {
      size_t k = node.children.size();
      Matrix gram(k, std::vector<double>(k));
      std::vector<double> rhs(k);
      for (size_t i = 0; i < k; ++i) {
        rhs[i] = 0.0;
        const auto& vi = eff[node.children[i]];
        for (size_t f = 0; f < n; ++f) rhs[i] += vi[f] * m.b[f];
        for (size_t j = 0; j < k; ++j) gram[i][j] = sigma_dot(vi, eff[node.children[j]]);
      }
      SolveResult sr = solve_system(gram, rhs);
      out.used_pseudo_inverse |= sr.used_pseudo_inverse;
      out.node_weights[id] = sr.w;
      eff[id].assign(n, 0.0);
      for (size_t i = 0; i < k; ++i)
        for (size_t f = 0; f < n; ++f) eff[id][f] += sr.w[i] * eff[node.children[i]][f];
    }
  }
  out.effective = eff[tree.root];
  return out;
}

}  // namespace shardlearn::oracle
