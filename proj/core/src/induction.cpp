#include "attnparse/induction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace attnparse {

namespace {

// KL(a || mid), skipping coordinates where a is zero.
double kl_to_mid(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) sum += a[i] * std::log(a[i] / (0.5 * (a[i] + b[i])));
  }
  return sum;
}

BinaryTree build_range(std::size_t first, std::size_t last, std::span<const double> d) {
  if (first == last) return BinaryTree::leaf(first);
  // Distances first..last-1 (1-based) live at d[first-1 .. last-2].
  const auto begin = d.begin() + static_cast<std::ptrdiff_t>(first - 1);
  const auto end = d.begin() + static_cast<std::ptrdiff_t>(last - 1);
  const auto split = first + static_cast<std::size_t>(std::max_element(begin, end) - begin);
  return BinaryTree::node(build_range(first, split, d), build_range(split + 1, last, d));
}

void write_bracketed(const BinaryTree& t, std::string& out) {
  if (t.is_leaf()) {
    out += std::to_string(t.first());
    return;
  }
  out += '(';
  write_bracketed(t.left(), out);
  out += ' ';
  write_bracketed(t.right(), out);
  out += ')';
}

}  // namespace

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument(fmt::format("jsd: length mismatch ({} vs {})", p.size(), q.size()));
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw std::invalid_argument(fmt::format("jsd: negative entry at index {}", i));
  }
  const double divergence = 0.5 * (kl_to_mid(p, q) + kl_to_mid(q, p));
  // Rounding can leave a tiny negative value for identical inputs.
  return std::sqrt(std::max(divergence, 0.0));
}

DistanceVector syntactic_distances(const WordAttentionMatrix& m) {
  DistanceVector d;
  if (m.size < 2) return d;
  d.values.reserve(m.size - 1);
  for (std::size_t i = 0; i + 1 < m.size; ++i) d.values.push_back(jsd(m.row(i), m.row(i + 1)));
  return d;
}

DistanceVector apply_bias(const DistanceVector& d, double lambda) {
  if (d.empty()) throw std::invalid_argument("apply_bias: empty distance vector");
  if (lambda < 0.0) throw std::invalid_argument("apply_bias: lambda must be non-negative");
  const std::size_t m = d.values.size();
  const double mean = std::accumulate(d.values.begin(), d.values.end(), 0.0) / static_cast<double>(m);

  DistanceVector out;
  out.values.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double factor = m == 1 ? 1.0 : 1.0 - static_cast<double>(i) / static_cast<double>(m - 1);
    out.values[i] = d.values[i] + lambda * mean * factor;
  }
  return out;
}

BinaryTree BinaryTree::leaf(std::size_t index) {
  if (index == 0) throw std::invalid_argument("leaf indices are 1-based");
  return BinaryTree(index, index, {});
}

BinaryTree BinaryTree::node(BinaryTree left, BinaryTree right) {
  if (left.last() + 1 != right.first()) {
    throw std::invalid_argument(fmt::format("children [{}, {}] and [{}, {}] are not adjacent", left.first(),
                                            left.last(), right.first(), right.last()));
  }
  const std::size_t first = left.first();
  const std::size_t last = right.last();
  std::vector<BinaryTree> children;
  children.reserve(2);
  children.push_back(std::move(left));
  children.push_back(std::move(right));
  return BinaryTree(first, last, std::move(children));
}

std::string to_bracketed(const BinaryTree& tree) {
  std::string out;
  write_bracketed(tree, out);
  return out;
}

BinaryTree build_tree(std::size_t n, const DistanceVector& d) {
  if (n == 0) throw std::invalid_argument("build_tree: a tree needs at least one word");
  if (d.values.size() != n - 1) {
    throw std::invalid_argument(fmt::format("build_tree: {} distances for {} words", d.values.size(), n));
  }
  return build_range(1, n, d.values);
}

BinaryTree induce(const WordAttentionMatrix& m, double lambda) {
  const DistanceVector d = syntactic_distances(m);
  if (m.size <= 2) return build_tree(m.size, d);
  return build_tree(m.size, apply_bias(d, lambda));
}

BinaryTree left_branching(std::size_t n) {
  if (n == 0) throw std::invalid_argument("left_branching: n must be positive");
  BinaryTree t = BinaryTree::leaf(1);
  for (std::size_t i = 2; i <= n; ++i) t = BinaryTree::node(std::move(t), BinaryTree::leaf(i));
  return t;
}

BinaryTree right_branching(std::size_t n) {
  if (n == 0) throw std::invalid_argument("right_branching: n must be positive");
  BinaryTree t = BinaryTree::leaf(n);
  for (std::size_t i = n - 1; i >= 1; --i) t = BinaryTree::node(BinaryTree::leaf(i), std::move(t));
  return t;
}

}  // namespace attnparse
