#pragma once

// Tree induction from word-level attention via syntactic distances.
//
// The distance between adjacent words i and i+1 is the Jensen-Shannon
// distance between their attention rows. A linear right-skew term is added
// and the sentence is split recursively at the largest distance.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "attnparse/attention_io.hpp"

namespace attnparse {

inline constexpr double kDefaultLambda = 1.5;

// sqrt((KL(P||M) + KL(Q||M)) / 2) with M = (P+Q)/2 and natural logarithms,
// so the result lies in [0, sqrt(ln 2)]. Terms with zero probability add
// nothing. Throws std::invalid_argument on a length mismatch or a negative
// entry.
double jsd(std::span<const double> p, std::span<const double> q);

// Distances between adjacent words; values[i] separates words i+1 and i+2.
struct DistanceVector {
  std::vector<double> values;

  std::size_t word_count() const noexcept { return values.size() + 1; }
  bool empty() const noexcept { return values.empty(); }
};

DistanceVector syntactic_distances(const WordAttentionMatrix& m);

// d_i + lambda * mean(d) * (1 - (i-1)/(m-1)) for i = 1..m, m = len(d).
// With m = 1 the factor is 1. Throws std::invalid_argument if d is empty or
// lambda is negative.
DistanceVector apply_bias(const DistanceVector& d, double lambda);

// Unlabeled binary tree over words first()..last() (1-based).
class BinaryTree {
 public:
  static BinaryTree leaf(std::size_t index);
  static BinaryTree node(BinaryTree left, BinaryTree right);

  bool is_leaf() const noexcept { return children_.empty(); }
  const BinaryTree& left() const { return children_.at(0); }
  const BinaryTree& right() const { return children_.at(1); }

  std::size_t first() const noexcept { return first_; }
  std::size_t last() const noexcept { return last_; }
  std::size_t leaf_count() const noexcept { return last_ - first_ + 1; }

  // Index of the last word of the left child, i.e. the 1-based index of
  // the distance this node was split at. Undefined for leaves.
  std::size_t split() const { return left().last(); }

  friend bool operator==(const BinaryTree&, const BinaryTree&) = default;

 private:
  BinaryTree(std::size_t first, std::size_t last, std::vector<BinaryTree> children)
      : first_(first), last_(last), children_(std::move(children)) {}

  std::size_t first_;
  std::size_t last_;
  std::vector<BinaryTree> children_;
};

// "(1 ((2 3) 4))"; a single leaf prints as "1".
std::string to_bracketed(const BinaryTree& tree);

// Splits at the leftmost maximum of d, recursing on both sides.
// Throws std::invalid_argument unless len(d) == n - 1 and n >= 1.
BinaryTree build_tree(std::size_t n, const DistanceVector& d);

// build_tree(n, apply_bias(syntactic_distances(m), lambda)); sentences of at
// most two words skip the bias since their structure is forced.
BinaryTree induce(const WordAttentionMatrix& m, double lambda = kDefaultLambda);

BinaryTree left_branching(std::size_t n);
BinaryTree right_branching(std::size_t n);

}  // namespace attnparse
