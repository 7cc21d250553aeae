#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#ifndef ATTNPARSE_TEST_DATA_DIR
#error "ATTNPARSE_TEST_DATA_DIR must be defined"
#endif

namespace attnparse::testing {

namespace fs = std::filesystem;

fs::path data_dir() { return ATTNPARSE_TEST_DATA_DIR; }

fs::path synthetic_treebank_path() { return data_dir() / "synthetic_wsj.mrg"; }

fs::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() /
                       ("attnparse_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, double sparsity) {
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution zero(sparsity);
  std::vector<double> p(n);
  double sum = 0.0;
  for (auto& v : p) {
    v = zero(rng) ? 0.0 : expo(rng);
    sum += v;
  }
  if (sum == 0.0) {
    p[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1.0;
    return p;
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::vector<AttentionRecord> synthetic_records(const std::vector<GoldSentence>& gold, const DumpSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<AttentionRecord> out;
  for (const auto& g : gold) {
    AttentionRecord r;
    r.sentence_id = g.sentence_id;
    r.words = g.words;
    r.num_layers = spec.num_layers;
    r.num_heads = spec.num_heads;
    for (const auto& w : g.words) {
      const std::size_t first = r.tokens.size() + 1;
      if (w.size() > spec.split_above) {
        r.tokens.push_back(w.substr(0, 2));
        r.tokens.push_back("##" + w.substr(2));
      } else {
        r.tokens.push_back(w);
      }
      r.alignment.push_back({first, r.tokens.size()});
    }
    const std::size_t t = r.tokens.size();
    r.tensor.reserve(spec.num_layers * spec.num_heads * t * t);
    for (std::size_t s = 0; s < spec.num_layers * spec.num_heads; ++s) {
      for (std::size_t i = 0; i < t; ++i) {
        for (double v : random_distribution(rng, t, 0.1)) r.tensor.push_back(static_cast<float>(v));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

AttentionRecord record_from_rows(std::size_t sentence_id, const std::vector<std::string>& words,
                                 const std::vector<std::vector<double>>& rows, std::size_t num_layers,
                                 std::size_t num_heads) {
  AttentionRecord r;
  r.sentence_id = sentence_id;
  r.words = words;
  r.tokens = words;
  r.num_layers = num_layers;
  r.num_heads = num_heads;
  for (std::size_t i = 0; i < words.size(); ++i) r.alignment.push_back({i + 1, i + 1});
  for (std::size_t s = 0; s < num_layers * num_heads; ++s) {
    for (const auto& row : rows) {
      for (double v : row) r.tensor.push_back(static_cast<float>(v));
    }
  }
  return r;
}

double entropy_jsd(const std::vector<double>& p, const std::vector<double>& q) {
  auto entropy = [](const std::vector<double>& x) {
    double h = 0.0;
    for (double v : x) {
      if (v > 0.0) h -= v * std::log(v);
    }
    return h;
  };
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return std::sqrt(std::max(0.0, entropy(m) - 0.5 * (entropy(p) + entropy(q))));
}

std::vector<std::vector<double>> matrix_merge(const std::vector<std::vector<double>>& a,
                                              const std::vector<TokenSegment>& alignment) {
  const std::size_t t = a.size();
  const std::size_t n = alignment.size();
  // R: n x T row averaging; C: T x n column averaging.
  std::vector<std::vector<double>> r(n, std::vector<double>(t, 0.0));
  std::vector<std::vector<double>> c(t, std::vector<double>(n, 0.0));
  for (std::size_t w = 0; w < n; ++w) {
    const double width = static_cast<double>(alignment[w].last - alignment[w].first + 1);
    for (std::size_t k = alignment[w].first; k <= alignment[w].last; ++k) {
      r[w][k - 1] = 1.0 / width;
      c[k - 1][w] = 1.0 / width;
    }
  }
  auto mul = [](const auto& x, const auto& y) {
    std::vector<std::vector<double>> z(x.size(), std::vector<double>(y.front().size(), 0.0));
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t k = 0; k < y.size(); ++k)
        for (std::size_t j = 0; j < y.front().size(); ++j) z[i][j] += x[i][k] * y[k][j];
    return z;
  };
  auto out = mul(mul(r, a), c);
  for (auto& row : out) {
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    for (auto& v : row) v /= s;
  }
  return out;
}

std::vector<BinaryTree> all_binary_trees(std::size_t first, std::size_t last) {
  if (first == last) return {BinaryTree::leaf(first)};
  std::vector<BinaryTree> out;
  for (std::size_t split = first; split < last; ++split) {
    for (const auto& l : all_binary_trees(first, split)) {
      for (const auto& r : all_binary_trees(split + 1, last)) out.push_back(BinaryTree::node(l, r));
    }
  }
  return out;
}

BinaryTree brute_force_tree(std::size_t n, const std::vector<double>& d) {
  // Largest split distance inside a subtree, or -inf for a leaf.
  std::function<bool(const BinaryTree&, double&)> heap_ordered = [&](const BinaryTree& t, double& max_inside) {
    if (t.is_leaf()) {
      max_inside = -INFINITY;
      return true;
    }
    double l = 0.0, r = 0.0;
    if (!heap_ordered(t.left(), l) || !heap_ordered(t.right(), r)) return false;
    // The node's own split distance.
    const double own = d[t.left().last() - 1];
    if (own <= l || own <= r) return false;
    max_inside = own;
    return true;
  };

  std::vector<BinaryTree> matches;
  for (auto& t : all_binary_trees(1, n)) {
    double ignored = 0.0;
    if (heap_ordered(t, ignored)) matches.push_back(std::move(t));
  }
  if (matches.size() != 1) {
    throw std::logic_error("brute_force_tree: expected exactly one heap-ordered tree, found " +
                           std::to_string(matches.size()));
  }
  return matches.front();
}

}  // namespace attnparse::testing
