#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dictloops/decompose.hpp"
#include "dictloops/graph.hpp"
#include "dictloops/parallel.hpp"

namespace dictloops {

/// Sparse row-major matrix of walk counts from each node into each component.
struct WalkMatrix {
  std::size_t rows = 0;
  std::vector<std::uint32_t> column_ids;  // component id of each column
  std::vector<std::size_t> row_offsets;   // CSR, size rows + 1
  std::vector<std::uint32_t> col_index;
  std::vector<std::uint64_t> values;
  std::size_t max_walk_length = 5;
  std::vector<std::uint32_t> pruned_components;
  std::size_t saturated_entries = 0;

  std::size_t cols() const { return column_ids.size(); }
  std::size_t nonzeros() const { return values.size(); }

  std::uint64_t at(std::size_t r, std::size_t c) const {
    const auto first = col_index.begin() + static_cast<std::ptrdiff_t>(row_offsets[r]);
    const auto last = col_index.begin() + static_cast<std::ptrdiff_t>(row_offsets[r + 1]);
    const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
    return it != last && *it == c ? values[static_cast<std::size_t>(it - col_index.begin())] : 0;
  }

  std::vector<std::size_t> column_support() const {
    std::vector<std::size_t> support(cols(), 0);
    for (auto c : col_index) ++support[c];
    return support;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols()));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = row_offsets[r]; i < row_offsets[r + 1]; ++i)
        m(static_cast<Eigen::Index>(r), col_index[i]) = static_cast<double>(values[i]);
    return m;
  }
};

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b, bool& saturated) {
  std::uint64_t s;
  if (__builtin_add_overflow(a, b, &s)) {
    saturated = true;
    return std::numeric_limits<std::uint64_t>::max();
  }
  return s;
}

/// Walk counts (vertices and edges may repeat) of lengths 1..max_len from
/// every node into every component: column k = sum_t A^t x_k, with A the
/// out-adjacency and x_k the component's indicator. Counts saturate at
/// 2^64 - 1 and saturated entries are counted.
inline WalkMatrix walk_counts(const DictGraph& g, const ComponentSet& cs, std::size_t max_len = 5) {
  const std::size_t n = g.node_count();
  const std::size_t k = cs.components.size();
  {
    std::vector<bool> used(n, false);
    for (const auto& c : cs.components)
      for (NodeId v : c.members) {
        if (used.at(v)) throw Error("components are not vertex-disjoint");
        used[v] = true;
      }
  }
  struct Column {
    std::vector<std::pair<NodeId, std::uint64_t>> entries;
    std::size_t saturated = 0;
  };
  std::vector<Column> columns(k);
  parallel_for(k, [&](std::size_t c) {
    std::vector<std::uint64_t> walk(n, 0), next(n), total(n, 0);
    std::vector<bool> sat(n, false);
    for (NodeId v : cs.components[c].members) walk[v] = 1;
    for (std::size_t t = 1; t <= max_len; ++t) {
      for (NodeId u = 0; u < n; ++u) {
        std::uint64_t s = 0;
        bool hit = false;
        for (NodeId v : g.out(u)) s = saturating_add(s, walk[v], hit);
        next[u] = s;
        bool hit_total = false;
        total[u] = saturating_add(total[u], s, hit_total);
        if (hit || hit_total) sat[u] = true;
      }
      walk.swap(next);
    }
    auto& col = columns[c];
    for (NodeId u = 0; u < n; ++u) {
      if (total[u] != 0) col.entries.emplace_back(u, total[u]);
      if (sat[u]) ++col.saturated;
    }
  });

  WalkMatrix w;
  w.rows = n;
  w.max_walk_length = max_len;
  for (const auto& c : cs.components) w.column_ids.push_back(c.id);
  w.row_offsets.assign(n + 1, 0);
  for (const auto& col : columns) {
    for (const auto& [r, v] : col.entries) ++w.row_offsets[r + 1];
    w.saturated_entries += col.saturated;
  }
  for (std::size_t r = 0; r < n; ++r) w.row_offsets[r + 1] += w.row_offsets[r];
  w.col_index.resize(w.row_offsets[n]);
  w.values.resize(w.row_offsets[n]);
  std::vector<std::size_t> fill(w.row_offsets.begin(), w.row_offsets.end() - 1);
  for (std::size_t c = 0; c < k; ++c)
    for (const auto& [r, v] : columns[c].entries) {
      w.col_index[fill[r]] = static_cast<std::uint32_t>(c);
      w.values[fill[r]++] = v;
    }
  return w;
}

/// Drops columns nonzero in more than support_threshold of the rows.
inline WalkMatrix prune_ubiquitous(const WalkMatrix& w, double support_threshold = 0.8) {
  const auto support = w.column_support();
  std::vector<std::int64_t> remap(w.cols(), -1);
  WalkMatrix out;
  out.rows = w.rows;
  out.max_walk_length = w.max_walk_length;
  out.pruned_components = w.pruned_components;
  out.saturated_entries = w.saturated_entries;
  for (std::size_t c = 0; c < w.cols(); ++c) {
    if (static_cast<double>(support[c]) > support_threshold * static_cast<double>(w.rows)) {
      out.pruned_components.push_back(w.column_ids[c]);
      continue;
    }
    remap[c] = static_cast<std::int64_t>(out.column_ids.size());
    out.column_ids.push_back(w.column_ids[c]);
  }
  out.row_offsets.assign(w.rows + 1, 0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    for (std::size_t i = w.row_offsets[r]; i < w.row_offsets[r + 1]; ++i) {
      if (remap[w.col_index[i]] < 0) continue;
      out.col_index.push_back(static_cast<std::uint32_t>(remap[w.col_index[i]]));
      out.values.push_back(w.values[i]);
    }
    out.row_offsets[r + 1] = out.values.size();
  }
  return out;
}

struct SvdResult {
  std::vector<double> singular_values;   // descending
  Eigen::MatrixXd right_vectors;         // cols x k, orthonormal columns
  Eigen::MatrixXd left_vectors;          // rows x k
  std::vector<std::uint32_t> column_ids; // component id per right-vector coordinate
  std::size_t k = 0;
  std::string notice;
};

/// Top-k singular triplets via the eigen-decomposition of the Gram matrix
/// W^T W (cols x cols, small) without densifying W. Each right vector is
/// signed so that its largest-magnitude coefficient is positive.
inline SvdResult svd_topk(const WalkMatrix& w, std::size_t k = 10, bool column_scale = false) {
  const std::size_t cols = w.cols();
  if (k > std::min(w.rows, cols))
    throw Error("k = " + std::to_string(k) + " exceeds min(rows, cols) = " + std::to_string(std::min(w.rows, cols)));

  std::vector<double> scale(cols, 1.0);
  if (column_scale) {
    std::vector<double> norm2(cols, 0.0);
    for (std::size_t i = 0; i < w.values.size(); ++i) {
      const double v = static_cast<double>(w.values[i]);
      norm2[w.col_index[i]] += v * v;
    }
    for (std::size_t c = 0; c < cols; ++c) scale[c] = norm2[c] > 0 ? 1.0 / std::sqrt(norm2[c]) : 1.0;
  }
  const auto value = [&](std::size_t i) { return static_cast<double>(w.values[i]) * scale[w.col_index[i]]; };

  const auto kc = static_cast<Eigen::Index>(cols);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(kc, kc);
  for (std::size_t r = 0; r < w.rows; ++r)
    for (std::size_t i = w.row_offsets[r]; i < w.row_offsets[r + 1]; ++i) {
      const double a = value(i);
      for (std::size_t j = i; j < w.row_offsets[r + 1]; ++j) gram(w.col_index[i], w.col_index[j]) += a * value(j);
    }
  gram = gram.selfadjointView<Eigen::Upper>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw Error("eigen-decomposition of the Gram matrix failed");
  const Eigen::VectorXd lambda = eig.eigenvalues();  // ascending
  const Eigen::MatrixXd vecs = eig.eigenvectors();

  SvdResult res;
  res.column_ids = w.column_ids;
  const double lambda_max = cols ? std::max(lambda(kc - 1), 0.0) : 0.0;
  const double rank_tol = lambda_max * static_cast<double>(std::max<std::size_t>(cols, 1)) *
                          std::numeric_limits<double>::epsilon() * 64.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = kc - 1; i >= 0 && keep.size() < k; --i)
    if (lambda(i) > rank_tol) keep.push_back(i);
  if (keep.size() < k)
    res.notice = "requested " + std::to_string(k) + " singular triplets but numerical rank is " +
                 std::to_string(keep.size());
  res.k = keep.size();
  const auto kk = static_cast<Eigen::Index>(res.k);
  res.right_vectors.resize(kc, kk);
  res.left_vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w.rows), kk);
  for (Eigen::Index j = 0; j < kk; ++j) {
    const double sigma = std::sqrt(std::max(lambda(keep[static_cast<std::size_t>(j)]), 0.0));
    Eigen::VectorXd v = vecs.col(keep[static_cast<std::size_t>(j)]);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    res.singular_values.push_back(sigma);
    res.right_vectors.col(j) = v;
    for (std::size_t r = 0; r < w.rows; ++r) {
      double s = 0;
      for (std::size_t i = w.row_offsets[r]; i < w.row_offsets[r + 1]; ++i) s += value(i) * v(w.col_index[i]);
      res.left_vectors(static_cast<Eigen::Index>(r), j) = s / sigma;
    }
  }
  return res;
}

struct ThemeEntry {
  std::uint32_t component_id = 0;
  double coefficient = 0;
};

struct Theme {
  std::size_t vector_index = 0;
  double singular_value = 0;
  std::vector<ThemeEntry> entries;  // by |coefficient| descending
};

/// Per singular vector, the components with |coefficient| > threshold.
inline std::vector<Theme> theme_report(const SvdResult& res, double coeff_threshold = 0.1, std::size_t top_n = 10) {
  std::vector<Theme> themes;
  for (std::size_t j = 0; j < res.k; ++j) {
    Theme t;
    t.vector_index = j;
    t.singular_value = res.singular_values[j];
    for (Eigen::Index i = 0; i < res.right_vectors.rows(); ++i) {
      const double c = res.right_vectors(i, static_cast<Eigen::Index>(j));
      if (std::abs(c) > coeff_threshold) t.entries.push_back({res.column_ids[static_cast<std::size_t>(i)], c});
    }
    std::stable_sort(t.entries.begin(), t.entries.end(), [](const ThemeEntry& a, const ThemeEntry& b) {
      return std::abs(a.coefficient) > std::abs(b.coefficient);
    });
    if (t.entries.size() > top_n) t.entries.resize(top_n);
    themes.push_back(std::move(t));
  }
  return themes;
}

/// Text listing; `+` marks positive and `-` negative coefficients.
inline void write_theme_report(std::ostream& out, const std::vector<Theme>& themes,
                               const std::function<std::string(std::uint32_t)>& label) {
  for (const auto& t : themes) {
    out << "vector " << t.vector_index + 1 << '\n';
    if (t.entries.empty()) out << "  (no coefficient above threshold)\n";
    for (const auto& e : t.entries) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", e.coefficient);
      out << "  " << (e.coefficient >= 0 ? '+' : '-') << ' ' << buf << "  " << label(e.component_id) << '\n';
    }
  }
}

}  // namespace dictloops
