#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "hjd/core/errors.hpp"

namespace hjd {

// m1 x m2 pixel array stored row-major, identified with R^(m1*m2).
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(Index rows, Index cols, Vector values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows <= 0 || cols <= 0) throw InvalidInput("image grid: dimensions must be positive");
    if (values_.size() != rows * cols) throw InvalidInput("image grid: value count mismatch");
    require_finite(values_, "image grid");
  }

  static ImageGrid constant(Index rows, Index cols, double value) {
    return ImageGrid(rows, cols, Vector::Constant(rows * cols, value));
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return rows_ * cols_; }
  const Vector& values() const noexcept { return values_; }
  double operator()(Index i, Index j) const { return values_[i * cols_ + j]; }

  ImageGrid with_values(Vector v) const { return ImageGrid(rows_, cols_, std::move(v)); }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Vector values_;
};

// `verbatim` keeps only the differences anchored at pixels (i, j) with
// i < m1-1 and j < m2-1: the last row loses its horizontal differences and
// the last column its vertical ones. `full` keeps every forward difference.
enum class TvVariant { verbatim, full };

inline const char* to_string(TvVariant v) { return v == TvVariant::full ? "full" : "verbatim"; }

inline TvVariant tv_variant_from_string(const std::string& s) {
  if (s == "verbatim") return TvVariant::verbatim;
  if (s == "full") return TvVariant::full;
  throw InvalidInput("unknown TV variant '" + s + "'");
}

// The forward-difference operator D of the grid as an edge list:
// (Du)_e = u[head_e] - u[tail_e].
class DifferenceGraph {
 public:
  DifferenceGraph(Index rows, Index cols, TvVariant variant)
      : rows_(rows), cols_(cols), variant_(variant) {
    if (rows <= 0 || cols <= 0) throw InvalidInput("difference graph: dimensions must be positive");
    const bool full = variant == TvVariant::full;
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        const Index k = i * cols + j;
        const bool interior = i + 1 < rows && j + 1 < cols;
        if (i + 1 < rows && (full || interior)) add_edge(k, k + cols, Orientation::vertical);
        if (j + 1 < cols && (full || interior)) add_edge(k, k + 1, Orientation::horizontal);
      }
    }
    std::vector<int> degree(static_cast<std::size_t>(rows * cols), 0);
    for (std::size_t e = 0; e < tail_.size(); ++e) {
      ++degree[static_cast<std::size_t>(tail_[e])];
      ++degree[static_cast<std::size_t>(head_[e])];
    }
    max_degree_ = degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
    label_components();
  }

  enum class Orientation { vertical, horizontal };

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index vertex_count() const noexcept { return rows_ * cols_; }
  Index edge_count() const noexcept { return static_cast<Index>(tail_.size()); }
  TvVariant variant() const noexcept { return variant_; }
  Index tail(Index e) const { return tail_[static_cast<std::size_t>(e)]; }
  Index head(Index e) const { return head_[static_cast<std::size_t>(e)]; }
  Orientation orientation(Index e) const { return orientation_[static_cast<std::size_t>(e)]; }

  void forward(const Vector& u, Vector& du) const {
    du.resize(edge_count());
    const double* x = u.data();
    for (std::size_t e = 0; e < tail_.size(); ++e) du[static_cast<Index>(e)] = x[head_[e]] - x[tail_[e]];
  }
  Vector forward(const Vector& u) const {
    Vector du;
    forward(u, du);
    return du;
  }

  void adjoint(const Vector& f, Vector& out) const {
    out.setZero(vertex_count());
    double* o = out.data();
    for (std::size_t e = 0; e < tail_.size(); ++e) {
      const double fe = f[static_cast<Index>(e)];
      o[head_[e]] += fe;
      o[tail_[e]] -= fe;
    }
  }
  Vector adjoint(const Vector& f) const {
    Vector out;
    adjoint(f, out);
    return out;
  }

  // Upper bound on |D|^2 (largest Laplacian eigenvalue <= 2 * max degree).
  double norm_bound() const noexcept { return std::max(1.0, 2.0 * max_degree_); }

  Index component_count() const noexcept { return component_count_; }
  const std::vector<Index>& component_labels() const noexcept { return component_; }

  // sum_e |(Du)_e|
  double total_variation(const Vector& u) const {
    double s = 0.0;
    for (std::size_t e = 0; e < tail_.size(); ++e) s += std::abs(u[head_[e]] - u[tail_[e]]);
    return s;
  }

  // Per-component means; a field has finite G-norm only if these vanish.
  Vector component_means(const Vector& v) const {
    Vector sums = Vector::Zero(component_count_);
    Vector counts = Vector::Zero(component_count_);
    for (Index k = 0; k < v.size(); ++k) {
      sums[component_[static_cast<std::size_t>(k)]] += v[k];
      counts[component_[static_cast<std::size_t>(k)]] += 1.0;
    }
    return sums.cwiseQuotient(counts);
  }

  // Replaces every component by its mean.
  Vector component_average(const Vector& v) const {
    const Vector means = component_means(v);
    Vector out(v.size());
    for (Index k = 0; k < v.size(); ++k) out[k] = means[component_[static_cast<std::size_t>(k)]];
    return out;
  }

 private:
  void add_edge(Index a, Index b, Orientation o) {
    tail_.push_back(static_cast<int>(a));
    head_.push_back(static_cast<int>(b));
    orientation_.push_back(o);
  }

  void label_components() {
    const auto n = static_cast<std::size_t>(vertex_count());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&parent](std::size_t a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (std::size_t e = 0; e < tail_.size(); ++e) {
      const std::size_t ra = find(static_cast<std::size_t>(tail_[e]));
      const std::size_t rb = find(static_cast<std::size_t>(head_[e]));
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    component_.assign(n, -1);
    std::vector<Index> root_label(n, -1);
    component_count_ = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t r = find(k);
      if (root_label[r] < 0) root_label[r] = component_count_++;
      component_[k] = root_label[r];
    }
  }

  Index rows_;
  Index cols_;
  TvVariant variant_;
  std::vector<int> tail_;
  std::vector<int> head_;
  std::vector<Orientation> orientation_;
  int max_degree_ = 0;
  std::vector<Index> component_;
  Index component_count_ = 0;
};

// The (g, h) pair of the discrete G-norm: g carries the differences between
// rows i and i+1, h those between columns j and j+1. Entries without an
// edge (last row of g, last column of h, and the verbatim exclusions) are 0.
struct DualField {
  Eigen::MatrixXd g;
  Eigen::MatrixXd h;

  static DualField from_flow(const DifferenceGraph& graph, const Vector& flow) {
    DualField d{Eigen::MatrixXd::Zero(graph.rows(), graph.cols()),
                Eigen::MatrixXd::Zero(graph.rows(), graph.cols())};
    for (Index e = 0; e < graph.edge_count(); ++e) {
      const Index i = graph.tail(e) / graph.cols();
      const Index j = graph.tail(e) % graph.cols();
      if (graph.orientation(e) == DifferenceGraph::Orientation::vertical)
        d.g(i, j) = flow[e];
      else
        d.h(i, j) = flow[e];
    }
    return d;
  }

  // max over edges of |flow|; the G-norm is the least such value over all
  // fields representing v.
  double sup_norm() const {
    return std::max(g.cwiseAbs().maxCoeff(), h.cwiseAbs().maxCoeff());
  }
};

}  // namespace hjd
