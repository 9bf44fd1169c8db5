#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spdhg/dataset.hpp"
#include "spdhg/linalg.hpp"
#include "spdhg/rng.hpp"

namespace spdhg {

enum class Loss { kLogistic, kLeastSquares };

// Smooth term of the objective. A positive ridge coefficient adds
// (ridge/2)||x||^2 to the per-dataset mean loss and makes it strongly convex
// with modulus mu = ridge.
struct LossKind {
  Loss tag = Loss::kLogistic;
  double ridge = 0.0;
};

// Compact dual set Y describing the regularizer through its support
// function r(z) = max_{y in Y} <y, z>. The inf-ball of radius lambda yields
// lambda*||z||_1, the 2-ball of radius rho yields rho*||z||_2.
class DualSet {
 public:
  enum class Kind { kLinfBall, kL2Ball };

  static DualSet linf_ball(double radius);
  static DualSet l2_ball(double radius);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  double diameter(std::int64_t dim) const;
  double support(const Vec& z) const;
  Vec project(const Vec& v) const;
  bool contains(const Vec& v, double tol) const;
  Vec sample(std::int64_t dim, Rng& rng) const;

 private:
  DualSet(Kind kind, double radius);
  Kind kind_;
  double radius_;
};

// Compact feasible set X for the primal variable.
class PrimalSet {
 public:
  enum class Kind { kL2Ball, kBox };

  static PrimalSet l2_ball(double radius);
  static PrimalSet box(Vec lo, Vec hi);

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  double diameter(std::int64_t dim) const;
  Vec project(const Vec& v) const;
  bool contains(const Vec& v, double tol) const;
  bool contains_origin() const;
  Vec sample(std::int64_t dim, Rng& rng) const;

 private:
  PrimalSet(Kind kind, double radius, Vec lo, Vec hi);
  Kind kind_;
  double radius_;  // kL2Ball only
  Vec lo_, hi_;    // kBox only
};

// The full problem: min_{x in X} l(x) + r(Fx) with r given by the dual set,
// equivalently the saddle problem min_x max_{y in Y} l(x) + <y, Fx>.
struct ProblemSpec {
  Dataset data;       // training rows
  LossKind loss;
  CsrMatrix penalty;  // F, one row per fused pair
  PrimalSet x_set;
  DualSet y_set;

  std::int64_t dim() const { return data.dim(); }
  std::int64_t dual_dim() const { return penalty.rows(); }
  void validate() const;
};

// Mean per-sample loss over `rows` (default: all), plus the ridge term when
// configured. Logistic evaluation is log1p-based and cannot overflow.
double loss_value(const ProblemSpec& spec, const Vec& x,
                  std::optional<std::pair<std::int64_t, std::int64_t>> rows =
                      std::nullopt);

// Mean per-sample loss on an arbitrary dataset, without any ridge term.
// This is the "test loss" metric.
double mean_sample_loss(Loss tag, const Dataset& ds, const Vec& x);

// Exact mean gradient over all training rows (plus ridge*x).
Vec full_gradient(const ProblemSpec& spec, const Vec& x);

struct SampleGradient {
  Vec gradient;
  std::int64_t index;
};

// Gradient at one uniformly drawn training row (plus ridge*x). Averaging
// over all row indices reproduces full_gradient exactly.
SampleGradient stochastic_gradient(const ProblemSpec& spec, const Vec& x,
                                   Rng& rng);

// Same, for a caller-chosen row.
Vec sample_gradient(const ProblemSpec& spec, const Vec& x, std::int64_t row);

// r(z) as the support function of Y (closed form for both ball types).
double regularizer_value(const DualSet& y_set, const Vec& z);

// P(y, x) = l(x) + <y, Fx>. Throws if y lies outside Y by more than 1e-9.
double saddle_value(const ProblemSpec& spec, const Vec& y, const Vec& x);

// One +1/-1 row per edge (i, j), i < j, in input order.
CsrMatrix build_fusion_matrix(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& edges,
    std::int64_t dim);

struct Edge {
  std::int64_t i;
  std::int64_t j;
  double correlation;
};

// Feature pairs whose absolute empirical Pearson correlation reaches the
// threshold, sorted by descending |correlation| (ties by index), truncated
// to max_edges. Constant features produce no edges.
std::vector<Edge> build_graph_by_correlation(const Dataset& ds,
                                             double threshold,
                                             std::int64_t max_edges);

std::vector<std::pair<std::int64_t, std::int64_t>> edge_pairs(
    const std::vector<Edge>& edges);

// Exact population standard deviation of the per-sample gradients at x
// (exhaustive over all training rows; the ridge term cancels).
double estimate_sigma(const ProblemSpec& spec, const Vec& x);

// Smoothness constant of the configured loss: 0.25 max_i ||a_i||^2 for
// logistic, max_i ||a_i||^2 for least squares, plus the ridge coefficient.
double loss_lipschitz_bound(const ProblemSpec& spec);

}  // namespace spdhg
