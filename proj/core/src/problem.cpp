#include "spdhg/problem.hpp"

#include <algorithm>
#include <cmath>

#include "spdhg/projections.hpp"

namespace spdhg {

namespace {

void check_dim(const Vec& v, std::int64_t d, const char* what) {
  if (static_cast<std::int64_t>(v.size()) != d) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(d) + ", got " +
                                std::to_string(v.size()));
  }
}

// Per-sample loss at margin m = a^T x with label b. The logistic branch is
// chosen by the sign of b*m so neither exp can overflow.
double sample_loss(Loss tag, double margin, double label) {
  if (tag == Loss::kLogistic) {
    const double bm = label * margin;
    return bm >= 0.0 ? std::log1p(std::exp(-bm)) : -bm + std::log1p(std::exp(bm));
  }
  const double r = margin - label;
  return 0.5 * r * r;
}

// Scalar c such that the per-sample gradient is c * a.
double sample_coefficient(Loss tag, double margin, double label) {
  if (tag == Loss::kLogistic) {
    const double bm = label * margin;
    double sig;  // sigmoid(-bm) without overflow
    if (bm >= 0.0) {
      const double e = std::exp(-bm);
      sig = e / (1.0 + e);
    } else {
      sig = 1.0 / (1.0 + std::exp(bm));
    }
    return -label * sig;
  }
  return margin - label;
}

// g += c * a_row, walking the row's entries in storage order.
void add_scaled_row(const CsrMatrix& features, std::int64_t row, double c,
                    Vec& g) {
  const auto& offsets = features.row_offsets();
  const auto& cols = features.col_indices();
  const auto& vals = features.values();
  for (std::int64_t p = offsets[row]; p < offsets[row + 1]; ++p) {
    g[cols[p]] += c * vals[p];
  }
}

// Mean of the per-sample base gradients over all rows, ridge excluded.
Vec mean_base_gradient(const ProblemSpec& spec, const Vec& x) {
  Vec g(spec.dim(), 0.0);
  const std::int64_t n = spec.data.n();
  for (std::int64_t r = 0; r < n; ++r) {
    const double c = sample_coefficient(
        spec.loss.tag, spec.data.features.row_dot(r, x), spec.data.labels[r]);
    add_scaled_row(spec.data.features, r, c, g);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& e : g) e *= inv_n;
  return g;
}

}  // namespace

DualSet::DualSet(Kind kind, double radius) : kind_(kind), radius_(radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("DualSet: radius must be positive");
  }
}

DualSet DualSet::linf_ball(double radius) {
  return DualSet(Kind::kLinfBall, radius);
}

DualSet DualSet::l2_ball(double radius) { return DualSet(Kind::kL2Ball, radius); }

double DualSet::diameter(std::int64_t dim) const {
  if (kind_ == Kind::kLinfBall) {
    return 2.0 * radius_ * std::sqrt(static_cast<double>(dim));
  }
  return 2.0 * radius_;
}

double DualSet::support(const Vec& z) const {
  return kind_ == Kind::kLinfBall ? radius_ * norm1(z) : radius_ * norm2(z);
}

Vec DualSet::project(const Vec& v) const {
  return kind_ == Kind::kLinfBall ? project_linf_ball(v, radius_)
                                  : project_l2_ball(v, radius_);
}

bool DualSet::contains(const Vec& v, double tol) const {
  if (kind_ == Kind::kLinfBall) {
    for (double e : v) {
      if (std::abs(e) > radius_ + tol) return false;
    }
    return true;
  }
  return norm2(v) <= radius_ + tol;
}

Vec DualSet::sample(std::int64_t dim, Rng& rng) const {
  Vec v(dim);
  if (kind_ == Kind::kLinfBall) {
    for (double& e : v) e = radius_ * (2.0 * rng.next_double() - 1.0);
    return v;
  }
  for (double& e : v) e = rng.next_gaussian();
  const double n = norm2(v);
  const double r =
      radius_ * std::pow(rng.next_double(), 1.0 / static_cast<double>(dim));
  if (n > 0.0) {
    for (double& e : v) e *= r / n;
  }
  return v;
}

PrimalSet::PrimalSet(Kind kind, double radius, Vec lo, Vec hi)
    : kind_(kind), radius_(radius), lo_(std::move(lo)), hi_(std::move(hi)) {}

PrimalSet PrimalSet::l2_ball(double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("PrimalSet: radius must be positive");
  }
  return PrimalSet(Kind::kL2Ball, radius, {}, {});
}

PrimalSet PrimalSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.empty()) {
    throw std::invalid_argument("PrimalSet: box bounds must match and be non-empty");
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) {
      throw std::invalid_argument("PrimalSet: box requires lo < hi componentwise");
    }
  }
  return PrimalSet(Kind::kBox, 0.0, std::move(lo), std::move(hi));
}

double PrimalSet::diameter(std::int64_t dim) const {
  if (kind_ == Kind::kL2Ball) {
    (void)dim;
    return 2.0 * radius_;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    const double w = hi_[i] - lo_[i];
    acc += w * w;
  }
  return std::sqrt(acc);
}

Vec PrimalSet::project(const Vec& v) const {
  return kind_ == Kind::kL2Ball ? project_l2_ball(v, radius_)
                                : project_box(v, lo_, hi_);
}

bool PrimalSet::contains(const Vec& v, double tol) const {
  if (kind_ == Kind::kL2Ball) return norm2(v) <= radius_ + tol;
  if (v.size() != lo_.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < lo_[i] - tol || v[i] > hi_[i] + tol) return false;
  }
  return true;
}

bool PrimalSet::contains_origin() const {
  if (kind_ == Kind::kL2Ball) return true;
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (lo_[i] > 0.0 || hi_[i] < 0.0) return false;
  }
  return true;
}

Vec PrimalSet::sample(std::int64_t dim, Rng& rng) const {
  if (kind_ == Kind::kBox) {
    Vec v(lo_.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = lo_[i] + rng.next_double() * (hi_[i] - lo_[i]);
    }
    return v;
  }
  Vec v(dim);
  for (double& e : v) e = rng.next_gaussian();
  const double n = norm2(v);
  const double r =
      radius_ * std::pow(rng.next_double(), 1.0 / static_cast<double>(dim));
  if (n > 0.0) {
    for (double& e : v) e *= r / n;
  }
  return v;
}

void ProblemSpec::validate() const {
  validate_dataset(data);
  if (loss.ridge < 0.0) {
    throw std::invalid_argument("ProblemSpec: ridge coefficient must be >= 0");
  }
  if (penalty.cols() != data.dim()) {
    throw std::invalid_argument(
        "ProblemSpec: penalty matrix has " + std::to_string(penalty.cols()) +
        " columns but the data dimension is " + std::to_string(data.dim()));
  }
  if (x_set.kind() == PrimalSet::Kind::kBox &&
      static_cast<std::int64_t>(x_set.lo().size()) != data.dim()) {
    throw std::invalid_argument("ProblemSpec: box bounds do not match dimension");
  }
}

double loss_value(const ProblemSpec& spec, const Vec& x,
                  std::optional<std::pair<std::int64_t, std::int64_t>> rows) {
  check_dim(x, spec.dim(), "loss_value");
  std::int64_t begin = 0;
  std::int64_t end = spec.data.n();
  if (rows) {
    begin = rows->first;
    end = rows->second;
    if (begin < 0 || end > spec.data.n() || begin >= end) {
      throw std::invalid_argument("loss_value: bad row range");
    }
  }
  double acc = 0.0;
  for (std::int64_t r = begin; r < end; ++r) {
    acc += sample_loss(spec.loss.tag, spec.data.features.row_dot(r, x),
                       spec.data.labels[r]);
  }
  double value = acc / static_cast<double>(end - begin);
  if (spec.loss.ridge > 0.0) {
    value += 0.5 * spec.loss.ridge * norm2_sq(x);
  }
  return value;
}

double mean_sample_loss(Loss tag, const Dataset& ds, const Vec& x) {
  check_dim(x, ds.dim(), "mean_sample_loss");
  double acc = 0.0;
  for (std::int64_t r = 0; r < ds.n(); ++r) {
    acc += sample_loss(tag, ds.features.row_dot(r, x), ds.labels[r]);
  }
  return acc / static_cast<double>(ds.n());
}

Vec full_gradient(const ProblemSpec& spec, const Vec& x) {
  check_dim(x, spec.dim(), "full_gradient");
  Vec g = mean_base_gradient(spec, x);
  if (spec.loss.ridge > 0.0) axpy(spec.loss.ridge, x, g);
  return g;
}

Vec sample_gradient(const ProblemSpec& spec, const Vec& x, std::int64_t row) {
  check_dim(x, spec.dim(), "sample_gradient");
  if (row < 0 || row >= spec.data.n()) {
    throw std::invalid_argument("sample_gradient: row out of range");
  }
  Vec g(spec.dim(), 0.0);
  const double c = sample_coefficient(
      spec.loss.tag, spec.data.features.row_dot(row, x), spec.data.labels[row]);
  add_scaled_row(spec.data.features, row, c, g);
  if (spec.loss.ridge > 0.0) axpy(spec.loss.ridge, x, g);
  return g;
}

SampleGradient stochastic_gradient(const ProblemSpec& spec, const Vec& x,
                                   Rng& rng) {
  const std::int64_t row = rng.next_index(spec.data.n());
  return {sample_gradient(spec, x, row), row};
}

double regularizer_value(const DualSet& y_set, const Vec& z) {
  return y_set.support(z);
}

double saddle_value(const ProblemSpec& spec, const Vec& y, const Vec& x) {
  check_dim(y, spec.dual_dim(), "saddle_value");
  if (!spec.y_set.contains(y, 1e-9)) {
    throw std::invalid_argument("saddle_value: y is not feasible");
  }
  return loss_value(spec, x) + dot(y, matvec(spec.penalty, x));
}

CsrMatrix build_fusion_matrix(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& edges,
    std::int64_t dim) {
  std::vector<Triplet> entries;
  entries.reserve(2 * edges.size());
  std::vector<std::pair<std::int64_t, std::int64_t>> seen = edges;
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw std::invalid_argument("build_fusion_matrix: duplicate edge");
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    if (i < 0 || j >= dim || i >= j) {
      throw std::invalid_argument(
          "build_fusion_matrix: edge (" + std::to_string(i) + ", " +
          std::to_string(j) + ") must satisfy 0 <= i < j < " +
          std::to_string(dim));
    }
    const std::int64_t row = static_cast<std::int64_t>(e);
    entries.push_back({row, i, 1.0});
    entries.push_back({row, j, -1.0});
  }
  return CsrMatrix::from_triplets(static_cast<std::int64_t>(edges.size()), dim,
                                  std::move(entries));
}

std::vector<std::pair<std::int64_t, std::int64_t>> edge_pairs(
    const std::vector<Edge>& edges) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.emplace_back(e.i, e.j);
  return out;
}

std::vector<Edge> build_graph_by_correlation(const Dataset& ds,
                                             double threshold,
                                             std::int64_t max_edges) {
  validate_dataset(ds);
  const std::int64_t d = ds.dim();
  if (d < 2) {
    throw std::invalid_argument("build_graph_by_correlation: need dimension >= 2");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("build_graph_by_correlation: threshold must lie in (0, 1)");
  }
  if (max_edges < 0) {
    throw std::invalid_argument("build_graph_by_correlation: max_edges must be >= 0");
  }
  // Dense d x d cross-product accumulation; meant for the moderate feature
  // counts these graphs are built over.
  constexpr std::int64_t kMaxDim = 4096;
  if (d > kMaxDim) {
    throw std::invalid_argument(
        "build_graph_by_correlation: dimension " + std::to_string(d) +
        " exceeds the supported maximum " + std::to_string(kMaxDim));
  }

  const double n = static_cast<double>(ds.n());
  Vec sums(d, 0.0);
  std::vector<double> gram(static_cast<std::size_t>(d) * d, 0.0);
  const auto& offsets = ds.features.row_offsets();
  const auto& cols = ds.features.col_indices();
  const auto& vals = ds.features.values();
  for (std::int64_t r = 0; r < ds.n(); ++r) {
    for (std::int64_t p = offsets[r]; p < offsets[r + 1]; ++p) {
      sums[cols[p]] += vals[p];
      for (std::int64_t q = p; q < offsets[r + 1]; ++q) {
        gram[static_cast<std::size_t>(cols[p]) * d + cols[q]] +=
            vals[p] * vals[q];
      }
    }
  }

  Vec means(d), vars(d);
  for (std::int64_t j = 0; j < d; ++j) {
    means[j] = sums[j] / n;
    const double msq = gram[static_cast<std::size_t>(j) * d + j] / n;
    vars[j] = msq - means[j] * means[j];
    // constant columns (variance zero up to cancellation noise) are excluded
    if (vars[j] <= 1e-12 * std::max(msq, means[j] * means[j])) vars[j] = 0.0;
  }

  std::vector<Edge> edges;
  for (std::int64_t i = 0; i < d; ++i) {
    if (vars[i] == 0.0) continue;
    for (std::int64_t j = i + 1; j < d; ++j) {
      if (vars[j] == 0.0) continue;
      const double cov =
          gram[static_cast<std::size_t>(i) * d + j] / n - means[i] * means[j];
      const double corr = cov / std::sqrt(vars[i] * vars[j]);
      if (std::abs(corr) >= threshold) edges.push_back({i, j, corr});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    const double fa = std::abs(a.correlation);
    const double fb = std::abs(b.correlation);
    if (fa != fb) return fa > fb;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  if (static_cast<std::int64_t>(edges.size()) > max_edges) {
    edges.resize(static_cast<std::size_t>(max_edges));
  }
  return edges;
}

double estimate_sigma(const ProblemSpec& spec, const Vec& x) {
  check_dim(x, spec.dim(), "estimate_sigma");
  const std::int64_t n = spec.data.n();
  const Vec gbar = mean_base_gradient(spec, x);
  double acc = 0.0;
  Vec diff(spec.dim());
  for (std::int64_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = -gbar[j];
    const double c = sample_coefficient(
        spec.loss.tag, spec.data.features.row_dot(r, x), spec.data.labels[r]);
    add_scaled_row(spec.data.features, r, c, diff);
    acc += norm2_sq(diff);
  }
  return std::sqrt(std::max(0.0, acc / static_cast<double>(n)));
}

double loss_lipschitz_bound(const ProblemSpec& spec) {
  double max_sq = 0.0;
  for (std::int64_t r = 0; r < spec.data.n(); ++r) {
    max_sq = std::max(max_sq, spec.data.features.row_norm_sq(r));
  }
  const double base =
      spec.loss.tag == Loss::kLogistic ? 0.25 * max_sq : max_sq;
  return base + spec.loss.ridge;
}

}  // namespace spdhg
