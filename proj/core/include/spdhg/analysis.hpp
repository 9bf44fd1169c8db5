#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spdhg/problem.hpp"
#include "spdhg/solver.hpp"

namespace spdhg {

// Saddle point computed to a fixed-point residual.
struct ReferencePoint {
  Vec x_star;
  Vec y_star;
  double residual = 0.0;
};

class ReferenceError : public std::runtime_error {
 public:
  ReferenceError(const std::string& what, ReferencePoint best)
      : std::runtime_error(what), best_(std::move(best)) {}
  // Best point reached; callers may accept it despite the missed tolerance.
  const ReferencePoint& best() const { return best_; }

 private:
  ReferencePoint best_;
};

// Long full-gradient run until the joint fixed-point residual
// ||x_{k+1}-x_k|| + ||y_{k+1}-y_k|| drops below tol. Throws ReferenceError
// (carrying the best point) if the budget runs out first.
ReferencePoint compute_reference(const ProblemSpec& spec,
                                 std::int64_t max_iters, double tol,
                                 double s = 1.0);

// P(y*, xbar) - P(ybar, x*). Throws if any point is infeasible or the gap
// falls below -10 * ref.residual (reference too coarse).
double duality_gap(const ProblemSpec& spec, const ReferencePoint& ref,
                   const Vec& xbar, const Vec& ybar);

// Everything the convergence-bound right-hand sides need.
struct BoundParams {
  double D_x = 0.0;
  double D_y = 0.0;
  double sigma = 0.0;
  double L = 0.0;
  double mu = 0.0;
  double lambda_max_FtF = 0.0;
  double s = 1.0;
};

// Measured constants for a concrete instance. sigma is the exhaustive
// gradient spread maximized over the origin and ten random feasible points.
BoundParams derive_bound_params(const ProblemSpec& spec, double s,
                                std::uint64_t seed);

// Right-hand side of the high-probability bound for the given regime at
// averaging horizon t and confidence parameter omega, term by term:
//
// general convex:
//   Dy^2/(2s(t+1)) + L Dx^2/(2(t+1)) + (Dx^2 + 2 lmax Dy^2)/sqrt(t+1)
//     + 2 sqrt(omega) Dx sigma/sqrt(t+1) + (1+omega) sigma^2/sqrt(t+1)
// strongly convex, uniform:
//   Dy^2/(2s(t+1)) + L Dx^2/(2(t+1)) + lmax Dy^2 log(t+1)/(mu(t+1))
//     + 2 sqrt(omega) Dx sigma/sqrt(t+1)
//     + (1+omega) sigma^2 log(t+1)/(2 mu(t+1))
// strongly convex, non-uniform:
//   Dy^2/(s(t+2)) + L Dx^2/(t+2) + 4 lmax Dy^2/(mu(t+2))
//     + 2 sqrt(2 omega) Dx sigma/sqrt(t+2) + 4(1+omega) sigma^2/(mu(t+2))
//
// The exceedance probability cap in all three cases is 2 exp(-omega).
double theorem_bound(Regime regime, const BoundParams& params, std::int64_t t,
                     double omega);

struct TailReport {
  double omega = 0.0;
  std::int64_t trials = 0;
  std::int64_t t = 0;
  double bound_value = 0.0;
  std::int64_t exceed_count = 0;
  double empirical_rate = 0.0;
  double theoretical_cap = 0.0;  // 2 exp(-omega)
};

// Monte-Carlo tail check: `trials` independent stochastic runs (trial seeds
// derived from cfg.seed), each final duality gap compared against the bound
// at horizon cfg.iterations - 1. Aggregation is in trial order, so the
// report is identical for any worker count. Throws if ref.residual exceeds
// 1% of the bound.
TailReport tail_experiment(const ProblemSpec& spec, const SolverConfig& cfg,
                           const ReferencePoint& ref, double omega,
                           std::int64_t trials, int jobs = 1);

// Least-squares slope of log(gap) against log(t). Requires at least five
// points spanning two decades in t with strictly positive gaps.
double fit_rate(const std::vector<std::pair<double, double>>& points);

// Stable-key-order JSON for a tail report.
std::string tail_report_json(const TailReport& report,
                             const std::string& regime_label);

const char* regime_label(Regime regime);

}  // namespace spdhg
