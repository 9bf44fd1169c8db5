#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spdhg/problem.hpp"
#include "spdhg/trace.hpp"

namespace spdhg {

enum class Regime {
  kGeneralConvex,
  kStronglyConvexUniform,
  kStronglyConvexNonUniform,
};

// Primal step size for iteration k (0-based):
//   general convex            1 / (sqrt(k+1) + L)
//   strongly convex, uniform  1 / (mu(k+1) + L)
//   strongly convex, non-uni  2 / (mu(k+2) + 2L)
// Strongly convex regimes require mu > 0.
double step_size(Regime regime, std::int64_t k, double lipschitz, double mu);

// Averaging weight of iterate k+1 in a horizon-t run (0 <= k <= t):
// 1/(t+1) for the uniform schemes, 2(k+1)/((t+1)(t+2)) for the non-uniform
// one. Weights over k = 0..t sum to 1.
double averaging_weight(Regime regime, std::int64_t k, std::int64_t t);

enum class LpdhgStep {
  kConstant,  // fixed beta = 1/(L + sqrt(lambda_max(F^T F))) unless overridden
  kSchedule,  // same decaying schedule the stochastic solver uses
};

struct SolverConfig {
  Regime regime = Regime::kGeneralConvex;
  double s = 1.0;           // dual proximal step, > 0
  double lipschitz = 0.0;   // L
  double mu = 0.0;          // strong convexity modulus (ridge coefficient)
  std::int64_t iterations = 1000;  // number of update steps
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 100;
  // Explicit checkpoint iterations (ascending, each in [1, iterations]);
  // overrides checkpoint_every when non-empty.
  std::vector<std::int64_t> checkpoints;
  // Start point; defaults to the origin, which must lie in X.
  std::optional<Vec> x0;
  LpdhgStep lpdhg_step = LpdhgStep::kConstant;
  std::optional<double> lpdhg_beta;
  // When false the elapsed_ms column is written as zero, which makes whole
  // artifacts byte-reproducible.
  bool record_wall_time = true;
};

// Running weighted sums of the iterates; the averaged pair is
// (xbar_accum / weight_accum, ybar_accum / weight_accum).
struct IterateState {
  Vec x;
  Vec y;
  Vec xbar_accum;
  Vec ybar_accum;
  double weight_accum = 0.0;
  std::int64_t k = 0;
};

// Normalized averaged iterates. Throws if no step has been taken.
std::pair<Vec, Vec> finalize_average(const IterateState& state);

// Saddle point used for duality-gap checkpoints.
struct GapReference {
  Vec x_star;
  Vec y_star;
};

// Stochastic primal-dual hybrid gradient: per iteration draw one sample,
// take the proximal dual ascent step y <- proj_Y(y + s F x), then the
// projected stochastic gradient step
//   x <- proj_X(x - beta_k (grad l(x, xi) + F^T y)).
// Checkpoint metrics are evaluated on the running weighted average.
RunTrace spdhg_run(const ProblemSpec& spec, const SolverConfig& cfg,
                   const Dataset* test = nullptr,
                   const GapReference* gap_ref = nullptr);

// Same scheme with the exact full gradient. The step is constant by default
// (cfg.lpdhg_step) or the regime schedule for ablation.
RunTrace lpdhg_run(const ProblemSpec& spec, const SolverConfig& cfg,
                   const Dataset* test = nullptr,
                   const GapReference* gap_ref = nullptr);

// Gradient-based ADMM baseline on the split min l(x) + r(z), z = Fx, for the
// l1 regularizer: soft-threshold z-update, projected gradient x-update with
// the full gradient, multiplier update. Maintains one extra vector (the
// multiplier); checkpoint metrics use the current iterate.
RunTrace gadmm_run(const ProblemSpec& spec, const SolverConfig& cfg,
                   double rho, const Dataset* test = nullptr);

// Default constant step for the full-gradient solver.
double default_lpdhg_beta(const ProblemSpec& spec, double lipschitz);

// Largest eigenvalue of F^T F for the given problem (0 for an empty F).
double penalty_lambda_max(const ProblemSpec& spec);

}  // namespace spdhg
