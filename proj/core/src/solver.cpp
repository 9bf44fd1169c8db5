#include "spdhg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "spdhg/projections.hpp"
#include "spdhg/rng.hpp"

namespace spdhg {

double step_size(Regime regime, std::int64_t k, double lipschitz, double mu) {
  if (k < 0) throw std::invalid_argument("step_size: k must be >= 0");
  if (lipschitz < 0.0) {
    throw std::invalid_argument("step_size: lipschitz must be >= 0");
  }
  switch (regime) {
    case Regime::kGeneralConvex:
      return 1.0 / (std::sqrt(static_cast<double>(k) + 1.0) + lipschitz);
    case Regime::kStronglyConvexUniform:
      if (!(mu > 0.0)) {
        throw std::invalid_argument("step_size: strongly convex regime requires mu > 0");
      }
      return 1.0 / (mu * (static_cast<double>(k) + 1.0) + lipschitz);
    case Regime::kStronglyConvexNonUniform:
      if (!(mu > 0.0)) {
        throw std::invalid_argument("step_size: strongly convex regime requires mu > 0");
      }
      return 2.0 / (mu * (static_cast<double>(k) + 2.0) + 2.0 * lipschitz);
  }
  throw std::logic_error("step_size: unknown regime");
}

double averaging_weight(Regime regime, std::int64_t k, std::int64_t t) {
  if (k < 0 || t < 0 || k > t) {
    throw std::invalid_argument("averaging_weight: need 0 <= k <= t");
  }
  if (regime == Regime::kStronglyConvexNonUniform) {
    return 2.0 * (static_cast<double>(k) + 1.0) /
           ((static_cast<double>(t) + 1.0) * (static_cast<double>(t) + 2.0));
  }
  return 1.0 / (static_cast<double>(t) + 1.0);
}

std::pair<Vec, Vec> finalize_average(const IterateState& state) {
  if (state.k <= 0 || !(state.weight_accum > 0.0)) {
    throw std::logic_error("finalize_average: no steps taken");
  }
  Vec xbar(state.xbar_accum.size());
  Vec ybar(state.ybar_accum.size());
  for (std::size_t i = 0; i < xbar.size(); ++i) {
    xbar[i] = state.xbar_accum[i] / state.weight_accum;
  }
  for (std::size_t i = 0; i < ybar.size(); ++i) {
    ybar[i] = state.ybar_accum[i] / state.weight_accum;
  }
  return {std::move(xbar), std::move(ybar)};
}

double penalty_lambda_max(const ProblemSpec& spec) {
  if (spec.penalty.rows() == 0 || spec.penalty.nnz() == 0) return 0.0;
  // Fixed internal seed: the estimate is part of the deterministic setup.
  return spectral_norm_sq(spec.penalty, 1e-12, 200000, 0x5eedf00dULL);
}

double default_lpdhg_beta(const ProblemSpec& spec, double lipschitz) {
  return 1.0 / (lipschitz + std::sqrt(penalty_lambda_max(spec)));
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

// Iterate weight used by the online averaging accumulators; normalizing by
// their running sum reproduces the averaging_weight schedule at any horizon.
double raw_weight(Regime regime, std::int64_t k) {
  return regime == Regime::kStronglyConvexNonUniform
             ? static_cast<double>(k) + 1.0
             : 1.0;
}

std::vector<std::int64_t> checkpoint_iters(const SolverConfig& cfg) {
  if (!cfg.checkpoints.empty()) {
    std::vector<std::int64_t> iters = cfg.checkpoints;
    for (std::size_t i = 0; i < iters.size(); ++i) {
      if (iters[i] < 1 || iters[i] > cfg.iterations ||
          (i > 0 && iters[i] <= iters[i - 1])) {
        throw std::invalid_argument(
            "SolverConfig: checkpoints must be ascending within [1, iterations]");
      }
    }
    return iters;
  }
  std::vector<std::int64_t> iters;
  for (std::int64_t it = cfg.checkpoint_every; it < cfg.iterations;
       it += cfg.checkpoint_every) {
    iters.push_back(it);
  }
  iters.push_back(cfg.iterations);
  return iters;
}

void validate_config(const ProblemSpec& spec, const SolverConfig& cfg) {
  spec.validate();
  if (!(cfg.s > 0.0)) throw std::invalid_argument("SolverConfig: s must be positive");
  if (cfg.iterations < 1) {
    throw std::invalid_argument("SolverConfig: need at least one iteration");
  }
  if (cfg.lipschitz < 0.0) {
    throw std::invalid_argument("SolverConfig: lipschitz must be >= 0");
  }
  if (cfg.regime != Regime::kGeneralConvex && !(cfg.mu > 0.0)) {
    throw std::invalid_argument(
        "SolverConfig: strongly convex regimes require mu > 0");
  }
  if (cfg.checkpoints.empty() && cfg.checkpoint_every < 1) {
    throw std::invalid_argument("SolverConfig: checkpoint_every must be >= 1");
  }
  if (cfg.x0) {
    if (static_cast<std::int64_t>(cfg.x0->size()) != spec.dim()) {
      throw std::invalid_argument("SolverConfig: x0 has the wrong dimension");
    }
    if (!spec.x_set.contains(*cfg.x0, 1e-9)) {
      throw std::invalid_argument("SolverConfig: x0 lies outside X");
    }
  } else if (!spec.x_set.contains_origin()) {
    throw std::invalid_argument(
        "SolverConfig: default start x0 = 0 lies outside X; supply x0");
  }
}

TraceRow eval_checkpoint(const ProblemSpec& spec, const Dataset* test,
                         const GapReference* gap_ref, const Vec& xbar,
                         const Vec& ybar, std::int64_t iter, double epoch,
                         double elapsed_ms) {
  TraceRow row;
  row.iter = iter;
  row.epoch = epoch;
  row.objective =
      loss_value(spec, xbar) + spec.y_set.support(matvec(spec.penalty, xbar));
  if (test != nullptr) {
    row.test_loss = mean_sample_loss(spec.loss.tag, *test, xbar);
  }
  if (gap_ref != nullptr) {
    row.gap = saddle_value(spec, gap_ref->y_star, xbar) -
              saddle_value(spec, ybar, gap_ref->x_star);
  }
  row.elapsed_ms = elapsed_ms;
  return row;
}

// Shared primal-dual loop; the only difference between the stochastic and
// full-gradient solvers is the gradient oracle and the step rule, so a
// single-sample dataset makes both produce bit-identical trajectories.
RunTrace run_primal_dual(const ProblemSpec& spec, const SolverConfig& cfg,
                         bool stochastic, const Dataset* test,
                         const GapReference* gap_ref) {
  validate_config(spec, cfg);
  const CsrMatrix& F = spec.penalty;
  const std::int64_t d = spec.dim();
  const std::int64_t l = spec.dual_dim();
  const std::int64_t n = spec.data.n();
  const bool schedule = stochastic || cfg.lpdhg_step == LpdhgStep::kSchedule;
  double beta_const = 0.0;
  if (!schedule) {
    beta_const = cfg.lpdhg_beta ? *cfg.lpdhg_beta
                                : default_lpdhg_beta(spec, cfg.lipschitz);
    if (!(beta_const > 0.0)) {
      throw std::invalid_argument("SolverConfig: lpdhg_beta must be positive");
    }
  }

  IterateState st;
  st.x = cfg.x0 ? *cfg.x0 : Vec(d, 0.0);
  st.y = Vec(l, 0.0);
  st.xbar_accum = Vec(d, 0.0);
  st.ybar_accum = Vec(l, 0.0);

  Rng rng(cfg.seed);
  RunTrace trace;
  const std::vector<std::int64_t> checkpoints = checkpoint_iters(cfg);
  std::size_t next_cp = 0;

  const std::uint64_t nnz_f = static_cast<std::uint64_t>(F.nnz());
  const auto& row_offsets = spec.data.features.row_offsets();
  const std::uint64_t ridge_flops = spec.loss.ridge > 0.0 ? 2 * d : 0;
  const std::uint64_t full_grad_flops =
      2 * static_cast<std::uint64_t>(spec.data.features.nnz()) +
      static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(d) +
      ridge_flops;

  double elapsed_ms = 0.0;
  std::int64_t samples_consumed = 0;
  Clock::time_point segment_start = Clock::now();

  for (std::int64_t k = 0; k < cfg.iterations; ++k) {
    const std::int64_t sample = stochastic ? rng.next_index(n) : -1;

    // y^{k+1} = proj_Y(y^k + s F x^k)
    Vec shifted = matvec(F, st.x);
    for (std::int64_t i = 0; i < l; ++i) {
      shifted[i] = st.y[i] + cfg.s * shifted[i];
    }
    st.y = spec.y_set.project(shifted);
    trace.update_flops += 2 * nnz_f + 3 * static_cast<std::uint64_t>(l);

    // x^{k+1} = proj_X(x^k - beta (grad + F^T y^{k+1}))
    Vec g;
    if (stochastic) {
      g = sample_gradient(spec, st.x, sample);
      trace.update_flops +=
          2 * static_cast<std::uint64_t>(row_offsets[sample + 1] -
                                         row_offsets[sample]) +
          2 + ridge_flops;
    } else {
      g = full_gradient(spec, st.x);
      trace.update_flops += full_grad_flops;
    }
    const double beta =
        schedule ? step_size(cfg.regime, k, cfg.lipschitz, cfg.mu) : beta_const;
    const Vec fty = matvec_transpose(F, st.y);
    for (std::int64_t j = 0; j < d; ++j) {
      g[j] = st.x[j] - beta * (g[j] + fty[j]);
    }
    st.x = spec.x_set.project(g);
    trace.update_flops += 2 * nnz_f + 3 * static_cast<std::uint64_t>(d);

    if (!all_finite(st.x) || !all_finite(st.y)) {
      trace.aborted = true;
      trace.abort_reason =
          "non-finite iterate at iteration " + std::to_string(k + 1);
      trace.iterations = k;
      break;
    }

    const double w = raw_weight(cfg.regime, k);
    axpy(w, st.x, st.xbar_accum);
    axpy(w, st.y, st.ybar_accum);
    st.weight_accum += w;
    st.k = k + 1;
    trace.update_flops += 4 * static_cast<std::uint64_t>(d + l) + 1;
    samples_consumed += stochastic ? 1 : n;
    trace.iterations = k + 1;

    if (next_cp < checkpoints.size() && k + 1 == checkpoints[next_cp]) {
      const Clock::time_point now = Clock::now();
      if (cfg.record_wall_time) elapsed_ms += ms_between(segment_start, now);
      auto [xbar, ybar] = finalize_average(st);
      trace.rows.push_back(eval_checkpoint(
          spec, test, gap_ref, xbar, ybar, k + 1,
          static_cast<double>(samples_consumed) / static_cast<double>(n),
          elapsed_ms));
      ++next_cp;
      segment_start = Clock::now();
    }
  }

  if (st.k > 0) {
    auto [xbar, ybar] = finalize_average(st);
    trace.x_bar = std::move(xbar);
    trace.y_bar = std::move(ybar);
  }
  return trace;
}

}  // namespace

RunTrace spdhg_run(const ProblemSpec& spec, const SolverConfig& cfg,
                   const Dataset* test, const GapReference* gap_ref) {
  return run_primal_dual(spec, cfg, /*stochastic=*/true, test, gap_ref);
}

RunTrace lpdhg_run(const ProblemSpec& spec, const SolverConfig& cfg,
                   const Dataset* test, const GapReference* gap_ref) {
  return run_primal_dual(spec, cfg, /*stochastic=*/false, test, gap_ref);
}

RunTrace gadmm_run(const ProblemSpec& spec, const SolverConfig& cfg,
                   double rho, const Dataset* test) {
  validate_config(spec, cfg);
  if (!(rho > 0.0)) throw std::invalid_argument("gadmm_run: rho must be positive");
  if (spec.y_set.kind() != DualSet::Kind::kLinfBall) {
    throw std::invalid_argument(
        "gadmm_run: requires an l-infinity dual ball (l1 regularizer)");
  }
  const CsrMatrix& F = spec.penalty;
  const std::int64_t d = spec.dim();
  const std::int64_t l = spec.dual_dim();
  const std::int64_t n = spec.data.n();
  const double reg = spec.y_set.radius();

  Vec x = cfg.x0 ? *cfg.x0 : Vec(d, 0.0);
  Vec z(l, 0.0);
  Vec mult(l, 0.0);

  RunTrace trace;
  const std::vector<std::int64_t> checkpoints = checkpoint_iters(cfg);
  std::size_t next_cp = 0;

  const std::uint64_t nnz_f = static_cast<std::uint64_t>(F.nnz());
  const std::uint64_t ridge_flops = spec.loss.ridge > 0.0 ? 2 * d : 0;
  const std::uint64_t full_grad_flops =
      2 * static_cast<std::uint64_t>(spec.data.features.nnz()) +
      static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(d) +
      ridge_flops;

  double elapsed_ms = 0.0;
  Clock::time_point segment_start = Clock::now();

  for (std::int64_t k = 0; k < cfg.iterations; ++k) {
    // z^{k+1} = argmin_z reg ||z||_1 + (rho/2) ||z - (F x^k + mult^k/rho)||^2
    const Vec fx = matvec(F, x);
    Vec w(l);
    for (std::int64_t i = 0; i < l; ++i) w[i] = fx[i] + mult[i] / rho;
    z = soft_threshold(w, reg / rho);
    trace.update_flops += 2 * nnz_f + 4 * static_cast<std::uint64_t>(l);

    // x^{k+1} = proj_X(x^k - rho (grad l(x^k) + F^T mult^k - rho F^T (z - F x^k)))
    Vec g = full_gradient(spec, x);
    trace.update_flops += full_grad_flops;
    const Vec fmult = matvec_transpose(F, mult);
    Vec resid(l);
    for (std::int64_t i = 0; i < l; ++i) resid[i] = z[i] - fx[i];
    const Vec fresid = matvec_transpose(F, resid);
    Vec step(d);
    for (std::int64_t j = 0; j < d; ++j) {
      step[j] = x[j] - rho * (g[j] + fmult[j] - rho * fresid[j]);
    }
    x = spec.x_set.project(step);
    trace.update_flops += 4 * nnz_f + static_cast<std::uint64_t>(l) +
                          4 * static_cast<std::uint64_t>(d);

    // mult^{k+1} = mult^k - rho (z^{k+1} - F x^{k+1})
    const Vec fx_new = matvec(F, x);
    for (std::int64_t i = 0; i < l; ++i) {
      mult[i] -= rho * (z[i] - fx_new[i]);
    }
    trace.update_flops += 2 * nnz_f + 3 * static_cast<std::uint64_t>(l);

    if (!all_finite(x) || !all_finite(z) || !all_finite(mult)) {
      trace.aborted = true;
      trace.abort_reason =
          "non-finite iterate at iteration " + std::to_string(k + 1);
      trace.iterations = k;
      break;
    }
    trace.iterations = k + 1;

    if (next_cp < checkpoints.size() && k + 1 == checkpoints[next_cp]) {
      const Clock::time_point now = Clock::now();
      if (cfg.record_wall_time) elapsed_ms += ms_between(segment_start, now);
      trace.rows.push_back(
          eval_checkpoint(spec, test, nullptr, x, mult, k + 1,
                          static_cast<double>(k + 1), elapsed_ms));
      ++next_cp;
      segment_start = Clock::now();
    }
  }

  Vec resid(l);
  const Vec fx_final = matvec(F, x);
  for (std::int64_t i = 0; i < l; ++i) resid[i] = z[i] - fx_final[i];
  trace.constraint_residual = norm2(resid);
  trace.x_bar = std::move(x);
  trace.y_bar = std::move(mult);
  return trace;
}

}  // namespace spdhg
