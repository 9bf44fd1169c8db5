#include "spdhg/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "spdhg/projections.hpp"
#include "spdhg/rng.hpp"
#include "spdhg/trace.hpp"

namespace spdhg {

const char* regime_label(Regime regime) {
  switch (regime) {
    case Regime::kGeneralConvex:
      return "gc";
    case Regime::kStronglyConvexUniform:
      return "sc-uniform";
    case Regime::kStronglyConvexNonUniform:
      return "sc-nonuniform";
  }
  return "?";
}

ReferencePoint compute_reference(const ProblemSpec& spec,
                                 std::int64_t max_iters, double tol, double s) {
  spec.validate();
  if (!(tol > 0.0)) {
    throw std::invalid_argument("compute_reference: tol must be positive");
  }
  if (!(s > 0.0)) {
    throw std::invalid_argument("compute_reference: s must be positive");
  }
  const double beta = default_lpdhg_beta(spec, loss_lipschitz_bound(spec));
  const std::int64_t d = spec.dim();
  const std::int64_t l = spec.dual_dim();
  if (!spec.x_set.contains_origin()) {
    throw std::invalid_argument("compute_reference: X must contain the origin");
  }

  Vec x(d, 0.0), y(l, 0.0);
  ReferencePoint best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < max_iters; ++k) {
    const Vec y_new = dual_update(y, matvec(spec.penalty, x), s, spec.y_set);
    Vec g = full_gradient(spec, x);
    const Vec fty = matvec_transpose(spec.penalty, y_new);
    for (std::int64_t j = 0; j < d; ++j) {
      g[j] = x[j] - beta * (g[j] + fty[j]);
    }
    const Vec x_new = spec.x_set.project(g);

    double resid_sq = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      const double dx = x_new[j] - x[j];
      resid_sq += dx * dx;
    }
    double resid = std::sqrt(resid_sq);
    resid_sq = 0.0;
    for (std::int64_t i = 0; i < l; ++i) {
      const double dy = y_new[i] - y[i];
      resid_sq += dy * dy;
    }
    resid += std::sqrt(resid_sq);

    x = x_new;
    y = y_new;
    if (resid < best.residual) {
      best.x_star = x;
      best.y_star = y;
      best.residual = resid;
    }
    if (resid < tol) {
      return {x, y, resid};
    }
  }
  throw ReferenceError(
      "compute_reference: residual " + std::to_string(best.residual) +
          " did not reach tolerance " + std::to_string(tol) + " within " +
          std::to_string(max_iters) + " iterations",
      best);
}

double duality_gap(const ProblemSpec& spec, const ReferencePoint& ref,
                   const Vec& xbar, const Vec& ybar) {
  if (!spec.x_set.contains(xbar, 1e-9) ||
      !spec.x_set.contains(ref.x_star, 1e-9)) {
    throw std::invalid_argument("duality_gap: infeasible primal point");
  }
  const double gap = saddle_value(spec, ref.y_star, xbar) -
                     saddle_value(spec, ybar, ref.x_star);
  if (gap < -10.0 * ref.residual) {
    throw std::runtime_error(
        "duality_gap: gap " + std::to_string(gap) +
        " below -10x reference residual; reference too coarse");
  }
  return gap;
}

BoundParams derive_bound_params(const ProblemSpec& spec, double s,
                                std::uint64_t seed) {
  spec.validate();
  BoundParams p;
  p.D_x = spec.x_set.diameter(spec.dim());
  p.D_y = spec.dual_dim() > 0 ? spec.y_set.diameter(spec.dual_dim()) : 0.0;
  p.L = loss_lipschitz_bound(spec);
  p.mu = spec.loss.ridge;
  p.lambda_max_FtF = penalty_lambda_max(spec);
  p.s = s;
  // A point estimate of the gradient spread under-covers the uniform
  // variance assumption, so take the max over several feasible points.
  Rng rng(Rng::derive(seed, 0x51e7aULL));
  double sigma = estimate_sigma(spec, Vec(spec.dim(), 0.0));
  for (int i = 0; i < 10; ++i) {
    sigma = std::max(sigma, estimate_sigma(spec, spec.x_set.sample(spec.dim(), rng)));
  }
  p.sigma = sigma;
  return p;
}

double theorem_bound(Regime regime, const BoundParams& params, std::int64_t t,
                     double omega) {
  if (t < 0) throw std::invalid_argument("theorem_bound: t must be >= 0");
  if (!(omega > 0.0)) {
    throw std::invalid_argument("theorem_bound: omega must be positive");
  }
  if (!(params.s > 0.0) || params.D_x < 0.0 || params.D_y < 0.0 ||
      params.sigma < 0.0 || params.L < 0.0 || params.lambda_max_FtF < 0.0) {
    throw std::invalid_argument("theorem_bound: invalid parameters");
  }
  const double dx2 = params.D_x * params.D_x;
  const double dy2 = params.D_y * params.D_y;
  const double sig2 = params.sigma * params.sigma;
  const double lmax = params.lambda_max_FtF;

  if (regime == Regime::kGeneralConvex) {
    const double tp1 = static_cast<double>(t) + 1.0;
    const double rt = std::sqrt(tp1);
    return dy2 / (2.0 * params.s * tp1) + params.L * dx2 / (2.0 * tp1) +
           (dx2 + 2.0 * lmax * dy2) / rt +
           2.0 * std::sqrt(omega) * params.D_x * params.sigma / rt +
           (1.0 + omega) * sig2 / rt;
  }
  if (!(params.mu > 0.0)) {
    throw std::invalid_argument(
        "theorem_bound: strongly convex regimes require mu > 0");
  }
  if (regime == Regime::kStronglyConvexUniform) {
    const double tp1 = static_cast<double>(t) + 1.0;
    const double rt = std::sqrt(tp1);
    const double lg = std::log(tp1);
    return dy2 / (2.0 * params.s * tp1) + params.L * dx2 / (2.0 * tp1) +
           lmax * dy2 * lg / (params.mu * tp1) +
           2.0 * std::sqrt(omega) * params.D_x * params.sigma / rt +
           (1.0 + omega) * sig2 * lg / (2.0 * params.mu * tp1);
  }
  const double tp2 = static_cast<double>(t) + 2.0;
  return dy2 / (params.s * tp2) + params.L * dx2 / tp2 +
         4.0 * lmax * dy2 / (params.mu * tp2) +
         2.0 * std::sqrt(2.0 * omega) * params.D_x * params.sigma /
             std::sqrt(tp2) +
         4.0 * (1.0 + omega) * sig2 / (params.mu * tp2);
}

TailReport tail_experiment(const ProblemSpec& spec, const SolverConfig& cfg,
                           const ReferencePoint& ref, double omega,
                           std::int64_t trials, int jobs) {
  if (trials < 1) {
    throw std::invalid_argument("tail_experiment: need at least one trial");
  }
  if (jobs < 1) jobs = 1;
  const BoundParams params = derive_bound_params(spec, cfg.s, cfg.seed);
  // The run of cfg.iterations update steps averages iterates x^1..x^m,
  // which is the horizon t = m-1 output the bounds quantify.
  const std::int64_t t = cfg.iterations - 1;
  const double bound = theorem_bound(cfg.regime, params, t, omega);
  if (ref.residual > 0.01 * bound) {
    throw std::runtime_error(
        "tail_experiment: reference residual " + std::to_string(ref.residual) +
        " exceeds 1% of the bound " + std::to_string(bound));
  }

  std::vector<double> gaps(static_cast<std::size_t>(trials), 0.0);
  std::atomic<std::int64_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        SolverConfig trial_cfg = cfg;
        trial_cfg.seed = Rng::derive(cfg.seed, 1000 + static_cast<std::uint64_t>(i));
        trial_cfg.checkpoints = {cfg.iterations};
        trial_cfg.record_wall_time = false;
        const RunTrace trace = spdhg_run(spec, trial_cfg);
        if (trace.aborted) {
          throw std::runtime_error("tail_experiment: trial " +
                                   std::to_string(i) + " aborted: " +
                                   trace.abort_reason);
        }
        gaps[static_cast<std::size_t>(i)] =
            duality_gap(spec, ref, trace.x_bar, trace.y_bar);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(trials);
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int count = static_cast<int>(
        std::min<std::int64_t>(jobs, trials));
    pool.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  TailReport report;
  report.omega = omega;
  report.trials = trials;
  report.t = t;
  report.bound_value = bound;
  for (double gap : gaps) {
    if (gap > bound) ++report.exceed_count;
  }
  report.empirical_rate = static_cast<double>(report.exceed_count) /
                          static_cast<double>(trials);
  report.theoretical_cap = 2.0 * std::exp(-omega);
  return report;
}

double fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 5) {
    throw std::invalid_argument("fit_rate: need at least five points");
  }
  double t_min = std::numeric_limits<double>::infinity();
  double t_max = 0.0;
  for (const auto& [t, gap] : points) {
    if (!(t > 0.0)) throw std::invalid_argument("fit_rate: t must be positive");
    if (!(gap > 0.0)) {
      throw std::invalid_argument(
          "fit_rate: non-positive gap (reference too coarse)");
    }
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  if (t_max < 100.0 * t_min) {
    throw std::invalid_argument("fit_rate: t must span at least two decades");
  }
  double sx = 0.0, sy = 0.0;
  for (const auto& [t, gap] : points) {
    sx += std::log(t);
    sy += std::log(gap);
  }
  const double mx = sx / static_cast<double>(points.size());
  const double my = sy / static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [t, gap] : points) {
    const double dx = std::log(t) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(gap) - my);
  }
  return sxy / sxx;
}

std::string tail_report_json(const TailReport& report,
                             const std::string& regime_label) {
  std::string out = "{\n";
  out += "  \"regime\": \"" + regime_label + "\",\n";
  out += "  \"omega\": " + format_double(report.omega) + ",\n";
  out += "  \"trials\": " + std::to_string(report.trials) + ",\n";
  out += "  \"t\": " + std::to_string(report.t) + ",\n";
  out += "  \"bound_value\": " + format_double(report.bound_value) + ",\n";
  out += "  \"exceed_count\": " + std::to_string(report.exceed_count) + ",\n";
  out += "  \"empirical_rate\": " + format_double(report.empirical_rate) + ",\n";
  out += "  \"theoretical_cap\": " + format_double(report.theoretical_cap) + "\n";
  out += "}\n";
  return out;
}

}  // namespace spdhg
