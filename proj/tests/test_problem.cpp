#include "spdhg/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "spdhg/rng.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

namespace spdhg {
namespace {

Dataset tiny_dataset(const std::vector<std::vector<double>>& rows,
                     const std::vector<double>& labels) {
  std::vector<Triplet> entries;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (rows[r][c] != 0.0) {
        entries.push_back({static_cast<std::int64_t>(r),
                           static_cast<std::int64_t>(c), rows[r][c]});
      }
    }
  }
  return {CsrMatrix::from_triplets(static_cast<std::int64_t>(rows.size()),
                                   static_cast<std::int64_t>(rows[0].size()),
                                   entries),
          labels};
}

ProblemSpec make_spec(Dataset data, LossKind loss, double lambda = 1.0,
                      double radius = 10.0) {
  const std::int64_t d = data.dim();
  return ProblemSpec{std::move(data), loss,
                     build_fusion_matrix(synth::chain_edges(d), d),
                     PrimalSet::l2_ball(radius), DualSet::linf_ball(lambda)};
}

TEST(LossValue, LogisticAtZeroIsLn2) {
  const ProblemSpec spec =
      make_spec(synth::make_dataset(7, 3, 2), {Loss::kLogistic, 0.0});
  EXPECT_NEAR(loss_value(spec, Vec(3, 0.0)), std::log(2.0), 1e-15);
}

TEST(LossValue, LeastSquaresExactFit) {
  const ProblemSpec spec =
      make_spec(tiny_dataset({{1.0, 0.0}}, {1.0}), {Loss::kLeastSquares, 0.0});
  EXPECT_EQ(loss_value(spec, {1.0, 0.0}), 0.0);

  // with ridge, the exact fit leaves only the ridge term and its gradient
  const ProblemSpec ridged =
      make_spec(tiny_dataset({{1.0, 0.0}}, {1.0}), {Loss::kLeastSquares, 0.5});
  EXPECT_DOUBLE_EQ(loss_value(ridged, {1.0, 0.0}), 0.25);
  EXPECT_EQ(full_gradient(ridged, {1.0, 0.0}), Vec({0.5, 0.0}));
}

TEST(LossValue, LogisticLargeMarginNoOverflow) {
  const ProblemSpec spec = make_spec(tiny_dataset({{1.0}}, {1.0}),
                                     {Loss::kLogistic, 0.0}, 1.0, 1000.0);
  const double v = loss_value(spec, {100.0});
  // exact value is log1p(exp(-100)); to double precision that is exp(-100)
  EXPECT_GT(v, 0.0);
  EXPECT_NEAR(v, std::exp(-100.0), 1e-12 * std::exp(-100.0));
  // the mirrored margin must not overflow either
  const double w = loss_value(spec, {-1000.0});
  EXPECT_TRUE(std::isfinite(w));
  EXPECT_NEAR(w, 1000.0, 1e-9);
}

TEST(LossValue, RowSubset) {
  const ProblemSpec spec =
      make_spec(synth::make_dataset(6, 3, 4), {Loss::kLogistic, 0.0});
  const Vec x{0.2, -0.1, 0.4};
  const double front = loss_value(spec, x, {{0, 3}});
  const double back = loss_value(spec, x, {{3, 6}});
  EXPECT_NEAR(loss_value(spec, x), 0.5 * (front + back), 1e-12);
  EXPECT_THROW(loss_value(spec, x, {{4, 2}}), std::invalid_argument);
}

TEST(FullGradient, LogisticAtZero) {
  const Dataset ds = synth::make_dataset(5, 3, 11);
  const ProblemSpec spec = make_spec(ds, {Loss::kLogistic, 0.0});
  const Vec g = full_gradient(spec, Vec(3, 0.0));
  // sigmoid(0) = 1/2, so the gradient is the mean of -b_i/2 * a_i
  Vec expect(3, 0.0);
  for (std::int64_t r = 0; r < ds.n(); ++r) {
    for (std::int64_t p = ds.features.row_offsets()[r];
         p < ds.features.row_offsets()[r + 1]; ++p) {
      expect[ds.features.col_indices()[p]] +=
          -ds.labels[r] / 2.0 * ds.features.values()[p];
    }
  }
  for (auto& e : expect) e /= static_cast<double>(ds.n());
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(g[j], expect[j], 1e-15);
}

TEST(FullGradient, FiniteDifferenceOracle) {
  Rng rng(13);
  for (const Loss tag : {Loss::kLogistic, Loss::kLeastSquares}) {
    for (const double ridge : {0.0, 1e-2}) {
      const ProblemSpec spec =
          make_spec(synth::make_dataset(8, 4, 23), {tag, ridge});
      for (int trial = 0; trial < 20; ++trial) {
        Vec x(4);
        for (double& e : x) e = rng.next_gaussian();
        const Vec g = full_gradient(spec, x);
        const Vec fd = oracles::central_difference_gradient(
            [&](const Vec& p) { return loss_value(spec, p); }, x, 1e-6);
        for (int j = 0; j < 4; ++j) {
          EXPECT_NEAR(g[j], fd[j], 1e-5 * std::max(1.0, std::abs(g[j])));
        }
      }
    }
  }
}

TEST(StochasticGradient, SingleRowEqualsFullGradient) {
  const ProblemSpec spec =
      make_spec(tiny_dataset({{0.3, -0.7}}, {-1.0}), {Loss::kLogistic, 1e-2});
  const Vec x{0.5, 0.25};
  Rng rng(1);
  const SampleGradient sg = stochastic_gradient(spec, x, rng);
  EXPECT_EQ(sg.index, 0);
  EXPECT_EQ(sg.gradient, full_gradient(spec, x));  // bitwise
}

TEST(StochasticGradient, LogisticAtZeroSingleSample) {
  const ProblemSpec spec =
      make_spec(tiny_dataset({{2.0, -1.0}}, {1.0}), {Loss::kLogistic, 0.0});
  const Vec g = sample_gradient(spec, Vec(2, 0.0), 0);
  EXPECT_DOUBLE_EQ(g[0], -1.0);  // -b/2 * a
  EXPECT_DOUBLE_EQ(g[1], 0.5);
}

// Exhaustive mean over all sample indices reproduces the full gradient.
TEST(StochasticGradient, UnbiasednessExhaustive) {
  Rng rng(17);
  for (int instance = 0; instance < 10; ++instance) {
    const std::int64_t n = 3 + rng.next_index(48);
    const std::int64_t d = 2 + rng.next_index(19);
    const ProblemSpec spec = make_spec(
        synth::make_dataset(n, d, 500 + instance),
        {instance % 2 == 0 ? Loss::kLogistic : Loss::kLeastSquares,
         instance % 3 == 0 ? 0.0 : 1e-2});
    Vec x(d);
    for (double& e : x) e = rng.next_gaussian();

    Vec mean(d, 0.0);
    for (std::int64_t r = 0; r < n; ++r) {
      axpy(1.0, sample_gradient(spec, x, r), mean);
    }
    for (double& e : mean) e /= static_cast<double>(n);
    const Vec g = full_gradient(spec, x);
    for (std::int64_t j = 0; j < d; ++j) {
      EXPECT_NEAR(mean[j], g[j], 1e-12);
    }
  }
}

TEST(RegularizerValue, ClosedForms) {
  EXPECT_EQ(regularizer_value(DualSet::linf_ball(1.0), {2.0, -3.0}), 5.0);
  EXPECT_EQ(regularizer_value(DualSet::linf_ball(0.7), Vec(4, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(regularizer_value(DualSet::l2_ball(2.0), {3.0, 4.0}), 10.0);
}

// max over a grid of Y never beats the closed-form support value, and the
// analytic maximizer attains it.
TEST(RegularizerValue, GridSearchOracle) {
  Rng rng(19);
  const DualSet y_set = DualSet::linf_ball(0.5);
  const Vec z{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
  const double support = regularizer_value(y_set, z);

  double grid_best = -1e300;
  for (double a = -0.5; a <= 0.5 + 1e-12; a += 0.01) {
    for (double b = -0.5; b <= 0.5 + 1e-12; b += 0.01) {
      for (double c = -0.5; c <= 0.5 + 1e-12; c += 0.01) {
        grid_best = std::max(grid_best, a * z[0] + b * z[1] + c * z[2]);
      }
    }
  }
  EXPECT_NEAR(grid_best, support, 1e-9);
  EXPECT_LE(grid_best, support + 1e-12);

  Vec maximizer(3);
  for (int j = 0; j < 3; ++j) maximizer[j] = 0.5 * (z[j] >= 0 ? 1.0 : -1.0);
  EXPECT_NEAR(dot(maximizer, z), support, 1e-12);
}

TEST(SaddleValue, FixedCasesAndFeasibility) {
  const ProblemSpec spec =
      make_spec(synth::make_dataset(6, 3, 29), {Loss::kLogistic, 0.0}, 1.0);
  const Vec x0(3, 0.0);
  EXPECT_NEAR(saddle_value(spec, Vec(2, 0.5), x0), std::log(2.0), 1e-15);

  Vec x{0.1, -0.2, 0.3};
  EXPECT_DOUBLE_EQ(saddle_value(spec, Vec(2, 0.0), x), loss_value(spec, x));
  EXPECT_THROW(saddle_value(spec, Vec(2, 1.5), x), std::invalid_argument);
}

TEST(SaddleValue, DenseRecomputationOracle) {
  Rng rng(37);
  const ProblemSpec spec =
      make_spec(synth::make_dataset(5, 4, 41), {Loss::kLogistic, 1e-2}, 0.8);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x(4), y(3);
    for (double& e : x) e = 0.5 * rng.next_gaussian();
    for (double& e : y) e = 0.8 * (2.0 * rng.next_double() - 1.0);

    // dense recomputation of l(x) + y^T F x from scratch
    double expect = 0.01 * 0.5 * dot(x, x);
    for (std::int64_t r = 0; r < spec.data.n(); ++r) {
      double margin = 0.0;
      for (std::int64_t p = spec.data.features.row_offsets()[r];
           p < spec.data.features.row_offsets()[r + 1]; ++p) {
        margin +=
            spec.data.features.values()[p] * x[spec.data.features.col_indices()[p]];
      }
      expect += std::log(1.0 + std::exp(-spec.data.labels[r] * margin)) /
                static_cast<double>(spec.data.n());
    }
    for (int e = 0; e < 3; ++e) expect += y[e] * (x[e] - x[e + 1]);

    EXPECT_NEAR(saddle_value(spec, y, x), expect, 1e-12);
  }
}

TEST(BuildFusionMatrix, Cases) {
  const CsrMatrix one = build_fusion_matrix({{0, 1}}, 3);
  EXPECT_EQ(matvec(one, {1.0, 2.0, 5.0}), Vec({-1.0}));
  EXPECT_EQ(one.rows(), 1);

  const CsrMatrix empty = build_fusion_matrix({}, 4);
  EXPECT_EQ(empty.rows(), 0);
  EXPECT_EQ(empty.cols(), 4);
  EXPECT_TRUE(matvec(empty, Vec(4, 1.0)).empty());

  const CsrMatrix chain = build_fusion_matrix(synth::chain_edges(4), 4);
  EXPECT_EQ(chain.rows(), 3);
  const Vec ones = matvec(chain, Vec(4, 1.0));
  for (double v : ones) EXPECT_EQ(v, 0.0);  // each row sums to zero

  EXPECT_THROW(build_fusion_matrix({{1, 1}}, 3), std::invalid_argument);
  EXPECT_THROW(build_fusion_matrix({{0, 5}}, 3), std::invalid_argument);
  EXPECT_THROW(build_fusion_matrix({{0, 1}, {0, 1}}, 3), std::invalid_argument);
}

TEST(CorrelationGraph, DuplicatedAndAnticorrelatedColumns) {
  // columns: x, x, -x, noise
  Rng rng(43);
  std::vector<Triplet> entries;
  const std::int64_t n = 40;
  for (std::int64_t r = 0; r < n; ++r) {
    const double v = rng.next_gaussian();
    entries.push_back({r, 0, v});
    entries.push_back({r, 1, v});
    entries.push_back({r, 2, -v});
    entries.push_back({r, 3, rng.next_gaussian()});
  }
  std::vector<double> labels(n);
  for (std::int64_t r = 0; r < n; ++r) labels[r] = r % 2 == 0 ? 1.0 : -1.0;
  const Dataset ds{CsrMatrix::from_triplets(n, 4, entries), labels};

  const auto edges = build_graph_by_correlation(ds, 0.999, 100);
  ASSERT_GE(edges.size(), 3u);
  EXPECT_EQ(edges[0].i, 0);  // ties on |corr| = 1 break by index
  EXPECT_EQ(edges[0].j, 1);
  bool has_anti = false;
  for (const auto& e : edges) {
    if (e.i == 0 && e.j == 2) {
      has_anti = true;
      EXPECT_LT(e.correlation, 0.0);
    }
  }
  EXPECT_TRUE(has_anti);

  // cap respected
  EXPECT_EQ(build_graph_by_correlation(ds, 0.999, 1).size(), 1u);
}

TEST(CorrelationGraph, IndependentColumnsAndOracle) {
  const Dataset ds = synth::make_dataset(60, 5, 47);
  EXPECT_TRUE(build_graph_by_correlation(ds, 0.9, 100).empty());

  // direct dense recomputation of every pairwise correlation
  const auto edges = build_graph_by_correlation(ds, 0.05, 1000);
  std::vector<std::vector<double>> cols(5, std::vector<double>(ds.n(), 0.0));
  for (std::int64_t r = 0; r < ds.n(); ++r) {
    for (std::int64_t p = ds.features.row_offsets()[r];
         p < ds.features.row_offsets()[r + 1]; ++p) {
      cols[ds.features.col_indices()[p]][r] = ds.features.values()[p];
    }
  }
  auto corr = [&](int i, int j) {
    const double n = static_cast<double>(ds.n());
    double mi = 0, mj = 0, sij = 0, sii = 0, sjj = 0;
    for (std::int64_t r = 0; r < ds.n(); ++r) {
      mi += cols[i][r];
      mj += cols[j][r];
    }
    mi /= n;
    mj /= n;
    for (std::int64_t r = 0; r < ds.n(); ++r) {
      sij += (cols[i][r] - mi) * (cols[j][r] - mj);
      sii += (cols[i][r] - mi) * (cols[i][r] - mi);
      sjj += (cols[j][r] - mj) * (cols[j][r] - mj);
    }
    return sij / std::sqrt(sii * sjj);
  };
  for (const auto& e : edges) {
    EXPECT_NEAR(e.correlation, corr(e.i, e.j), 1e-9);
    EXPECT_GE(std::abs(e.correlation), 0.05);
  }
  // descending |correlation|
  for (std::size_t k = 1; k < edges.size(); ++k) {
    EXPECT_GE(std::abs(edges[k - 1].correlation),
              std::abs(edges[k].correlation));
  }

  EXPECT_THROW(build_graph_by_correlation(ds, 0.0, 10), std::invalid_argument);
  EXPECT_THROW(build_graph_by_correlation(ds, 1.0, 10), std::invalid_argument);
}

TEST(EstimateSigma, Cases) {
  const ProblemSpec single =
      make_spec(tiny_dataset({{1.0, 2.0}}, {1.0}), {Loss::kLogistic, 0.0});
  EXPECT_EQ(estimate_sigma(single, {0.1, 0.2}), 0.0);

  const ProblemSpec dup = make_spec(
      tiny_dataset({{1.0, 2.0}, {1.0, 2.0}}, {1.0, 1.0}), {Loss::kLogistic, 0.0});
  EXPECT_NEAR(estimate_sigma(dup, {0.1, 0.2}), 0.0, 1e-14);

  // two-sample hand enumeration: gradients at x = 0 are -b_i/2 a_i
  const ProblemSpec two = make_spec(
      tiny_dataset({{2.0, 0.0}, {0.0, 4.0}}, {1.0, -1.0}), {Loss::kLogistic, 0.0});
  // g1 = (-1, 0), g2 = (0, 2); mean = (-0.5, 1); deviations (±0.5, ∓1)
  const double expect = std::sqrt((0.25 + 1.0 + 0.25 + 1.0) / 2.0);
  EXPECT_NEAR(estimate_sigma(two, Vec(2, 0.0)), expect, 1e-14);
}

// Assumption-style properties of the smooth term.
TEST(LossProperties, StrongConvexityAndSmoothness) {
  Rng rng(53);
  for (const Loss tag : {Loss::kLogistic, Loss::kLeastSquares}) {
    const double ridge = 0.05;
    const ProblemSpec spec =
        make_spec(synth::make_dataset(10, 4, 59), {tag, ridge});
    const double lip = loss_lipschitz_bound(spec);
    for (int trial = 0; trial < 30; ++trial) {
      Vec x1(4), x2(4);
      for (double& e : x1) e = rng.next_gaussian();
      for (double& e : x2) e = rng.next_gaussian();

      // l(x2) >= l(x1) + <g1, x2-x1> + ridge/2 ||x2-x1||^2
      Vec diff(4);
      for (int j = 0; j < 4; ++j) diff[j] = x2[j] - x1[j];
      const double lower = loss_value(spec, x1) +
                           dot(full_gradient(spec, x1), diff) +
                           0.5 * ridge * norm2_sq(diff);
      EXPECT_GE(loss_value(spec, x2), lower - 1e-9);

      // ||g1 - g2|| <= (L + ridge-included bound) ||x1 - x2||
      const Vec g1 = full_gradient(spec, x1);
      const Vec g2 = full_gradient(spec, x2);
      Vec gd(4);
      for (int j = 0; j < 4; ++j) gd[j] = g1[j] - g2[j];
      EXPECT_LE(norm2(gd), lip * norm2(diff) + 1e-9);
    }
  }
}

}  // namespace
}  // namespace spdhg
