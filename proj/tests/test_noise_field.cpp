#include <cmath>
#include <complex>
#include <sstream>

#include <gtest/gtest.h>

#include "levy_ou/errors.hpp"
#include "levy_ou/noise_field.hpp"
#include "levy_ou/stats.hpp"
#include "levy_ou/tree_expansion.hpp"

using namespace levy_ou;
using cd = std::complex<double>;

namespace {

const LevyTriplet kGauss = LevyTriplet::scalar(0.0, 1.0);

LevyTriplet jump_triplet() { return LevyTriplet::scalar(0.3, 0.5, 1.0, {{0.5, 1.0}, {0.5, -2.0}}); }

}  // namespace

TEST(NoisePath, DriftOnlyIncrements) {
  const NoisePath path = generate_path(LevyTriplet::scalar(1.0, 0.0), TimeGrid::with_step(0.25, 1.0), 3);
  ASSERT_EQ(path.increments.cols(), 4);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(path.increments(0, k), 0.25);
}

TEST(NoisePath, Deterministic) {
  const TimeGrid grid = TimeGrid::lattice(100, 1.0);
  const NoisePath a = generate_path(jump_triplet(), grid, 7);
  const NoisePath b = generate_path(jump_triplet(), grid, 7);
  const NoisePath c = generate_path(jump_triplet(), grid, 8);
  EXPECT_EQ(a.increments, b.increments);
  EXPECT_NE(a.increments, c.increments);
}

TEST(NoisePath, IncrementVarianceAtLattice100) {
  const TimeGrid grid = TimeGrid::lattice(100, 1.0);
  const std::size_t n_paths = 100000;
  std::vector<double> first(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) first[i] = generate_path(kGauss, grid, sub_seed(1000, i)).increments(0, 0);
  const SampleMoments m = moments(first);
  EXPECT_NEAR(m.variance, 0.01, 3.0 * m.variance_stderr());
}

TEST(NoisePath, CsvRoundTrip) {
  const NoisePath path = generate_path(jump_triplet(), TimeGrid::lattice(20, 1.0), 5);
  std::stringstream ss;
  write_csv(ss, path);
  const NoisePath back = read_noise_csv(ss, jump_triplet(), 5);
  EXPECT_EQ(back.increments, path.increments);
  EXPECT_EQ(back.grid.intervals(), path.grid.intervals());
}

TEST(Pair, ZeroAndTelescoping) {
  const TimeGrid grid = TimeGrid::with_step(0.25, 1.0);
  const NoisePath gauss = generate_path(kGauss, grid, 1);
  EXPECT_EQ(pair(gauss, TestFunction::sample(grid, [](double) { return 0.0; }))(0), 0.0);

  const NoisePath drift = generate_path(LevyTriplet::scalar(1.0, 0.0), grid, 1);
  EXPECT_EQ(pair(drift, TestFunction::sample(grid, [](double) { return 1.0; }))(0), 1.0);
}

TEST(Pair, RefinedTestFunctionGridAccepted) {
  const TimeGrid grid = TimeGrid::lattice(10, 1.0);
  const NoisePath path = generate_path(kGauss, grid, 2);
  const auto coarse = TestFunction::sample(grid, [](double t) { return std::cos(t); });
  const auto fine = TestFunction::sample(TimeGrid::uniform(1.0, 40), [](double t) { return std::cos(t); });
  EXPECT_NEAR(pair(path, coarse)(0), pair(path, fine)(0), 1e-14);
  const auto mismatched = TestFunction::sample(TimeGrid::uniform(1.0, 15), [](double t) { return t; });
  EXPECT_THROW(pair(path, mismatched), InvalidInput);
}

TEST(Pair, OuKernelMatchesNoiseTreeBitwise) {
  const double m = 1.0;
  const TimeGrid grid = TimeGrid::with_step(1e-3, 1.0);
  const NoisePath path = generate_path(kGauss, grid, 17);
  const double dt = grid.dt();
  const auto kernel = TestFunction::sample(grid, [&](double u) {
    return u <= 1.0 ? std::exp(-m * (1.0 - u - 0.5 * dt)) : 0.0;
  });
  const double tree = evaluate_tree(parse_tree("x-o", 2), OUParams::scalar(m, 0.0), 0.1, path, 1.0);
  EXPECT_EQ(pair(path, kernel)(0), tree);
}

TEST(EmpiricalCf, TrivialCases) {
  const TimeGrid grid = TimeGrid::lattice(10, 1.0);
  EXPECT_EQ(empirical_cf(jump_triplet(), grid, TestFunction::sample(grid, [](double) { return 0.0; }), 50, 1),
            cd(1.0));
  const cd drift = empirical_cf(LevyTriplet::scalar(1.0, 0.0), TimeGrid::with_step(0.25, 1.0),
                                TestFunction::sample(TimeGrid::with_step(0.25, 1.0), [](double) { return 1.0; }),
                                64, 1);
  EXPECT_EQ(drift, std::exp(cd(0.0, 1.0)));
}

TEST(EmpiricalCf, MatchesQuadrature) {
  const TimeGrid grid = TimeGrid::lattice(200, 10.0);
  const auto f = TestFunction::sample(grid, [](double t) { return std::exp(-t); });
  const std::size_t n_paths = 100000;
  const cd emp = empirical_cf(kGauss, grid, f, n_paths, 123);
  EXPECT_LT(std::abs(emp - char_functional(kGauss, f)), 5.0 / std::sqrt(static_cast<double>(n_paths)));
}

TEST(EmpiricalCf, IndependentOfThreadCount) {
  const TimeGrid grid = TimeGrid::lattice(50, 1.0);
  const auto f = TestFunction::sample(grid, [](double t) { return 1.0 - t; });
  const cd one = empirical_cf(jump_triplet(), grid, f, 997, 4, 1);
  EXPECT_EQ(one, empirical_cf(jump_triplet(), grid, f, 997, 4, 3));
  EXPECT_EQ(one, empirical_cf(jump_triplet(), grid, f, 997, 4, 8));
}

TEST(Riemann, ZeroFunction) {
  const auto f = TestFunction::sample(TimeGrid::uniform(1.0, 100), [](double) { return 0.0; });
  EXPECT_EQ(log_cf_riemann(jump_triplet(), f, 10), cd(0.0));
}

TEST(Riemann, ConvergesAtFirstOrder) {
  const auto f = TestFunction::sample(TimeGrid::uniform(10.0, 100000), [](double t) { return std::exp(-t); });
  const double limit = -(1.0 - std::exp(-20.0)) / 4.0;
  std::vector<double> ns;
  std::vector<double> gaps;
  for (int n = 10; n <= 10240; n *= 2) {
    ns.push_back(n);
    gaps.push_back(std::abs(log_cf_riemann(kGauss, f, n) - limit));
  }
  const double slope = -loglog_slope(ns, gaps);
  EXPECT_GE(slope, 0.8);
  EXPECT_LE(slope, 2.2);
}

TEST(Riemann, ConstantFunction) {
  const auto f = TestFunction::sample(TimeGrid::uniform(1.0, 10), [](double) { return 1.5; });
  const cd want = psi(jump_triplet(), Eigen::VectorXd::Constant(1, 1.5));
  for (int n : {1, 3, 7, 100}) EXPECT_NEAR(std::abs(log_cf_riemann(jump_triplet(), f, n) - want), 0.0, 1e-13);
}

TEST(Fluctuation, Examples) {
  EXPECT_DOUBLE_EQ(increment_fluctuation(kGauss, 10), 0.1);
  const LevyTriplet jumps = LevyTriplet::scalar(0.0, 0.0, 2.0, {{1.0, 1.0}});
  EXPECT_DOUBLE_EQ(increment_fluctuation(jumps, 4), 0.5);
  for (int n = 1; n <= 512; n *= 2) {
    EXPECT_EQ(increment_fluctuation(jump_triplet(), 2 * n), increment_fluctuation(jump_triplet(), n) / 2.0);
  }
}

TEST(Fluctuation, JumpVarianceByMonteCarlo) {
  const LevyTriplet jumps = LevyTriplet::scalar(0.0, 0.0, 2.0, {{1.0, 1.0}});
  const TimeGrid grid = TimeGrid::lattice(4, 0.25);
  const std::size_t n_paths = 100000;
  std::vector<double> xs(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) xs[i] = generate_path(jumps, grid, sub_seed(50, i)).increments(0, 0);
  const SampleMoments m = moments(xs);
  EXPECT_NEAR(m.variance, 0.5, 3.0 * m.variance_stderr());
}

TEST(Fluctuation, UnitSumVarianceIndependentOfScale) {
  const std::size_t n_paths = 20000;
  const double v = jump_triplet().unit_covariance()(0, 0);
  for (int n : {4, 64}) {
    const TimeGrid grid = TimeGrid::lattice(n, 1.0);
    std::vector<double> sums(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) sums[i] = generate_path(jump_triplet(), grid, sub_seed(7000, i)).increments.sum();
    const SampleMoments m = moments(sums);
    EXPECT_NEAR(m.variance, v, 3.0 * m.variance_stderr()) << "n = " << n;
  }
}

TEST(Kernel, Examples) {
  const double m = 1.3;
  const double t = 2.0;
  for (int n : {4, 16, 100}) {
    EXPECT_DOUBLE_EQ(mollified_kernel_at(m, t, n, t - 2.0 / n), std::exp(-2.0 * m / n));
    EXPECT_EQ(mollified_kernel_at(m, t, n, t + 0.01), 0.0);
  }
  EXPECT_NEAR(mollified_kernel_at(m, t, 100000, 1.0), sharp_kernel_at(m, t, 1.0), 1e-12);
}

TEST(Kernel, BoundedAndMonotoneInN) {
  const double m = 1.0;
  const double t = 1.0;
  for (double u = -0.5; u < 1.0; u += 0.0137) {
    double previous = 0.0;
    for (int n = 1; n <= 1024; n *= 2) {
      const double k = mollified_kernel_at(m, t, n, u);
      EXPECT_GE(k, 0.0);
      EXPECT_LE(k, sharp_kernel_at(m, t, u));
      EXPECT_GE(k, previous) << "u = " << u << ", n = " << n;
      previous = k;
    }
  }
}

TEST(L2Gap, Examples) {
  EXPECT_THROW(l2_cauchy_gap(kGauss, 1.0, 1.0, 8, 8), InvalidInput);
  EXPECT_EQ(l2_cauchy_gap(LevyTriplet::zero(1), 1.0, 1.0, 8, 16), 0.0);
  const double coarse = l2_cauchy_gap(kGauss, 1.0, 1.0, 8, 16);
  const double fine = l2_cauchy_gap(kGauss, 1.0, 1.0, 64, 128);
  EXPECT_GT(coarse, fine);
  EXPECT_LE(fine, coarse / 4.0);
}

TEST(L2Gap, MonotoneInN) {
  double previous = l2_cauchy_gap(kGauss, 1.0, 1.0, 2, 4);
  for (int n = 4; n <= 512; n *= 2) {
    const double gap = l2_cauchy_gap(kGauss, 1.0, 1.0, n, 2 * n);
    EXPECT_LE(gap, previous);
    previous = gap;
  }
}

TEST(L2Gap, MatchesMonteCarloSecondMoment) {
  // drift makes the mean term visible
  const LevyTriplet t = LevyTriplet::scalar(0.5, 1.0);
  const int n = 8;
  const auto k1 = mollified_kernel(1.0, 1.0, n);
  const auto k2 = mollified_kernel(1.0, 1.0, 2 * n);
  ASSERT_EQ(k1.grid(), k2.grid());
  const TestFunction g(k1.grid(), k1.values() - k2.values());
  const std::size_t n_paths = 20000;
  std::vector<double> sq(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const double x = pair(generate_path(t, g.grid(), 300 + i), g)(0);
    sq[i] = x * x;
  }
  const SampleMoments mo = moments(sq);
  const double gap = l2_cauchy_gap(t, 1.0, 1.0, n, 2 * n);
  EXPECT_NEAR(mo.mean, gap, 4.0 * mo.mean_stderr() + 1e-3 * gap);
}
