#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "levy_ou/errors.hpp"
#include "levy_ou/levy_core.hpp"
#include "levy_ou/time_grid.hpp"

using namespace levy_ou;
using cd = std::complex<double>;

namespace {

LevyTriplet jump_triplet() { return LevyTriplet::scalar(0.3, 0.5, 1.0, {{0.5, 1.0}, {0.5, -2.0}}); }

LevyTriplet planar_triplet() {
  LevyTriplet t = LevyTriplet::zero(2);
  t.drift << 0.2, -0.1;
  t.diffusion << 1.0, 0.3, 0.3, 0.5;
  t.jump_rate = 0.7;
  t.jumps = {{0.25, Eigen::Vector2d(1.0, 0.0)}, {0.75, Eigen::Vector2d(-0.5, 2.0)}};
  return t;
}

// psi written out term by term for scalar triplets
cd scalar_psi(double a, double sigma2, double z, const std::vector<std::pair<double, double>>& jumps,
              double k) {
  cd jump_part = 0.0;
  for (auto [w, s] : jumps) jump_part += w * (std::exp(cd(0.0, s * k)) - 1.0);
  return cd(0.0, a * k) - 0.5 * sigma2 * k * k + z * jump_part;
}

std::string validation_message(const LevyTriplet& t) {
  try {
    validate(t);
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Triplet, ValidExamples) {
  EXPECT_NO_THROW(validate(LevyTriplet::scalar(0.0, 1.0)));
  EXPECT_NO_THROW(validate(LevyTriplet::scalar(0.0, 0.0, 2.0, {{0.5, 1.0}, {0.5, -1.0}})));
  EXPECT_NO_THROW(validate(planar_triplet()));
}

TEST(Triplet, RejectsBadInput) {
  EXPECT_NE(validation_message(LevyTriplet::scalar(0.0, -1.0)).find("negative eigenvalue"), std::string::npos);
  EXPECT_NE(validation_message(LevyTriplet::scalar(0.0, 1.0, -1.0, {{1.0, 1.0}})).find("negative jump rate"),
            std::string::npos);
  EXPECT_NE(validation_message(LevyTriplet::scalar(0.0, 1.0, 1.0, {{0.4, 1.0}, {0.4, 2.0}})).find("normalized"),
            std::string::npos);
  EXPECT_NE(validation_message(LevyTriplet::scalar(0.0, 1.0, 1.0, {{1.0, 0.0}})).find("zero jump"),
            std::string::npos);
  EXPECT_NE(validation_message(LevyTriplet::scalar(0.0, 1.0, 1.0, {})).find("empty jump list"),
            std::string::npos);

  LevyTriplet asym = planar_triplet();
  asym.diffusion(0, 1) = 0.4;
  EXPECT_NE(validation_message(asym).find("asymmetric"), std::string::npos);
}

TEST(Triplet, JsonRoundTrip) {
  const LevyTriplet t = planar_triplet();
  const nlohmann::json j = t;
  const LevyTriplet back = nlohmann::json::parse(j.dump()).get<LevyTriplet>();
  EXPECT_EQ(back.dim, 2);
  EXPECT_EQ(back.drift, t.drift);
  EXPECT_EQ(back.diffusion, t.diffusion);
  EXPECT_EQ(back.jump_rate, t.jump_rate);
  ASSERT_EQ(back.jumps.size(), 2u);
  EXPECT_EQ(back.jumps[1].vector, t.jumps[1].vector);

  EXPECT_THROW((void)nlohmann::json::parse(R"({"drift": [0]})").get<LevyTriplet>(), InvalidInput);
  EXPECT_THROW((void)nlohmann::json::parse(R"({"dim": 1, "drift": "fast"})").get<LevyTriplet>(), InvalidInput);
  EXPECT_THROW((void)nlohmann::json::parse(R"({"dim": 1, "jumps": [{"weight": 1}]})").get<LevyTriplet>(),
               InvalidInput);

  // omitted fields default to zero
  const LevyTriplet sparse = nlohmann::json::parse(R"({"dim": 2})").get<LevyTriplet>();
  EXPECT_NO_THROW(validate(sparse));
  EXPECT_EQ(sparse.diffusion, Eigen::MatrixXd::Zero(2, 2));
}

TEST(Psi, Examples) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  EXPECT_EQ(psi(LevyTriplet::scalar(0.0, 1.0), zero), cd(0.0));
  EXPECT_EQ(psi(jump_triplet(), zero), cd(0.0));
  EXPECT_EQ(psi(planar_triplet(), Eigen::VectorXd::Zero(2)), cd(0.0));

  for (double k : {-2.0, 0.5, 3.0}) {
    const cd v = psi(LevyTriplet::scalar(1.0, 0.0), Eigen::VectorXd::Constant(1, k));
    EXPECT_EQ(v, cd(0.0, k));
  }

  const cd jump = psi(LevyTriplet::scalar(0.0, 0.0, 2.0, {{1.0, 1.0}}),
                      Eigen::VectorXd::Constant(1, std::numbers::pi));
  EXPECT_NEAR(jump.real(), -4.0, 1e-14);
  EXPECT_NEAR(jump.imag(), 0.0, 1e-14);
}

TEST(Psi, MatchesTermByTermFormula) {
  for (double k = -6.0; k <= 6.0; k += 0.75) {
    const cd got = psi(jump_triplet(), Eigen::VectorXd::Constant(1, k));
    const cd want = scalar_psi(0.3, 0.5, 1.0, {{0.5, 1.0}, {0.5, -2.0}}, k);
    EXPECT_NEAR(std::abs(got - want), 0.0, 1e-13) << "k = " << k;
  }
}

TEST(Psi, HermitianSymmetry) {
  for (const auto& t : {jump_triplet(), LevyTriplet::scalar(-1.0, 2.0)}) {
    for (double k = -5.0; k <= 5.0; k += 0.5) {
      const cd plus = psi(t, Eigen::VectorXd::Constant(1, k));
      const cd minus = psi(t, Eigen::VectorXd::Constant(1, -k));
      EXPECT_NEAR(std::abs(minus - std::conj(plus)), 0.0, 1e-13);
    }
  }
  const LevyTriplet p = planar_triplet();
  const Eigen::Vector2d k(0.7, -1.9);
  EXPECT_NEAR(std::abs(psi(p, -k) - std::conj(psi(p, k))), 0.0, 1e-13);
}

TEST(Psi, CenteredGaussianIsRealNonpositive) {
  LevyTriplet t = LevyTriplet::zero(2);
  t.diffusion << 2.0, -0.5, -0.5, 1.0;
  for (double a = -3.0; a <= 3.0; a += 0.5) {
    for (double b = -3.0; b <= 3.0; b += 0.5) {
      const cd v = psi(t, Eigen::Vector2d(a, b));
      EXPECT_EQ(v.imag(), 0.0);
      EXPECT_LE(v.real(), 0.0);
    }
  }
}

TEST(Psi, DimensionMismatchThrows) {
  EXPECT_THROW(psi(planar_triplet(), Eigen::VectorXd::Zero(1)), InvalidInput);
}

TEST(Sampler, GaussianMeanNearZero) {
  Rng rng(5);
  IncrementSampler sampler(LevyTriplet::scalar(0.0, 1.0), 1.0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sampler.sample_scalar(rng);
  EXPECT_NEAR(sum / n, 0.0, 3.0 * std::pow(10.0, -2.5));
}

TEST(Sampler, DriftOnlyIsDeterministic) {
  Rng rng(1);
  IncrementSampler sampler(LevyTriplet::scalar(3.0, 0.0), 0.5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sampler.sample_scalar(rng), 1.5);
}

TEST(Sampler, JumpCountIsPoisson) {
  // unit jumps, so each draw is the number of jumps in the step
  Rng rng(9);
  IncrementSampler sampler(LevyTriplet::scalar(0.0, 0.0, 2.0, {{1.0, 1.0}}), 1.0);
  const int n = 100000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sampler.sample_scalar(rng);
    EXPECT_EQ(x, std::round(x));
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 2.0, 3.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sum2 / n - mean * mean, 2.0, 0.05);
}

TEST(Sampler, EmpiricalCharacteristicFunction) {
  const double dt = 0.3;
  const int n = 100000;
  for (const auto& t : {jump_triplet(), planar_triplet()}) {
    Rng rng(21);
    IncrementSampler sampler(t, dt);
    std::vector<Eigen::VectorXd> draws;
    draws.reserve(n);
    for (int i = 0; i < n; ++i) draws.push_back(sampler.sample(rng));
    double worst = 0.0;
    for (double a = -4.0; a <= 4.0; a += 1.0) {
      Eigen::VectorXd k = Eigen::VectorXd::Constant(t.dim, a);
      if (t.dim == 2) k(1) = -0.5 * a;
      cd emp = 0.0;
      for (const auto& x : draws) emp += std::exp(cd(0.0, k.dot(x)));
      emp /= static_cast<double>(n);
      worst = std::max(worst, std::abs(emp - std::exp(psi(t, k) * dt)));
    }
    EXPECT_LT(worst, 5.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST(Sampler, SameSeedSameDraws) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(sample_increment(planar_triplet(), 0.1, a), sample_increment(planar_triplet(), 0.1, b));
  }
}

TEST(CharFunctional, ZeroFunctionGivesOne) {
  const TimeGrid grid = TimeGrid::uniform(1.0, 64);
  const auto f = TestFunction::sample(grid, [](double) { return 0.0; });
  EXPECT_EQ(char_functional(jump_triplet(), f), cd(1.0));
}

TEST(CharFunctional, GaussianPlateau) {
  const TimeGrid grid = TimeGrid::uniform(1.0, 1000);
  const auto f = TestFunction::sample(grid, [](double) { return 1.0; });
  EXPECT_NEAR(std::abs(char_functional(LevyTriplet::scalar(0.0, 1.0), f) - std::exp(-0.5)), 0.0, 1e-14);
}

TEST(CharFunctional, ExponentialDecay) {
  const TimeGrid grid = TimeGrid::uniform(10.0, 10000);
  const auto f = TestFunction::sample(grid, [](double t) { return std::exp(-t); });
  const double exact = std::exp(-(1.0 - std::exp(-20.0)) / 4.0);
  EXPECT_NEAR(std::abs(char_functional(LevyTriplet::scalar(0.0, 1.0), f) - exact), 0.0, 1e-6);
}

TEST(CharFunctional, MultiplicativeIdentityAtZero) {
  const TimeGrid grid = TimeGrid::uniform(2.0, 200);
  const auto zero = TestFunction::sample(grid, [](double) { return 0.0; });
  for (double c : {0.5, 1.0, 3.0}) {
    const auto f = TestFunction::sample(grid, [c](double t) { return t < 1.0 ? c : 0.0; });
    const cd cf = char_functional(jump_triplet(), f);
    EXPECT_EQ(cf * char_functional(jump_triplet(), zero), cf);
  }
}

TEST(TestFunctionInterp, LinearBetweenNodesZeroOutside) {
  const TimeGrid grid = TimeGrid::uniform(1.0, 4);
  const auto f = TestFunction::sample(grid, [](double t) { return 2.0 * t; });
  EXPECT_DOUBLE_EQ(f.at(0.375)(0), 0.75);
  EXPECT_EQ(f.at(-0.1)(0), 0.0);
  EXPECT_EQ(f.at(1.5)(0), 0.0);
}

TEST(Grid, Construction) {
  const TimeGrid g = TimeGrid::lattice(100, 1.0);
  EXPECT_EQ(g.intervals(), 100u);
  EXPECT_DOUBLE_EQ(g.dt(), 0.01);
  EXPECT_EQ(g.index_of(0.5), std::optional<std::size_t>(50));
  EXPECT_FALSE(g.index_of(0.505).has_value());
  EXPECT_THROW(TimeGrid::with_step(0.3, 1.0), InvalidInput);
  EXPECT_EQ(TimeGrid::with_step(0.25, 1.0).intervals(), 4u);
}
