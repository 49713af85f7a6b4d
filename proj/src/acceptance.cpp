#include "levy_ou/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "levy_ou/levy_core.hpp"
#include "levy_ou/noise_field.hpp"
#include "levy_ou/ou_process.hpp"
#include "levy_ou/stats.hpp"
#include "levy_ou/tree_expansion.hpp"

namespace levy_ou {

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

Outcome mehler_ks(int threads) {
  const OUParams params = OUParams::scalar(1.0, 2.0);
  const LevyTriplet gauss = LevyTriplet::scalar(0.0, 1.0);
  const Eigen::MatrixXd D = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const double t = 1.0;
  const Eigen::MatrixXd xs =
      terminal_states_exact_gaussian(params, gauss, TimeGrid::uniform(t, 1), 100000, 11, threads);
  const GaussianLaw law = mehler_law(params, D, t);
  const double ks = ks_distance(std::vector<double>(xs.data(), xs.data() + xs.size()), [&](double x) {
    return normal_cdf(x, law.mean(0), law.covariance(0, 0));
  });
  return {ks < 0.01, "KS = " + num(ks) + " (< 0.01)"};
}

Outcome jump_cf(int threads) {
  const LevyTriplet triplet = LevyTriplet::scalar(0.0, 0.5, 1.0, {{0.5, 1.0}, {0.5, -2.0}});
  const OUParams params = OUParams::scalar(1.0, 0.0);
  const double t = 1.0;
  const std::size_t n_paths = 100000;
  const Eigen::MatrixXd xs = terminal_states_from_noise(params, triplet, TimeGrid::with_step(1e-3, t),
                                                        n_paths, 22, threads);
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double p = -5.0 + 0.5 * i;
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index j = 0; j < xs.cols(); ++j) {
      re += std::cos(p * xs(0, j));
      im += std::sin(p * xs(0, j));
    }
    const std::complex<double> empirical(re / n_paths, im / n_paths);
    const auto analytic = char_function_xt(params, triplet, t, Eigen::VectorXd::Constant(1, p), 10000);
    worst = std::max(worst, std::abs(empirical - analytic));
  }
  const double tol = 5.0 / std::sqrt(static_cast<double>(n_paths));
  return {worst < tol, "max |CF_emp - CF_quad| = " + num(worst) + " (< " + num(tol) + ")"};
}

Outcome brownian_limit() {
  const Eigen::MatrixXd D = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const OUParams params = OUParams::scalar(1e-8, 0.5);
  double worst = 0.0;
  for (int i = 0; i < 401; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, -5.0 + 0.025 * i);
    const double b = brownian_density(D, 1.0, x, params.x0);
    worst = std::max(worst, std::abs(mehler_density(params, D, 1.0, x) - b) / b);
  }
  return {worst < 1e-4, "max relative gap = " + num(worst) + " (< 1e-4)"};
}

Outcome riemann_convergence() {
  const LevyTriplet gauss = LevyTriplet::scalar(0.0, 1.0);
  const TestFunction f =
      TestFunction::sample(TimeGrid::uniform(10.0, 100000), [](double t) { return std::exp(-t); });
  const std::complex<double> limit = log_char_functional(gauss, f);
  const std::vector<double> ns{10, 100, 1000, 10000};
  std::vector<double> gaps;
  for (double n : ns) gaps.push_back(std::abs(log_cf_riemann(gauss, f, static_cast<int>(n)) - limit));
  const double slope = -loglog_slope(ns, gaps);
  return {slope >= 0.8 && gaps.back() < 1e-4,
          "rate = " + num(slope) + " (>= 0.8), gap(1e4) = " + num(gaps.back()) + " (< 1e-4)"};
}

Outcome vanishing_fluctuations(int threads) {
  const LevyTriplet gauss = LevyTriplet::scalar(0.0, 1.0);
  const LevyTriplet jumps = LevyTriplet::scalar(0.3, 0.5, 1.0, {{0.5, 1.0}, {0.5, -2.0}});
  bool halves = true;
  for (const auto* triplet : {&gauss, &jumps}) {
    for (int n = 1; n <= 1024; n *= 2) {
      halves = halves && increment_fluctuation(*triplet, 2 * n) == increment_fluctuation(*triplet, n) / 2.0;
    }
  }
  // First increment and unit-interval sum of n = 100 lattice paths.
  const std::size_t n_paths = 100000;
  const TimeGrid grid = TimeGrid::lattice(100, 1.0);
  bool within = true;
  std::string detail = std::string("exact halving ") + (halves ? "yes" : "no");
  for (const auto* triplet : {&gauss, &jumps}) {
    std::vector<double> first(n_paths);
    std::vector<double> total(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t j) {
      const NoisePath path = generate_path(*triplet, grid, sub_seed(33, j));
      first[j] = path.increments(0, 0);
      total[j] = path.increments.sum();
    });
    const SampleMoments single = moments(first);
    const SampleMoments unit = moments(total);
    const double v = increment_fluctuation(*triplet, 1);
    const double z1 = std::abs(single.variance - v / 100.0) / single.variance_stderr();
    const double z2 = std::abs(unit.variance - v) / unit.variance_stderr();
    within = within && z1 <= 3.0 && z2 <= 3.0;
    detail += "; v=" + num(v) + ": |z| increment " + num(z1) + ", unit sum " + num(z2) + " (<= 3)";
  }
  return {halves && within, detail};
}

Outcome l2_cauchy() {
  const LevyTriplet gauss = LevyTriplet::scalar(0.0, 1.0);
  const double coarse = l2_cauchy_gap(gauss, 1.0, 1.0, 8, 16);
  const double fine = l2_cauchy_gap(gauss, 1.0, 1.0, 64, 128);
  return {coarse > fine && fine <= coarse / 4.0,
          "gap(8,16) = " + num(coarse) + ", gap(64,128) = " + num(fine) + " (<= gap(8,16)/4)"};
}

Outcome order_zero() {
  const LevyTriplet gauss = LevyTriplet::scalar(0.0, 1.0);
  const OUParams params = OUParams::scalar(1.0, 0.5);
  const NoisePath path = generate_path(gauss, TimeGrid::with_step(1e-3, 1.0), 77);
  const double linear = simulate_from_noise(params, path).states(0, path.grid.intervals());
  double worst = 0.0;
  for (int N : {0, 3}) {
    worst = std::max(worst, std::abs(truncated_series(params, gauss, 0.0, 2, N, path, 1.0).total - linear));
  }
  return {worst <= 1e-12, "|series - linear| = " + num(worst) + " (<= 1e-12)"};
}

Outcome nonlinear_order() {
  const LevyTriplet gauss = LevyTriplet::scalar(0.0, 0.25);
  const OUParams params = OUParams::scalar(1.0, 0.5);
  const NoisePath path = generate_path(gauss, TimeGrid::with_step(1e-3, 1.0), 88);
  const OrderCheck check = order_check(params, gauss, 2, 2, path, 1.0, {0.05, 0.1, 0.2});
  std::string errors;
  for (double e : check.errors) errors += (errors.empty() ? "" : ", ") + num(e);
  return {check.slope >= 2.6 && check.slope <= 3.4,
          "slope = " + num(check.slope) + " in [2.6, 3.4]; errors " + errors};
}

Outcome tree_counts() {
  struct Case {
    int p, i;
    std::size_t expected;
  };
  bool ok = true;
  std::string detail;
  for (const Case c : {Case{2, 0, 2}, Case{2, 1, 4}, Case{2, 2, 16}, Case{2, 3, 80}, Case{3, 1, 8}}) {
    const std::size_t got = enumerate_trees(c.p, c.i).size();
    const std::size_t brute = brute_force_tree_count(c.p, c.i);
    ok = ok && got == c.expected && brute == c.expected;
    detail += (detail.empty() ? "" : ", ") + std::string("(p=") + std::to_string(c.p) +
              ",i=" + std::to_string(c.i) + ") " + std::to_string(got) + "/" + std::to_string(brute);
  }
  return {ok, detail + " (enumerated/brute force)"};
}

Outcome heat_equation() {
  const Eigen::MatrixXd D = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
  const std::vector<double> times{1.0};
  const auto residual = [&](double h, double dt) {
    const auto nodes = static_cast<std::size_t>(std::llround(12.0 / h)) + 1;
    return heat_residual(D, SpatialGrid::line(-6.0, h, nodes), times, dt, x0);
  };
  const double coarse = residual(0.1, 1e-3);
  const double halved = residual(0.05, 5e-4);
  const double fine = residual(0.02, 1e-4);
  const double ratio = coarse / halved;
  return {ratio >= 3.2 && ratio <= 4.8 && fine < 1e-3,
          "ratio = " + num(ratio) + " in [3.2, 4.8]; residual(h=0.02) = " + num(fine) + " (< 1e-3)"};
}

}  // namespace

std::size_t brute_force_tree_count(int p, int inner) {
  const int length = p * inner + 1;
  std::size_t words = 1;
  for (int k = 0; k < length; ++k) words *= 3;
  std::size_t count = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::size_t code = w;
    int open = 1;
    int inners = 0;
    bool valid = true;
    for (int k = 0; k < length && valid; ++k) {
      const int symbol = static_cast<int>(code % 3);  // 0 inner, 1 noise, 2 init
      code /= 3;
      if (open == 0) valid = false;
      --open;
      if (symbol == 0) {
        open += p;
        ++inners;
      }
    }
    if (valid && open == 0 && inners == inner) ++count;
  }
  return count;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << ' ' << r.name << ": " << r.detail << " ("
     << num(r.seconds) << " s, limit " << num(r.time_limit) << " s)";
  return os.str();
}

std::vector<CriterionResult> run_acceptance(int threads, std::ostream* progress) {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "mehler-ks", 10.0, [&] { return mehler_ks(threads); }},
      {2, "levy-ou-charfn", 60.0, [&] { return jump_cf(threads); }},
      {3, "brownian-limit", 1.0, brownian_limit},
      {4, "riemann-convergence", 1.0, riemann_convergence},
      {5, "vanishing-fluctuations", 10.0, [&] { return vanishing_fluctuations(threads); }},
      {6, "l2-cauchy", 1.0, l2_cauchy},
      {7, "tree-order-zero", 1.0, order_zero},
      {8, "tree-nonlinear-order", 30.0, nonlinear_order},
      {9, "tree-counts", 1.0, tree_counts},
      {10, "heat-residual", 5.0, heat_equation},
  };
  std::vector<CriterionResult> results;
  for (const auto& c : criteria) {
    CriterionResult r{c.id, c.name, false, "", 0.0, c.limit};
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome out = c.run();
      r.passed = out.passed;
      r.detail = out.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds >= r.time_limit) {
      r.passed = false;
      r.detail += "; over time budget";
    }
    if (progress) *progress << format_result(r) << std::endl;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace levy_ou
