#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "levy_ou/random.hpp"
#include "levy_ou/time_grid.hpp"

namespace levy_ou {

/// One atom of the discrete jump law: jump `vector` drawn with probability `weight`.
struct Jump {
  double weight = 0.0;
  Eigen::VectorXd vector;
};

/// Drift, diffusion and compound-Poisson jump data of a Lévy process.
///
/// The characteristic exponent is
///   psi(k) = i<a,k> - 1/2 <k, Sigma k> + z * sum_i w_i (exp(i<s_i,k>) - 1),
/// so an increment over dt has characteristic function exp(psi(k) dt).
/// Density formulas written in terms of a diffusion tensor D use D = Sigma / 2.
struct LevyTriplet {
  int dim = 1;
  Eigen::VectorXd drift;
  Eigen::MatrixXd diffusion;
  double jump_rate = 0.0;
  std::vector<Jump> jumps;

  /// One-dimensional triplet; `jumps` given as (weight, jump) pairs.
  static LevyTriplet scalar(double drift, double sigma2, double jump_rate = 0.0,
                            const std::vector<std::pair<double, double>>& jumps = {});

  /// Zero triplet of dimension d.
  static LevyTriplet zero(int dim);

  bool has_jumps() const { return jump_rate > 0.0 && !jumps.empty(); }

  /// Mean of a unit-time increment: a + z E_r[s].
  Eigen::VectorXd unit_mean() const;
  /// Covariance of a unit-time increment: Sigma + z E_r[s s^T].
  Eigen::MatrixXd unit_covariance() const;
};

void to_json(nlohmann::json& j, const LevyTriplet& t);
void from_json(const nlohmann::json& j, LevyTriplet& t);

/// Throws InvalidInput naming the first violated invariant.
void validate(const LevyTriplet& triplet);

std::complex<double> psi(const LevyTriplet& triplet, const Eigen::VectorXd& k);

/// Samples increments of the Lévy process over a fixed step dt.
/// Precomputes the diffusion factor and jump tables so repeated draws are cheap.
/// Holds distribution state, so use one sampler per thread.
class IncrementSampler {
 public:
  IncrementSampler(const LevyTriplet& triplet, double dt);

  int dim() const { return static_cast<int>(mean_step_.size()); }

  /// Writes one increment into `out` (length dim).
  void sample(Rng& rng, Eigen::Ref<Eigen::VectorXd> out);
  Eigen::VectorXd sample(Rng& rng);

  /// One-dimensional fast path.
  double sample_scalar(Rng& rng);

 private:
  Eigen::VectorXd mean_step_;
  Eigen::MatrixXd factor_;  // factor * factor^T = Sigma * dt
  bool has_gaussian_ = false;
  double poisson_mean_ = 0.0;
  std::vector<Eigen::VectorXd> jump_vectors_;
  std::vector<double> jump_weights_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::poisson_distribution<int> poisson_{1.0};
  std::discrete_distribution<int> pick_jump_;
};

/// a dt + Sigma^{1/2} sqrt(dt) Z + (sum of Poisson(z dt) jumps drawn from r).
Eigen::VectorXd sample_increment(const LevyTriplet& triplet, double dt, Rng& rng);

/// A test function sampled on a uniform time grid; column k holds f(t_k).
/// Outside [0, t_end] the function is taken to vanish.
class TestFunction {
 public:
  TestFunction(TimeGrid grid, Eigen::MatrixXd values);

  template <class F>
  static TestFunction sample(const TimeGrid& grid, F&& f) {
    using R = std::invoke_result_t<F&, double>;
    if constexpr (std::is_arithmetic_v<R>) {
      Eigen::MatrixXd values(1, grid.nodes());
      for (std::size_t k = 0; k < grid.nodes(); ++k) values(0, k) = f(grid.node(k));
      return TestFunction(grid, std::move(values));
    } else {
      const Eigen::VectorXd first = f(grid.node(0));
      Eigen::MatrixXd values(first.size(), grid.nodes());
      values.col(0) = first;
      for (std::size_t k = 1; k < grid.nodes(); ++k) values.col(k) = f(grid.node(k));
      return TestFunction(grid, std::move(values));
    }
  }

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::VectorXd value(std::size_t k) const { return values_.col(k); }

  /// Linear interpolation between nodes; zero outside [0, t_end].
  Eigen::VectorXd at(double t) const;

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
};

/// Composite trapezoid of psi(f(t)) over the test function's grid.
std::complex<double> log_char_functional(const LevyTriplet& triplet, const TestFunction& f);

/// exp of log_char_functional: the characteristic functional C(f) of the noise.
std::complex<double> char_functional(const LevyTriplet& triplet, const TestFunction& f);

}  // namespace levy_ou
