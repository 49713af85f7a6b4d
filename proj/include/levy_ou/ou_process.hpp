#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "levy_ou/levy_core.hpp"
#include "levy_ou/noise_field.hpp"
#include "levy_ou/time_grid.hpp"

namespace levy_ou {

/// Mean-reversion rate and deterministic initial state of dX = -m X dt + dL.
struct OUParams {
  double m = 1.0;
  Eigen::VectorXd x0;

  static OUParams scalar(double m, double x0) { return {m, Eigen::VectorXd::Constant(1, x0)}; }
  int dim() const { return static_cast<int>(x0.size()); }
};

void validate(const OUParams& params);

/// Causal Green kernel of d/dt + m: exp(-m t) for t >= 0, zero before.
double green(double m, double t);

struct ProcessPath {
  TimeGrid grid;
  Eigen::MatrixXd states;  // column k is X(t_k)
  OUParams params;
  std::string source;  // "exact-gaussian" or "noise"
  std::uint64_t seed = 0;
  LevyTriplet triplet;
};

/// Exact Gaussian transitions; the triplet must have no jump part.
ProcessPath simulate_exact_gaussian(const OUParams& params, const LevyTriplet& triplet,
                                    const TimeGrid& grid, std::uint64_t seed);

/// X_{k+1} = exp(-m dt) X_k + exp(-m dt / 2) dL_k.
ProcessPath simulate_from_noise(const OUParams& params, const NoisePath& path);

/// Terminal states X(t_end) of `n_paths` exact-Gaussian paths (path j seeded by
/// sub_seed(seed, j)); d x n_paths. Independent of `threads`.
Eigen::MatrixXd terminal_states_exact_gaussian(const OUParams& params, const LevyTriplet& triplet,
                                               const TimeGrid& grid, std::size_t n_paths,
                                               std::uint64_t seed, int threads = 1);

/// Terminal states of noise-driven paths; path j is
/// simulate_from_noise(params, generate_path(triplet, grid, sub_seed(seed, j))).
Eigen::MatrixXd terminal_states_from_noise(const OUParams& params, const LevyTriplet& triplet,
                                           const TimeGrid& grid, std::size_t n_paths,
                                           std::uint64_t seed, int threads = 1);

/// exp(i <x0, p> e^{-mt} + int_0^t psi(e^{-m(t - s)} p) ds), trapezoid on n_quad nodes.
std::complex<double> char_function_xt(const OUParams& params, const LevyTriplet& triplet, double t,
                                      const Eigen::VectorXd& p, std::size_t n_quad);

struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Transition law of the Gaussian OU process in terms of D = Sigma / 2:
/// mean e^{-mt} x0, covariance (D / m)(1 - e^{-2mt}).
GaussianLaw mehler_law(const OUParams& params, const Eigen::MatrixXd& D, double t);

/// Density of mehler_law at x (normalized to unit mass).
double mehler_density(const OUParams& params, const Eigen::MatrixXd& D, double t,
                      const Eigen::VectorXd& x);

/// (4 pi t)^{-d/2} det(D)^{-1/2} exp(-<x - x0, D^{-1}(x - x0)> / (4t)).
double brownian_density(const Eigen::MatrixXd& D, double t, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x0);

/// Tensor-product grid with equal spacing h in every direction. Flat index
/// runs fastest in the first coordinate.
class SpatialGrid {
 public:
  SpatialGrid(Eigen::VectorXd lower, double h, std::vector<std::size_t> counts);
  /// One-dimensional grid of `nodes` points starting at `lower`.
  static SpatialGrid line(double lower, double h, std::size_t nodes);

  int dim() const { return static_cast<int>(counts_.size()); }
  double h() const { return h_; }
  std::size_t size() const { return size_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  std::vector<std::size_t> unflatten(std::size_t flat) const;
  Eigen::VectorXd point(std::size_t flat) const;

  std::vector<double> sample(const std::function<double(const Eigen::VectorXd&)>& f) const;

 private:
  Eigen::VectorXd lower_;
  double h_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
};

struct GeneratorValue {
  double value = 0.0;
  /// Largest distance between a jump vector and the grid offset it was snapped to.
  double snap_error = 0.0;
};

/// -sum_j a_j d_j P + sum_{jl} D_jl d_jl P + z sum_i w_i [P(x + s_i) - P(x)], D = Sigma / 2,
/// with second-order central differences. Throws InvalidInput near the boundary.
GeneratorValue generator_apply(const LevyTriplet& triplet, const SpatialGrid& grid,
                               std::span<const double> P, std::size_t flat_index);

/// Whether generator_apply's stencil (including snapped jumps) fits at this node.
bool generator_stencil_fits(const LevyTriplet& triplet, const SpatialGrid& grid,
                            std::size_t flat_index);

/// Max over t in t_values and nodes where the stencil fits of
/// |(P(t + dt) - P(t - dt)) / (2 dt) - generator(P(t))|.
double forward_residual(const LevyTriplet& triplet, const SpatialGrid& grid,
                        const std::function<double(double, const Eigen::VectorXd&)>& P,
                        std::span<const double> t_values, double dt);

/// forward_residual for the Brownian kernel started at x0 under the Gaussian
/// generator with diffusion tensor D.
double heat_residual(const Eigen::MatrixXd& D, const SpatialGrid& grid,
                     std::span<const double> t_values, double dt, const Eigen::VectorXd& x0);

/// CSV with header `t,x_1..x_d`.
void write_csv(std::ostream& out, const ProcessPath& path);

}  // namespace levy_ou
