#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "levy_ou/levy_core.hpp"
#include "levy_ou/time_grid.hpp"

namespace levy_ou {

/// A seeded realization of Lévy increments on a uniform grid.
/// Column k of `increments` is the increment over [t_k, t_{k+1}).
struct NoisePath {
  TimeGrid grid;
  Eigen::MatrixXd increments;
  LevyTriplet triplet;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(increments.rows()); }
};

NoisePath generate_path(const LevyTriplet& triplet, const TimeGrid& grid, std::uint64_t seed);

/// Left-point pairing sum_k f(t_k) dL_k. A scalar f multiplies every component;
/// a d-valued f pairs componentwise, so the entries sum to <f, eta>.
/// f's grid must contain the path's nodes (same spacing or an integer refinement).
Eigen::VectorXd pair(const NoisePath& path, const TestFunction& f);

/// Monte Carlo estimate of E exp(i <eta, f>) over `n_paths` paths; path j uses
/// sub_seed(seed, j). The result does not depend on `threads`.
std::complex<double> empirical_cf(const LevyTriplet& triplet, const TimeGrid& grid,
                                  const TestFunction& f, std::size_t n_paths,
                                  std::uint64_t seed, int threads = 1);

/// Log characteristic function of the lattice noise with spacing 1/n:
/// sum over t = k/n in [0, t_end) of psi(f(t)) / n.
std::complex<double> log_cf_riemann(const LevyTriplet& triplet, const TestFunction& f, int n);

/// Variance of a single lattice increment, trace(Sigma + z E[s s^T]) / n.
double increment_fluctuation(const LevyTriplet& triplet, int n);

/// Smooth monotone cutoff: 0 for u <= 0, 1 for u >= 1/n, smoothstep in between.
double smooth_cutoff(double u, int n);

/// 1_{t' <= t} exp(-m (t - t')).
double sharp_kernel_at(double m, double t, double t_prime);

/// cutoff_n(t - t') exp(-m (t - t')); never exceeds the sharp kernel.
double mollified_kernel_at(double m, double t, int n, double t_prime);

/// Mollified kernel sampled on [0, t]. With intervals == 0 the grid resolves
/// the cutoff window with at least 64 cells.
TestFunction mollified_kernel(double m, double t, int n, std::size_t intervals = 0);

/// E[(eta(k_n - k_n2))^2] = v int g^2 + mu^2 (int g)^2 for g = k_n - k_n2,
/// with v, mu the unit-time increment variance and mean (dimension 1).
double l2_cauchy_gap(const LevyTriplet& triplet, double m, double t, int n, int n2);

/// CSV with header `t,dL_1..dL_d`, one row per interval start.
void write_csv(std::ostream& out, const NoisePath& path);

/// Reads a CSV written by write_csv. The triplet and seed are not stored in the
/// file and are attached by the caller.
NoisePath read_noise_csv(std::istream& in, const LevyTriplet& triplet, std::uint64_t seed);

}  // namespace levy_ou
