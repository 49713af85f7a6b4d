#include "levy_ou/noise_field.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "levy_ou/errors.hpp"
#include "levy_ou/format.hpp"
#include "levy_ou/random.hpp"
#include "levy_ou/stats.hpp"

namespace levy_ou {

NoisePath generate_path(const LevyTriplet& triplet, const TimeGrid& grid, std::uint64_t seed) {
  IncrementSampler sampler(triplet, grid.dt());
  Rng rng(seed);
  Eigen::MatrixXd increments(triplet.dim, grid.intervals());
  if (triplet.dim == 1) {
    for (std::size_t k = 0; k < grid.intervals(); ++k) increments(0, k) = sampler.sample_scalar(rng);
  } else {
    for (std::size_t k = 0; k < grid.intervals(); ++k) sampler.sample(rng, increments.col(k));
  }
  return NoisePath{grid, std::move(increments), triplet, seed};
}

namespace {

// Stride of the path's nodes inside f's grid.
std::size_t node_stride(const TimeGrid& path_grid, const TimeGrid& f_grid) {
  const double ratio = path_grid.dt() / f_grid.dt();
  const double r = std::round(ratio);
  if (r < 1.0 || std::abs(r * f_grid.dt() - path_grid.dt()) > 1e-12 * path_grid.dt()) {
    throw InvalidInput("pair: grid mismatch (test function spacing does not divide path spacing)");
  }
  const auto stride = static_cast<std::size_t>(r);
  if (f_grid.intervals() < path_grid.intervals() * stride) {
    throw InvalidInput("pair: grid mismatch (test function does not cover the path)");
  }
  return stride;
}

}  // namespace

Eigen::VectorXd pair(const NoisePath& path, const TestFunction& f) {
  const std::size_t stride = node_stride(path.grid, f.grid());
  const auto& values = f.values();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(path.dim());
  if (f.dim() == 1) {
    for (std::size_t k = 0; k < path.grid.intervals(); ++k) {
      acc += values(0, k * stride) * path.increments.col(k);
    }
  } else if (f.dim() == path.dim()) {
    for (std::size_t k = 0; k < path.grid.intervals(); ++k) {
      acc += values.col(k * stride).cwiseProduct(path.increments.col(k));
    }
  } else {
    throw InvalidInput("pair: test function dimension does not match noise");
  }
  return acc;
}

std::complex<double> empirical_cf(const LevyTriplet& triplet, const TimeGrid& grid,
                                  const TestFunction& f, std::size_t n_paths,
                                  std::uint64_t seed, int threads) {
  if (n_paths < 1) throw InvalidInput("empirical_cf: n_paths must be >= 1");
  if (f.dim() != 1 && f.dim() != triplet.dim) {
    throw InvalidInput("empirical_cf: test function dimension does not match triplet");
  }
  validate(triplet);
  std::vector<double> phase(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t j) {
    const NoisePath path = generate_path(triplet, grid, sub_seed(seed, j));
    phase[j] = pair(path, f).sum();
  });
  // compensated sums, so identical phases average back to themselves
  const auto neumaier = [&](double (*fn)(double)) {
    double sum = 0.0;
    double carry = 0.0;
    for (double ph : phase) {
      const double x = fn(ph);
      const double next = sum + x;
      carry += std::abs(sum) >= std::abs(x) ? (sum - next) + x : (x - next) + sum;
      sum = next;
    }
    return sum + carry;
  };
  const double n = static_cast<double>(n_paths);
  return {neumaier(std::cos) / n, neumaier(std::sin) / n};
}

std::complex<double> log_cf_riemann(const LevyTriplet& triplet, const TestFunction& f, int n) {
  if (n < 1) throw InvalidInput("log_cf_riemann: n must be >= 1");
  if (f.dim() != triplet.dim) {
    throw InvalidInput("log_cf_riemann: test function dimension does not match triplet");
  }
  const double t_end = f.grid().node(f.grid().intervals());
  const auto count = static_cast<long>(std::floor(t_end * n + 1e-9));
  std::complex<double> sum{0.0, 0.0};
  for (long k = 0; k < count; ++k) {
    sum += psi(triplet, f.at(static_cast<double>(k) / n));
  }
  return sum / static_cast<double>(n);
}

double increment_fluctuation(const LevyTriplet& triplet, int n) {
  if (n < 1) throw InvalidInput("increment_fluctuation: n must be >= 1");
  validate(triplet);
  return triplet.unit_covariance().trace() / static_cast<double>(n);
}

double smooth_cutoff(double u, int n) {
  const double v = u * n;
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  return v * v * (3.0 - 2.0 * v);
}

double sharp_kernel_at(double m, double t, double t_prime) {
  return t_prime <= t ? std::exp(-m * (t - t_prime)) : 0.0;
}

double mollified_kernel_at(double m, double t, int n, double t_prime) {
  const double u = t - t_prime;
  if (u <= 0.0) return 0.0;
  return smooth_cutoff(u, n) * std::exp(-m * u);
}

namespace {

void check_kernel_args(double m, double t, int n) {
  if (!(m > 0.0)) throw InvalidInput("mollified kernel: m must be positive");
  if (!(t > 0.0)) throw InvalidInput("mollified kernel: t must be positive");
  if (n < 1) throw InvalidInput("mollified kernel: n must be >= 1");
}

std::size_t resolving_intervals(double t, int n) {
  return std::max<std::size_t>(1024, static_cast<std::size_t>(std::ceil(64.0 * n * t)));
}

}  // namespace

TestFunction mollified_kernel(double m, double t, int n, std::size_t intervals) {
  check_kernel_args(m, t, n);
  if (intervals == 0) intervals = resolving_intervals(t, n);
  const TimeGrid grid = TimeGrid::uniform(t, intervals);
  return TestFunction::sample(grid, [&](double tp) { return mollified_kernel_at(m, t, n, tp); });
}

double l2_cauchy_gap(const LevyTriplet& triplet, double m, double t, int n, int n2) {
  check_kernel_args(m, t, n);
  check_kernel_args(m, t, n2);
  if (n == n2) throw InvalidInput("l2_cauchy_gap: n and n2 must differ");
  if (triplet.dim != 1) throw InvalidInput("l2_cauchy_gap: one-dimensional triplet required");
  validate(triplet);
  const TimeGrid grid = TimeGrid::uniform(t, resolving_intervals(t, std::max(n, n2)));
  double int_g = 0.0;
  double int_g2 = 0.0;
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    const double tp = grid.node(k);
    const double g = mollified_kernel_at(m, t, n, tp) - mollified_kernel_at(m, t, n2, tp);
    const double w = (k == 0 || k == grid.intervals()) ? 0.5 : 1.0;
    int_g += w * g;
    int_g2 += w * g * g;
  }
  int_g *= grid.dt();
  int_g2 *= grid.dt();
  const double v = triplet.unit_covariance()(0, 0);
  const double mu = triplet.unit_mean()(0);
  return v * int_g2 + mu * mu * int_g * int_g;
}

void write_csv(std::ostream& out, const NoisePath& path) {
  out << 't';
  for (int j = 1; j <= path.dim(); ++j) out << ",dL_" << j;
  out << '\n';
  for (std::size_t k = 0; k < path.grid.intervals(); ++k) {
    out << format_double(path.grid.node(k));
    for (int j = 0; j < path.dim(); ++j) out << ',' << format_double(path.increments(j, k));
    out << '\n';
  }
}

NoisePath read_noise_csv(std::istream& in, const LevyTriplet& triplet, std::uint64_t seed) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("noise csv: missing header");
  const auto dim = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (line.rfind("t,", 0) != 0 || dim < 1) throw InvalidInput("noise csv: bad header");
  if (dim != triplet.dim) throw InvalidInput("noise csv: column count does not match triplet");
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int col = 0;
    while (std::getline(row, cell, ',')) {
      const double v = std::stod(cell);
      if (col == 0) {
        times.push_back(v);
      } else {
        values.push_back(v);
      }
      ++col;
    }
    if (col != dim + 1) throw InvalidInput("noise csv: ragged row");
  }
  if (times.size() < 2) throw InvalidInput("noise csv: need at least two rows to infer dt");
  const double dt = times[1] - times[0];
  const TimeGrid grid = TimeGrid::with_step(dt, dt * static_cast<double>(times.size()));
  Eigen::MatrixXd increments =
      Eigen::Map<Eigen::MatrixXd>(values.data(), dim, static_cast<Eigen::Index>(times.size()));
  return NoisePath{grid, std::move(increments), triplet, seed};
}

}  // namespace levy_ou
