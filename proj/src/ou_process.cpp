#include "levy_ou/ou_process.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "levy_ou/errors.hpp"
#include "levy_ou/format.hpp"
#include "levy_ou/random.hpp"
#include "levy_ou/stats.hpp"

namespace levy_ou {

void validate(const OUParams& params) {
  if (!(params.m > 0.0) || !std::isfinite(params.m)) {
    throw InvalidInput("ou params: m must be positive");
  }
  if (params.x0.size() < 1 || !params.x0.allFinite()) {
    throw InvalidInput("ou params: x0 must be a finite vector");
  }
}

double green(double m, double t) {
  if (!(m > 0.0)) throw InvalidInput("green: m must be positive");
  return t < 0.0 ? 0.0 : std::exp(-m * t);
}

namespace {

void check_dims(const OUParams& params, const LevyTriplet& triplet) {
  validate(params);
  validate(triplet);
  if (params.dim() != triplet.dim) throw InvalidInput("ou: x0 dimension does not match triplet");
}

// Symmetric square-root factor of a PSD matrix.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  if (cov.rows() == 1) return Eigen::MatrixXd::Constant(1, 1, std::sqrt(std::max(cov(0, 0), 0.0)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// One exact transition of the Gaussian OU process over dt.
class ExactGaussianStep {
 public:
  ExactGaussianStep(const OUParams& params, const LevyTriplet& triplet, double dt) {
    if (triplet.jump_rate != 0.0 || !triplet.jumps.empty()) {
      throw InvalidInput("simulate_exact_gaussian: triplet has jumps");
    }
    const double m = params.m;
    decay_ = std::exp(-m * dt);
    shift_ = triplet.drift * (-std::expm1(-m * dt) / m);
    factor_ = psd_factor(triplet.diffusion * (-std::expm1(-2.0 * m * dt) / (2.0 * m)));
  }

  void advance(Eigen::Ref<Eigen::VectorXd> x, Rng& rng) {
    if (x.size() == 1) {
      x(0) = decay_ * x(0) + shift_(0) + factor_(0, 0) * normal_(rng);
      return;
    }
    Eigen::VectorXd z(x.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal_(rng);
    x = decay_ * x + shift_ + factor_ * z;
  }

 private:
  double decay_ = 1.0;
  Eigen::VectorXd shift_;
  Eigen::MatrixXd factor_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace

ProcessPath simulate_exact_gaussian(const OUParams& params, const LevyTriplet& triplet,
                                    const TimeGrid& grid, std::uint64_t seed) {
  check_dims(params, triplet);
  ExactGaussianStep step(params, triplet, grid.dt());
  Rng rng(seed);
  Eigen::MatrixXd states(params.dim(), grid.nodes());
  states.col(0) = params.x0;
  Eigen::VectorXd x = params.x0;
  for (std::size_t k = 0; k < grid.intervals(); ++k) {
    step.advance(x, rng);
    states.col(k + 1) = x;
  }
  return ProcessPath{grid, std::move(states), params, "exact-gaussian", seed, triplet};
}

ProcessPath simulate_from_noise(const OUParams& params, const NoisePath& path) {
  validate(params);
  if (params.dim() != path.dim()) throw InvalidInput("ou: x0 dimension does not match noise");
  const double dt = path.grid.dt();
  const double decay = std::exp(-params.m * dt);
  const double weight = std::exp(-0.5 * params.m * dt);
  Eigen::MatrixXd states(params.dim(), path.grid.nodes());
  states.col(0) = params.x0;
  for (std::size_t k = 0; k < path.grid.intervals(); ++k) {
    states.col(k + 1) = decay * states.col(k) + weight * path.increments.col(k);
  }
  return ProcessPath{path.grid, std::move(states), params, "noise", path.seed, path.triplet};
}

Eigen::MatrixXd terminal_states_exact_gaussian(const OUParams& params, const LevyTriplet& triplet,
                                               const TimeGrid& grid, std::size_t n_paths,
                                               std::uint64_t seed, int threads) {
  check_dims(params, triplet);
  ExactGaussianStep probe(params, triplet, grid.dt());  // surfaces jump errors before fan-out
  Eigen::MatrixXd out(params.dim(), n_paths);
  parallel_for(n_paths, threads, [&](std::size_t j) {
    ExactGaussianStep step(params, triplet, grid.dt());
    Rng rng(sub_seed(seed, j));
    Eigen::VectorXd x = params.x0;
    for (std::size_t k = 0; k < grid.intervals(); ++k) step.advance(x, rng);
    out.col(j) = x;
  });
  return out;
}

Eigen::MatrixXd terminal_states_from_noise(const OUParams& params, const LevyTriplet& triplet,
                                           const TimeGrid& grid, std::size_t n_paths,
                                           std::uint64_t seed, int threads) {
  check_dims(params, triplet);
  const double dt = grid.dt();
  const double decay = std::exp(-params.m * dt);
  const double weight = std::exp(-0.5 * params.m * dt);
  Eigen::MatrixXd out(params.dim(), n_paths);
  parallel_for(n_paths, threads, [&](std::size_t j) {
    const NoisePath path = generate_path(triplet, grid, sub_seed(seed, j));
    Eigen::VectorXd x = params.x0;
    for (std::size_t k = 0; k < grid.intervals(); ++k) {
      x = decay * x + weight * path.increments.col(k);
    }
    out.col(j) = x;
  });
  return out;
}

std::complex<double> char_function_xt(const OUParams& params, const LevyTriplet& triplet, double t,
                                      const Eigen::VectorXd& p, std::size_t n_quad) {
  check_dims(params, triplet);
  if (!(t > 0.0)) throw InvalidInput("char_function_xt: t must be positive");
  if (n_quad < 2) throw InvalidInput("char_function_xt: need at least two quadrature nodes");
  if (p.size() != params.dim()) throw InvalidInput("char_function_xt: p has wrong dimension");
  const double h = t / static_cast<double>(n_quad - 1);
  std::complex<double> integral{0.0, 0.0};
  for (std::size_t j = 0; j < n_quad; ++j) {
    const double s = static_cast<double>(j) * h;
    const double w = (j == 0 || j + 1 == n_quad) ? 0.5 : 1.0;
    integral += w * psi(triplet, std::exp(-params.m * (t - s)) * p);
  }
  integral *= h;
  const double shift = params.x0.dot(p) * std::exp(-params.m * t);
  return std::exp(std::complex<double>(0.0, shift) + integral);
}

namespace {

Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& D, const char* who) {
  if (D.rows() != D.cols() || D.rows() < 1) throw InvalidInput(std::string(who) + ": D must be square");
  if ((D - D.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidInput(std::string(who) + ": D must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0)) {
    throw InvalidInput(std::string(who) + ": singular D");
  }
  return llt;
}

double log_sqrt_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

GaussianLaw mehler_law(const OUParams& params, const Eigen::MatrixXd& D, double t) {
  validate(params);
  if (!(t > 0.0)) throw InvalidInput("mehler_density: t must be positive");
  spd_factor(D, "mehler_density");
  if (D.rows() != params.dim()) throw InvalidInput("mehler_density: D has wrong dimension");
  const double m = params.m;
  return {std::exp(-m * t) * params.x0, D * (-std::expm1(-2.0 * m * t) / m)};
}

double mehler_density(const OUParams& params, const Eigen::MatrixXd& D, double t,
                      const Eigen::VectorXd& x) {
  const GaussianLaw law = mehler_law(params, D, t);
  if (x.size() != law.mean.size()) throw InvalidInput("mehler_density: x has wrong dimension");
  const auto llt = spd_factor(law.covariance, "mehler_density");
  const Eigen::VectorXd r = llt.matrixL().solve(x - law.mean);
  const double d = static_cast<double>(x.size());
  return std::exp(-0.5 * r.squaredNorm() - log_sqrt_det(llt) -
                  0.5 * d * std::log(2.0 * std::numbers::pi));
}

double brownian_density(const Eigen::MatrixXd& D, double t, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x0) {
  if (!(t > 0.0)) throw InvalidInput("brownian_density: t must be positive");
  const auto llt = spd_factor(D, "brownian_density");
  if (x.size() != D.rows() || x0.size() != D.rows()) {
    throw InvalidInput("brownian_density: dimension mismatch");
  }
  const Eigen::VectorXd r = llt.matrixL().solve(x - x0);
  const double d = static_cast<double>(x.size());
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-log_sqrt_det(llt)) *
         std::exp(-r.squaredNorm() / (4.0 * t));
}

SpatialGrid::SpatialGrid(Eigen::VectorXd lower, double h, std::vector<std::size_t> counts)
    : lower_(std::move(lower)), h_(h), counts_(std::move(counts)) {
  if (!(h_ > 0.0)) throw InvalidInput("spatial grid: h must be positive");
  if (counts_.empty() || static_cast<std::size_t>(lower_.size()) != counts_.size()) {
    throw InvalidInput("spatial grid: dimension mismatch");
  }
  size_ = 1;
  for (std::size_t c : counts_) {
    if (c == 0) throw InvalidInput("spatial grid: empty axis");
    strides_.push_back(size_);
    size_ *= c;
  }
}

SpatialGrid SpatialGrid::line(double lower, double h, std::size_t nodes) {
  return SpatialGrid(Eigen::VectorXd::Constant(1, lower), h, {nodes});
}

std::vector<std::size_t> SpatialGrid::unflatten(std::size_t flat) const {
  std::vector<std::size_t> idx(counts_.size());
  for (std::size_t j = 0; j < counts_.size(); ++j) {
    idx[j] = flat % counts_[j];
    flat /= counts_[j];
  }
  return idx;
}

Eigen::VectorXd SpatialGrid::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Eigen::VectorXd x(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) x(j) = lower_(j) + static_cast<double>(idx[j]) * h_;
  return x;
}

std::vector<double> SpatialGrid::sample(const std::function<double(const Eigen::VectorXd&)>& f) const {
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = f(point(i));
  return out;
}

namespace {

struct SnappedJump {
  double weight;
  std::vector<long> offset;
};

std::vector<SnappedJump> snap_jumps(const LevyTriplet& triplet, double h, double& snap_error) {
  std::vector<SnappedJump> out;
  snap_error = 0.0;
  if (triplet.jump_rate == 0.0) return out;
  for (const auto& j : triplet.jumps) {
    SnappedJump s{j.weight, std::vector<long>(triplet.dim)};
    for (int a = 0; a < triplet.dim; ++a) {
      const double steps = std::round(j.vector(a) / h);
      s.offset[a] = static_cast<long>(steps);
      snap_error = std::max(snap_error, std::abs(j.vector(a) - steps * h));
    }
    out.push_back(std::move(s));
  }
  return out;
}

bool stencil_fits(const SpatialGrid& grid, const std::vector<std::size_t>& idx,
                  const std::vector<SnappedJump>& jumps) {
  for (int a = 0; a < grid.dim(); ++a) {
    if (idx[a] < 1 || idx[a] + 1 >= grid.counts()[a]) return false;
  }
  for (const auto& j : jumps) {
    for (int a = 0; a < grid.dim(); ++a) {
      const long target = static_cast<long>(idx[a]) + j.offset[a];
      if (target < 0 || target >= static_cast<long>(grid.counts()[a])) return false;
    }
  }
  return true;
}

}  // namespace

bool generator_stencil_fits(const LevyTriplet& triplet, const SpatialGrid& grid,
                            std::size_t flat_index) {
  double snap = 0.0;
  return flat_index < grid.size() &&
         stencil_fits(grid, grid.unflatten(flat_index), snap_jumps(triplet, grid.h(), snap));
}

GeneratorValue generator_apply(const LevyTriplet& triplet, const SpatialGrid& grid,
                               std::span<const double> P, std::size_t flat_index) {
  if (triplet.dim != grid.dim()) throw InvalidInput("generator: triplet and grid dimensions differ");
  if (P.size() != grid.size()) throw InvalidInput("generator: sample count does not match grid");
  if (flat_index >= grid.size()) throw InvalidInput("generator: index out of range");
  GeneratorValue result;
  const auto jumps = snap_jumps(triplet, grid.h(), result.snap_error);
  const auto idx = grid.unflatten(flat_index);
  if (!stencil_fits(grid, idx, jumps)) {
    throw InvalidInput("generator: x too close to the grid boundary for the stencil");
  }
  const double h = grid.h();
  const auto at = [&](std::ptrdiff_t offset) { return P[flat_index + offset]; };
  const Eigen::MatrixXd D = 0.5 * triplet.diffusion;
  const double centre = P[flat_index];
  double value = 0.0;
  for (int j = 0; j < grid.dim(); ++j) {
    const auto sj = static_cast<std::ptrdiff_t>(grid.stride(j));
    value -= triplet.drift(j) * (at(sj) - at(-sj)) / (2.0 * h);
    value += D(j, j) * (at(sj) - 2.0 * centre + at(-sj)) / (h * h);
    for (int l = 0; l < grid.dim(); ++l) {
      if (l == j || D(j, l) == 0.0) continue;
      const auto sl = static_cast<std::ptrdiff_t>(grid.stride(l));
      value += D(j, l) * (at(sj + sl) - at(sj - sl) - at(-sj + sl) + at(-sj - sl)) / (4.0 * h * h);
    }
  }
  double jump_term = 0.0;
  for (const auto& j : jumps) {
    std::ptrdiff_t offset = 0;
    for (int a = 0; a < grid.dim(); ++a) offset += j.offset[a] * static_cast<std::ptrdiff_t>(grid.stride(a));
    jump_term += j.weight * (at(offset) - centre);
  }
  result.value = value + triplet.jump_rate * jump_term;
  return result;
}

double forward_residual(const LevyTriplet& triplet, const SpatialGrid& grid,
                        const std::function<double(double, const Eigen::VectorXd&)>& P,
                        std::span<const double> t_values, double dt) {
  validate(triplet);
  if (!(dt > 0.0)) throw InvalidInput("forward_residual: dt must be positive");
  double worst = 0.0;
  for (double t : t_values) {
    const auto now = grid.sample([&](const Eigen::VectorXd& x) { return P(t, x); });
    const auto later = grid.sample([&](const Eigen::VectorXd& x) { return P(t + dt, x); });
    const auto earlier = grid.sample([&](const Eigen::VectorXd& x) { return P(t - dt, x); });
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!generator_stencil_fits(triplet, grid, i)) continue;
      const double dpdt = (later[i] - earlier[i]) / (2.0 * dt);
      worst = std::max(worst, std::abs(dpdt - generator_apply(triplet, grid, now, i).value));
    }
  }
  return worst;
}

double heat_residual(const Eigen::MatrixXd& D, const SpatialGrid& grid,
                     std::span<const double> t_values, double dt, const Eigen::VectorXd& x0) {
  LevyTriplet gauss = LevyTriplet::zero(static_cast<int>(D.rows()));
  gauss.diffusion = 2.0 * D;
  for (double t : t_values) {
    if (!(t - dt > 0.0)) throw InvalidInput("heat_residual: need t > dt");
  }
  return forward_residual(
      gauss, grid, [&](double t, const Eigen::VectorXd& x) { return brownian_density(D, t, x, x0); },
      t_values, dt);
}

void write_csv(std::ostream& out, const ProcessPath& path) {
  out << 't';
  for (Eigen::Index j = 1; j <= path.states.rows(); ++j) out << ",x_" << j;
  out << '\n';
  for (std::size_t k = 0; k < path.grid.nodes(); ++k) {
    out << format_double(path.grid.node(k));
    for (Eigen::Index j = 0; j < path.states.rows(); ++j) {
      out << ',' << format_double(path.states(j, static_cast<Eigen::Index>(k)));
    }
    out << '\n';
  }
}

}  // namespace levy_ou
