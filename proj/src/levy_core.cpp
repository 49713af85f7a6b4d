#include "levy_ou/levy_core.hpp"

#include <cmath>
#include <string>

#include "levy_ou/errors.hpp"

namespace levy_ou {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kEigenTol = 1e-12;
constexpr double kWeightTol = 1e-12;

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

LevyTriplet LevyTriplet::scalar(double drift, double sigma2, double jump_rate,
                                const std::vector<std::pair<double, double>>& jumps) {
  LevyTriplet t;
  t.dim = 1;
  t.drift = Eigen::VectorXd::Constant(1, drift);
  t.diffusion = Eigen::MatrixXd::Constant(1, 1, sigma2);
  t.jump_rate = jump_rate;
  for (const auto& [w, s] : jumps) t.jumps.push_back({w, Eigen::VectorXd::Constant(1, s)});
  return t;
}

LevyTriplet LevyTriplet::zero(int dim) {
  LevyTriplet t;
  t.dim = dim;
  t.drift = Eigen::VectorXd::Zero(dim);
  t.diffusion = Eigen::MatrixXd::Zero(dim, dim);
  return t;
}

Eigen::VectorXd LevyTriplet::unit_mean() const {
  Eigen::VectorXd mean = drift;
  for (const auto& j : jumps) mean += jump_rate * j.weight * j.vector;
  return mean;
}

Eigen::MatrixXd LevyTriplet::unit_covariance() const {
  Eigen::MatrixXd cov = diffusion;
  for (const auto& j : jumps) cov += jump_rate * j.weight * j.vector * j.vector.transpose();
  return cov;
}

void validate(const LevyTriplet& t) {
  if (t.dim < 1) throw InvalidInput("triplet: dimension must be >= 1");
  if (t.drift.size() != t.dim) throw InvalidInput("triplet: drift has wrong length");
  if (t.diffusion.rows() != t.dim || t.diffusion.cols() != t.dim) {
    throw InvalidInput("triplet: diffusion has wrong shape");
  }
  if (!all_finite(t.drift) || !all_finite(t.diffusion) || !std::isfinite(t.jump_rate)) {
    throw InvalidInput("triplet: non-finite entry");
  }
  if ((t.diffusion - t.diffusion.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw InvalidInput("triplet: asymmetric diffusion");
  }
  const Eigen::MatrixXd sym = 0.5 * (t.diffusion + t.diffusion.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kEigenTol) {
    throw InvalidInput("triplet: negative eigenvalue in diffusion");
  }
  if (t.jump_rate < 0.0) throw InvalidInput("triplet: negative jump rate");
  if (t.jumps.empty()) {
    if (t.jump_rate != 0.0) {
      throw InvalidInput("triplet: zero jump with positive rate (empty jump list)");
    }
    return;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < t.jumps.size(); ++i) {
    const auto& j = t.jumps[i];
    const std::string tag = "triplet: jump " + std::to_string(i);
    if (j.vector.size() != t.dim) throw InvalidInput(tag + " has wrong length");
    if (!(j.weight > 0.0) || !std::isfinite(j.weight)) {
      throw InvalidInput(tag + " has nonpositive weight");
    }
    if (!all_finite(j.vector)) throw InvalidInput(tag + " is not finite");
    if (!(j.vector.norm() > 0.0)) throw InvalidInput(tag + ": zero jump vector");
    total += j.weight;
  }
  if (std::abs(total - 1.0) > kWeightTol) {
    throw InvalidInput("triplet: weights not normalized (sum = " + std::to_string(total) + ")");
  }
}

std::complex<double> psi(const LevyTriplet& t, const Eigen::VectorXd& k) {
  if (k.size() != t.dim) throw InvalidInput("psi: dimension mismatch between k and triplet");
  const double drift = t.drift.dot(k);
  const double quad = k.dot(t.diffusion * k);
  std::complex<double> jump{0.0, 0.0};
  if (t.jump_rate != 0.0) {
    for (const auto& j : t.jumps) {
      const double phase = j.vector.dot(k);
      jump += j.weight * std::complex<double>(std::cos(phase) - 1.0, std::sin(phase));
    }
    jump *= t.jump_rate;
  }
  return std::complex<double>(-0.5 * quad, drift) + jump;
}

IncrementSampler::IncrementSampler(const LevyTriplet& t, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("sample_increment: dt must be positive");
  validate(t);
  mean_step_ = t.drift * dt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (t.diffusion + t.diffusion.transpose()));
  const Eigen::VectorXd roots = (eig.eigenvalues().cwiseMax(0.0) * dt).cwiseSqrt();
  factor_ = eig.eigenvectors() * roots.asDiagonal();
  has_gaussian_ = roots.maxCoeff() > 0.0;
  if (t.dim == 1) factor_(0, 0) = std::sqrt(std::max(t.diffusion(0, 0), 0.0) * dt);
  if (t.has_jumps()) {
    poisson_mean_ = t.jump_rate * dt;
    poisson_ = std::poisson_distribution<int>(poisson_mean_);
    for (const auto& j : t.jumps) {
      jump_vectors_.push_back(j.vector);
      jump_weights_.push_back(j.weight);
    }
    pick_jump_ = std::discrete_distribution<int>(jump_weights_.begin(), jump_weights_.end());
  }
}

void IncrementSampler::sample(Rng& rng, Eigen::Ref<Eigen::VectorXd> out) {
  out = mean_step_;
  if (has_gaussian_) {
    Eigen::VectorXd z(out.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal_(rng);
    out += factor_ * z;
  }
  if (poisson_mean_ > 0.0) {
    const int count = poisson_(rng);
    for (int c = 0; c < count; ++c) {
      const int which = jump_vectors_.size() == 1 ? 0 : pick_jump_(rng);
      out += jump_vectors_[which];
    }
  }
}

Eigen::VectorXd IncrementSampler::sample(Rng& rng) {
  Eigen::VectorXd out(mean_step_.size());
  sample(rng, out);
  return out;
}

double IncrementSampler::sample_scalar(Rng& rng) {
  double x = mean_step_(0);
  if (has_gaussian_) x += factor_(0, 0) * normal_(rng);
  if (poisson_mean_ > 0.0) {
    const int count = poisson_(rng);
    for (int c = 0; c < count; ++c) {
      const int which = jump_vectors_.size() == 1 ? 0 : pick_jump_(rng);
      x += jump_vectors_[which](0);
    }
  }
  return x;
}

Eigen::VectorXd sample_increment(const LevyTriplet& triplet, double dt, Rng& rng) {
  IncrementSampler sampler(triplet, dt);
  return sampler.sample(rng);
}

TestFunction::TestFunction(TimeGrid grid, Eigen::MatrixXd values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.cols() != static_cast<Eigen::Index>(grid_.nodes())) {
    throw InvalidInput("test function: value count does not match grid");
  }
  if (values_.rows() < 1) throw InvalidInput("test function: empty values");
  if (!values_.allFinite()) throw InvalidInput("test function: non-finite values");
}

Eigen::VectorXd TestFunction::at(double t) const {
  const double t_last = grid_.node(grid_.intervals());
  if (t < 0.0 || t > t_last) return Eigen::VectorXd::Zero(values_.rows());
  const double u = t / grid_.dt();
  const auto k = std::min(static_cast<std::size_t>(u), grid_.intervals());
  if (k == grid_.intervals()) return values_.col(k);
  const double w = u - static_cast<double>(k);
  if (w == 0.0) return values_.col(k);
  return (1.0 - w) * values_.col(k) + w * values_.col(k + 1);
}

std::complex<double> log_char_functional(const LevyTriplet& triplet, const TestFunction& f) {
  if (f.dim() != triplet.dim) {
    throw InvalidInput("char_functional: test function dimension does not match triplet");
  }
  const std::size_t last = f.grid().intervals();
  std::complex<double> sum = 0.5 * (psi(triplet, f.value(0)) + psi(triplet, f.value(last)));
  for (std::size_t k = 1; k < last; ++k) sum += psi(triplet, f.value(k));
  return sum * f.grid().dt();
}

std::complex<double> char_functional(const LevyTriplet& triplet, const TestFunction& f) {
  return std::exp(log_char_functional(triplet, f));
}

void to_json(nlohmann::json& j, const LevyTriplet& t) {
  j = nlohmann::json::object();
  j["dim"] = t.dim;
  j["drift"] = std::vector<double>(t.drift.data(), t.drift.data() + t.drift.size());
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < t.diffusion.rows(); ++r) {
    std::vector<double> row(t.diffusion.cols());
    for (Eigen::Index c = 0; c < t.diffusion.cols(); ++c) row[c] = t.diffusion(r, c);
    rows.push_back(row);
  }
  j["diffusion"] = rows;
  j["jump_rate"] = t.jump_rate;
  auto jumps = nlohmann::json::array();
  for (const auto& jp : t.jumps) {
    jumps.push_back({{"weight", jp.weight},
                     {"vector", std::vector<double>(jp.vector.data(),
                                                    jp.vector.data() + jp.vector.size())}});
  }
  j["jumps"] = jumps;
}

namespace {

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* what) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array()) throw InvalidInput(std::string("triplet json: ") + what + " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

void from_json(const nlohmann::json& j, LevyTriplet& t) {
  try {
    t.dim = j.at("dim").get<int>();
    t.drift = j.contains("drift") ? vector_from_json(j["drift"], "drift")
                                  : Eigen::VectorXd::Zero(t.dim);
    if (j.contains("diffusion")) {
      const auto& d = j["diffusion"];
      if (d.is_number()) {
        t.diffusion = Eigen::MatrixXd::Constant(1, 1, d.get<double>());
      } else {
        t.diffusion.resize(d.size(), d.empty() ? 0 : d[0].size());
        for (std::size_t r = 0; r < d.size(); ++r) {
          if (d[r].size() != static_cast<std::size_t>(t.diffusion.cols())) {
            throw InvalidInput("triplet json: ragged diffusion matrix");
          }
          for (std::size_t c = 0; c < d[r].size(); ++c) t.diffusion(r, c) = d[r][c].get<double>();
        }
      }
    } else {
      t.diffusion = Eigen::MatrixXd::Zero(t.dim, t.dim);
    }
    t.jump_rate = j.value("jump_rate", 0.0);
    t.jumps.clear();
    if (j.contains("jumps")) {
      for (const auto& jp : j["jumps"]) {
        t.jumps.push_back({jp.at("weight").get<double>(), vector_from_json(jp.at("vector"), "vector")});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("triplet json: ") + e.what());
  }
}

}  // namespace levy_ou
