#include "levy_ou/time_grid.hpp"

#include <cmath>
#include <string>

#include "levy_ou/errors.hpp"

namespace levy_ou {

namespace {

void check_end(double t_end) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw InvalidInput("time grid: t_end must be positive and finite");
  }
}

}  // namespace

TimeGrid TimeGrid::lattice(int n, double t_end) {
  if (n < 1) throw InvalidInput("time grid: lattice scale n must be >= 1");
  return with_step(1.0 / n, t_end);
}

TimeGrid TimeGrid::uniform(double t_end, std::size_t intervals) {
  check_end(t_end);
  if (intervals == 0) throw InvalidInput("time grid: need at least one interval");
  return TimeGrid(t_end / static_cast<double>(intervals), t_end, intervals);
}

TimeGrid TimeGrid::with_step(double dt, double t_end) {
  check_end(t_end);
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidInput("time grid: dt must be positive");
  }
  const double k = std::round(t_end / dt);
  if (k < 1.0 || std::abs(k * dt - t_end) > 1e-12 * std::max(1.0, t_end)) {
    throw InvalidInput("time grid: t_end = " + std::to_string(t_end) +
                       " is not a multiple of dt = " + std::to_string(dt));
  }
  return TimeGrid(dt, t_end, static_cast<std::size_t>(k));
}

std::optional<std::size_t> TimeGrid::index_of(double t) const {
  const double k = std::round(t / dt_);
  if (k < 0.0 || k > static_cast<double>(intervals_)) return std::nullopt;
  if (std::abs(k * dt_ - t) > 1e-9 * dt_) return std::nullopt;
  return static_cast<std::size_t>(k);
}

}  // namespace levy_ou
