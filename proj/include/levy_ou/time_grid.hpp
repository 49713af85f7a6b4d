#pragma once

#include <cstddef>
#include <optional>

namespace levy_ou {

/// Uniform time grid t_k = k * dt, k = 0..K, covering [0, t_end].
class TimeGrid {
 public:
  /// Lattice of spacing 1/n. Throws InvalidInput if n * t_end is not an integer.
  static TimeGrid lattice(int n, double t_end);
  /// `intervals` equal cells on [0, t_end].
  static TimeGrid uniform(double t_end, std::size_t intervals);
  /// Grid with spacing dt; t_end must be a multiple of dt to within 1e-12.
  static TimeGrid with_step(double dt, double t_end);

  double dt() const { return dt_; }
  double t_end() const { return t_end_; }
  std::size_t intervals() const { return intervals_; }
  std::size_t nodes() const { return intervals_ + 1; }
  double node(std::size_t k) const { return static_cast<double>(k) * dt_; }

  /// Index of the node equal to t (relative tolerance 1e-9 of dt), if any.
  std::optional<std::size_t> index_of(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  TimeGrid(double dt, double t_end, std::size_t intervals)
      : dt_(dt), t_end_(t_end), intervals_(intervals) {}

  double dt_;
  double t_end_;
  std::size_t intervals_;
};

}  // namespace levy_ou
