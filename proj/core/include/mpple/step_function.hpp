#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mpple {

/// Right-continuous step function with value 0 before the first jump time.
/// Jump times are strictly increasing; values[g] is the function value on
/// [times[g], times[g+1]).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> times, std::vector<double> values)
      : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size()) {
      throw std::invalid_argument("StepFunction: times/values size mismatch");
    }
    for (std::size_t g = 1; g < times_.size(); ++g) {
      if (times_[g] <= times_[g - 1]) {
        throw std::invalid_argument("StepFunction: times not increasing");
      }
    }
  }

  /// Value at t (right-continuous).
  double operator()(double t) const {
    const auto idx = index_at(t);
    return idx < 0 ? 0.0 : values_[static_cast<std::size_t>(idx)];
  }

  /// Value at t-, i.e. just before t.
  double left_limit(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return 0.0;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
  }

  /// Index of the last jump time <= t, or -1 if t precedes all jumps.
  std::ptrdiff_t index_at(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return (it - times_.begin()) - 1;
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Sorted union of two strictly increasing time grids.
inline std::vector<double> merge_grids(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

}  // namespace mpple
