#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace csmooth {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when inputs violate a documented precondition (shapes, ranges).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation produces non-finite values or a factorization
/// fails.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver produced a non-finite iterate.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : NumericError(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// A dense reference solve was refused because it would not fit in memory.
class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value that is either shared by every time step or given per step.
template <class T>
class PerStep {
 public:
  PerStep() = default;
  PerStep(T shared) : values_{std::move(shared)} {}  // NOLINT(google-explicit-constructor)
  explicit PerStep(std::vector<T> values) : values_(std::move(values)) {}

  const T& operator[](std::size_t t) const {
    return values_.size() == 1 ? values_.front() : values_[t];
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool shared() const noexcept { return values_.size() == 1; }
  bool empty() const noexcept { return values_.empty(); }
  const std::vector<T>& values() const noexcept { return values_; }

  /// True when the container can answer for steps [0, steps).
  bool covers(std::size_t steps) const noexcept {
    return shared() || values_.size() == steps;
  }

 private:
  std::vector<T> values_;
};

/// A sequence of equally sized vectors, one per time step, stored as the
/// columns of a matrix. Steps are 0-based.
template <class Tag>
class StepSeries {
 public:
  StepSeries() = default;
  StepSeries(std::size_t steps, std::size_t dim) : data_(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(steps))) {}
  explicit StepSeries(Matrix columns) : data_(std::move(columns)) {}

  static StepSeries from_steps(const std::vector<Vector>& steps) {
    if (steps.empty()) return {};
    StepSeries out(steps.size(), static_cast<std::size_t>(steps.front().size()));
    for (std::size_t t = 0; t < steps.size(); ++t) {
      if (steps[t].size() != steps.front().size()) {
        throw ContractError("StepSeries: ragged step vectors");
      }
      out[t] = steps[t];
    }
    return out;
  }

  std::size_t steps() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.rows()); }

  auto operator[](std::size_t t) { return data_.col(static_cast<Eigen::Index>(t)); }
  auto operator[](std::size_t t) const { return data_.col(static_cast<Eigen::Index>(t)); }

  const Matrix& matrix() const noexcept { return data_; }
  Matrix& matrix() noexcept { return data_; }

  bool all_finite() const { return data_.allFinite(); }

  /// Largest absolute entrywise difference; shapes must agree.
  double max_abs_diff(const StepSeries& other) const {
    if (other.data_.rows() != data_.rows() || other.data_.cols() != data_.cols()) {
      throw ContractError("StepSeries: shape mismatch in max_abs_diff");
    }
    if (data_.size() == 0) return 0.0;
    return (data_ - other.data_).cwiseAbs().maxCoeff();
  }

 private:
  Matrix data_;
};

struct StateTag {};
struct MeasurementTag {};

using Trajectory = StepSeries<StateTag>;
using MeasurementSequence = StepSeries<MeasurementTag>;

/// Replaces P by (P + P^T) / 2 in place.
inline void symmetrize(Eigen::Ref<Matrix> p) {
  p = (0.5 * (p + p.transpose())).eval();
}

}  // namespace csmooth
