#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mvub {

// Cloud of N equally weighted particles in R^d, stored row-major.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(int n, int dim) : dim_(dim), data_(static_cast<std::size_t>(n) * dim) {}

  // n copies of the same point.
  static EmpiricalMeasure filled(int n, std::span<const double> point);

  int size() const { return dim_ == 0 ? 0 : static_cast<int>(data_.size()) / dim_; }
  int dim() const { return dim_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> particle(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> particle(int i) {
    return {data_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

// Weighted atoms representing one replicate's estimator: evaluating a test
// function phi gives scale * sum_j w_j * phi(x_j). The stored weights keep
// the raw prefix-average telescope (their sum is exactly 1 for the base
// level with horizon index 0 and exactly 0 otherwise); the randomization
// factors 1/P_L(L) and 1/P_P(P) live in `scale` so that both the estimator
// value and the telescope structure stay exact.
class SignedEmpiricalMeasure {
 public:
  SignedEmpiricalMeasure() = default;
  explicit SignedEmpiricalMeasure(int dim, double scale = 1.0) : dim_(dim), scale_(scale) {}

  void reserve(std::size_t n);
  void add_atom(std::span<const double> point, double weight);

  double evaluate(const std::function<double(std::span<const double>)>& phi) const;

  // Sum of raw atom weights (randomization scale excluded).
  double telescope_mass() const;
  // Signed mass of the measure, scale included.
  double total_mass() const { return scale_ * telescope_mass(); }

  double scale() const { return scale_; }
  void rescale(double factor) { scale_ *= factor; }

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t j) const {
    return {points_.data() + j * dim_, static_cast<std::size_t>(dim_)};
  }
  double weight(std::size_t j) const { return weights_[j]; }
  double effective_weight(std::size_t j) const { return scale_ * weights_[j]; }

 private:
  int dim_ = 0;
  double scale_ = 1.0;
  std::vector<double> points_;
  std::vector<double> weights_;
};

}  // namespace mvub
