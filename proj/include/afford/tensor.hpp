#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "afford/error.hpp"
#include "afford/rng.hpp"

namespace afford {

// Dense row-major tensor of doubles. Gradient checking runs at this
// precision; checkpoints may narrow to 32-bit on disk.
class Tensor {
 public:
  Tensor() = default;

  // Validating constructor for external inputs: shape must match the value
  // count and every value must be finite.
  Tensor(std::vector<int> shape, std::vector<double> values)
      : shape_(std::move(shape)), v_(std::move(values)) {
    int64_t n = 1;
    for (int d : shape_) {
      if (d <= 0) throw NumericError("tensor dimension must be positive, got " + shape_str());
      n *= d;
    }
    if (n != static_cast<int64_t>(v_.size())) {
      throw NumericError("tensor shape " + shape_str() + " does not match " +
                         std::to_string(v_.size()) + " values");
    }
    for (double x : v_) {
      if (!std::isfinite(x)) throw NumericError("tensor value is not finite");
    }
  }

  static Tensor zeros(std::vector<int> shape) {
    Tensor t;
    t.shape_ = std::move(shape);
    int64_t n = 1;
    for (int d : t.shape_) n *= d;
    t.v_.assign(static_cast<size_t>(n), 0.0);
    return t;
  }

  static Tensor full(std::vector<int> shape, double value) {
    Tensor t = zeros(std::move(shape));
    t.fill(value);
    return t;
  }

  static Tensor glorot(int rows, int cols, Rng& rng) {
    Tensor t = zeros({rows, cols});
    double limit = std::sqrt(6.0 / (rows + cols));
    for (double& x : t.v_) x = rng.uniform(-limit, limit);
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int size() const { return static_cast<int>(v_.size()); }
  int rows() const { return shape_[0]; }
  int cols() const { return shape_[1]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  double& operator[](int i) { return v_[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v_[static_cast<size_t>(i)]; }
  double& at(int i, int j) { return v_[static_cast<size_t>(i) * cols() + j]; }
  double at(int i, int j) const { return v_[static_cast<size_t>(i) * cols() + j]; }

  // Row pointer for rank-2 tensors.
  double* row(int i) { return v_.data() + static_cast<size_t>(i) * cols(); }
  const double* row(int i) const { return v_.data() + static_cast<size_t>(i) * cols(); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const {
    for (double x : v_) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  }

  void fill(double value) {
    for (double& x : v_) x = value;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::fabs(x));
    return m;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "x" : "") << shape_[i];
    os << "]";
    return os.str();
  }

 private:
  std::vector<int> shape_;
  std::vector<double> v_;
};

}  // namespace afford
