#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace urban {

// Dense row-major tensor of 64-bit floats. Value semantics; every trainable
// module stores its state in these.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double value);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  // Rank-2 helpers.
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& at(std::size_t i) { return values_[i]; }
  double at(std::size_t i) const { return values_[i]; }
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j, std::size_t k);
  double at(std::size_t i, std::size_t j, std::size_t k) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  Tensor reshaped(std::vector<std::size_t> shape) const;

  std::string shape_string() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// --- numeric kernels shared by the autodiff layer and plain callers ---

// c += a * b  (rank-2)
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c);
// c += a * b^T
void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c);
// c += a^T * b
void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c);
Tensor matmul(const Tensor& a, const Tensor& b);

void axpy(double alpha, const Tensor& src, Tensor& dst);

// Row-wise softmax with max subtraction; rejects non-finite input.
Tensor softmax_rows(const Tensor& x);

// KL(N(mu, diag(sigma^2)) || N(0, I)) = 1/2 sum(mu^2 + sigma^2 - ln sigma^2 - 1).
// Rejects nonpositive sigma.
double diag_gaussian_kl(const Tensor& mu, const Tensor& sigma);

}  // namespace urban
