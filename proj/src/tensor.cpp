#include "urbanplan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace urban {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(shape_product(shape_), 0.0) {
  for (std::size_t d : shape_) {
    if (d == 0) throw std::invalid_argument("Tensor: zero extent");
  }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_product(shape_)) {
    throw std::invalid_argument("Tensor: value count does not match shape");
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  return Tensor(std::move(shape));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.values_.begin(), t.values_.end(), value);
  return t;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw std::out_of_range("Tensor::dim");
  return shape_[axis];
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw std::logic_error("Tensor::rows: rank != 2");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw std::logic_error("Tensor::cols: rank != 2");
  return shape_[1];
}

double& Tensor::at(std::size_t i, std::size_t j) {
  return values_[i * shape_[1] + j];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  return values_[i * shape_[1] + j];
}

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
  return values_[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  return values_[(i * shape_[1] + j) * shape_[2] + k];
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const {
  if (shape_product(shape) != values_.size()) {
    throw std::invalid_argument("Tensor::reshaped: size mismatch");
  }
  return Tensor(std::move(shape), values_);
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ')';
  return os.str();
}

void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t r = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k || c.rows() != r || c.cols() != n) {
    throw std::invalid_argument("matmul_acc: shape mismatch " + a.shape_string() +
                                " * " + b.shape_string());
  }
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = pa[i * k + kk];
      if (av == 0.0) continue;
      const double* brow = pb + kk * n;
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  // c(r x m) += a(r x k) * b(m x k)^T
  const std::size_t r = a.rows(), k = a.cols(), m = b.rows();
  if (b.cols() != k || c.rows() != r || c.cols() != m) {
    throw std::invalid_argument("matmul_nt_acc: shape mismatch");
  }
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double* arow = pa + i * k;
      const double* brow = pb + j * k;
      double acc = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      pc[i * m + j] += acc;
    }
  }
}

void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  // c(k x n) += a(r x k)^T * b(r x n)
  const std::size_t r = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != r || c.rows() != k || c.cols() != n) {
    throw std::invalid_argument("matmul_tn_acc: shape mismatch");
  }
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* brow = pb + i * n;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = pa[i * k + kk];
      if (av == 0.0) continue;
      double* crow = pc + kk * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor c({a.rows(), b.cols()});
  matmul_acc(a, b, c);
  return c;
}

void axpy(double alpha, const Tensor& src, Tensor& dst) {
  if (!src.same_shape(dst)) throw std::invalid_argument("axpy: shape mismatch");
  const double* ps = src.data();
  double* pd = dst.data();
  const std::size_t n = src.size();
  for (std::size_t i = 0; i < n; ++i) pd[i] += alpha * ps[i];
}

Tensor softmax_rows(const Tensor& x) {
  if (x.rank() != 2) throw std::invalid_argument("softmax_rows: rank != 2");
  if (!x.all_finite()) throw std::invalid_argument("softmax_rows: non-finite input");
  const std::size_t r = x.rows(), d = x.cols();
  Tensor y({r, d});
  for (std::size_t i = 0; i < r; ++i) {
    double m = x.at(i, 0);
    for (std::size_t j = 1; j < d; ++j) m = std::max(m, x.at(i, j));
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double e = std::exp(x.at(i, j) - m);
      y.at(i, j) = e;
      total += e;
    }
    for (std::size_t j = 0; j < d; ++j) y.at(i, j) /= total;
  }
  return y;
}

double diag_gaussian_kl(const Tensor& mu, const Tensor& sigma) {
  if (!mu.same_shape(sigma)) {
    throw std::invalid_argument("diag_gaussian_kl: shape mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double s = sigma.at(i);
    if (!(s > 0.0)) throw std::invalid_argument("diag_gaussian_kl: sigma <= 0");
    const double m = mu.at(i);
    total += m * m + s * s - std::log(s * s) - 1.0;
  }
  return 0.5 * total;
}

}  // namespace urban
