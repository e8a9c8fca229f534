#pragma once

// Truncated Fock-space operators for one to three bosonic modes.
//
// Basis ordering: the first mode is the most significant index, so for
// dims = {d0, d1, d2} the state |n0, n1, n2> sits at n0*d1*d2 + n1*d2 + n2.
// Mode order is fixed as (CW, CCW[, mechanical]).

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nhblockade/error.hpp"

namespace nhblockade {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kCw = 0;
inline constexpr std::size_t kCcw = 1;
inline constexpr std::size_t kMechanical = 2;

class FockLayout {
 public:
  FockLayout() = default;

  explicit FockLayout(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw LayoutError("FockLayout needs at least one mode");
    for (auto d : dims_) {
      if (d < 2) throw LayoutError("every mode truncation must be >= 2, got " + std::to_string(d));
    }
    total_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>{});
  }

  FockLayout(std::initializer_list<std::size_t> dims) : FockLayout(std::vector<std::size_t>(dims)) {}

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t modes() const noexcept { return dims_.size(); }
  std::size_t total_dim() const noexcept { return total_; }
  std::size_t dim(std::size_t mode) const {
    check_mode(mode);
    return dims_[mode];
  }

  /// Flat index of |n_0, n_1, ...>.
  std::size_t index(std::span<const std::size_t> occupation) const {
    if (occupation.size() != dims_.size()) throw LayoutError("occupation tuple has wrong length");
    std::size_t idx = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (occupation[k] >= dims_[k]) throw LayoutError("occupation exceeds truncation");
      idx = idx * dims_[k] + occupation[k];
    }
    return idx;
  }
  std::size_t index(std::initializer_list<std::size_t> occupation) const {
    return index(std::span<const std::size_t>(occupation.begin(), occupation.size()));
  }

  /// Inverse of index().
  std::vector<std::size_t> occupation(std::size_t idx) const {
    std::vector<std::size_t> n(dims_.size());
    for (std::size_t k = dims_.size(); k-- > 0;) {
      n[k] = idx % dims_[k];
      idx /= dims_[k];
    }
    return n;
  }

  void check_mode(std::size_t mode) const {
    if (mode >= dims_.size()) {
      throw LayoutError("mode " + std::to_string(mode) + " out of range for " +
                        std::to_string(dims_.size()) + "-mode layout");
    }
  }

  friend bool operator==(const FockLayout&, const FockLayout&) = default;

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(dims_[k]);
    }
    return s + "]";
  }

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_ = 0;
};

/// Dense square matrix tagged with the Fock layout it acts on.
struct Operator {
  FockLayout layout;
  Matrix entries;

  Operator() = default;
  Operator(FockLayout l, Matrix m) : layout(std::move(l)), entries(std::move(m)) {
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    if (entries.rows() != n || entries.cols() != n) {
      throw LayoutError("operator matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    }
  }

  Complex operator()(std::size_t row, std::size_t col) const {
    return entries(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
};

namespace detail {

inline void require_same_layout(const Operator& a, const Operator& b, const char* op) {
  if (!(a.layout == b.layout)) {
    throw LayoutError(std::string(op) + ": layout mismatch " + a.layout.to_string() + " vs " +
                      b.layout.to_string());
  }
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Matrix single_mode_destroy(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

}  // namespace detail

inline Operator identity(const FockLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.total_dim());
  return {layout, Matrix::Identity(n, n)};
}

inline Operator zero(const FockLayout& layout) {
  const auto n = static_cast<Eigen::Index>(layout.total_dim());
  return {layout, Matrix::Zero(n, n)};
}

/// Place a single-mode matrix on `mode`, identity elsewhere.
inline Operator embed(const FockLayout& layout, std::size_t mode, const Matrix& single) {
  layout.check_mode(mode);
  const auto d = static_cast<Eigen::Index>(layout.dim(mode));
  if (single.rows() != d || single.cols() != d) throw LayoutError("embed: single-mode matrix has wrong size");
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t k = 0; k < layout.modes(); ++k) {
    const auto dk = static_cast<Eigen::Index>(layout.dims()[k]);
    out = detail::kron(out, k == mode ? single : Matrix::Identity(dk, dk));
  }
  return {layout, std::move(out)};
}

inline Operator destroy(const FockLayout& layout, std::size_t mode) {
  layout.check_mode(mode);
  return embed(layout, mode, detail::single_mode_destroy(layout.dim(mode)));
}

inline Operator create(const FockLayout& layout, std::size_t mode) {
  layout.check_mode(mode);
  return embed(layout, mode, detail::single_mode_destroy(layout.dim(mode)).adjoint());
}

inline Operator number(const FockLayout& layout, std::size_t mode) {
  layout.check_mode(mode);
  const auto d = static_cast<Eigen::Index>(layout.dim(mode));
  Matrix n = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return embed(layout, mode, n);
}

inline Operator compose(const Operator& a, const Operator& b) {
  detail::require_same_layout(a, b, "compose");
  return {a.layout, a.entries * b.entries};
}

inline Operator adjoint(const Operator& a) { return {a.layout, a.entries.adjoint()}; }

inline Operator add(const Operator& a, const Operator& b) {
  detail::require_same_layout(a, b, "add");
  return {a.layout, a.entries + b.entries};
}

inline Operator scale(const Operator& a, Complex c) { return {a.layout, c * a.entries}; }

/// Tensor product; the result's modes are a's modes followed by b's.
inline Operator kron(const Operator& a, const Operator& b) {
  auto dims = a.layout.dims();
  dims.insert(dims.end(), b.layout.dims().begin(), b.layout.dims().end());
  return {FockLayout(std::move(dims)), detail::kron(a.entries, b.entries)};
}

inline Operator operator*(const Operator& a, const Operator& b) { return compose(a, b); }
inline Operator operator+(const Operator& a, const Operator& b) { return add(a, b); }
inline Operator operator-(const Operator& a, const Operator& b) { return add(a, scale(b, -1.0)); }
inline Operator operator*(Complex c, const Operator& a) { return scale(a, c); }
inline Operator operator*(double c, const Operator& a) { return scale(a, c); }

/// Largest elementwise modulus of a - b.
inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace nhblockade
