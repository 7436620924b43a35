#pragma once
// Small sparse linear algebra kernel for the Newton steps of the resolvent.

#include <algorithm>
#include <cmath>
#include <span>
#include <tuple>
#include <vector>

#include "nlsg/index.hpp"

namespace nlsg::linalg {

struct Tridiagonal {
  std::vector<double> lower;  // lower[i] couples row i to column i-1 (lower[0] unused)
  std::vector<double> diag;
  std::vector<double> upper;  // upper[i] couples row i to column i+1 (upper[n-1] unused)

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const { return diag.size(); }

  void add(std::size_t row, std::size_t col, double v) {
    if (col == row)
      diag[row] += v;
    else if (col + 1 == row)
      lower[row] += v;
    else if (col == row + 1)
      upper[row] += v;
    else
      throw DomainError("Tridiagonal::add: entry outside the band");
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += lower[i] * x[i - 1];
      if (i + 1 < n) s += upper[i] * x[i + 1];
      y[i] = s;
    }
  }
};

/// Thomas algorithm without pivoting. Returns false on a zero/non-finite pivot.
inline bool solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs, std::span<double> x) {
  const std::size_t n = a.size();
  if (n == 0) return true;
  std::vector<double> c(n), d(n);
  double piv = a.diag[0];
  if (piv == 0.0 || !std::isfinite(piv)) return false;
  c[0] = n > 1 ? a.upper[0] / piv : 0.0;
  d[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = a.diag[i] - a.lower[i] * c[i - 1];
    if (piv == 0.0 || !std::isfinite(piv)) return false;
    c[i] = i + 1 < n ? a.upper[i] / piv : 0.0;
    d[i] = (rhs[i] - a.lower[i] * d[i - 1]) / piv;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

/// Compressed sparse row matrix assembled from triplets; duplicates are summed.
class SparseMatrix {
 public:
  explicit SparseMatrix(std::size_t n = 0) : n_(n) {}

  void add(std::size_t row, std::size_t col, double v) { triplets_.emplace_back(row, col, v); }

  void finalize() {
    std::sort(triplets_.begin(), triplets_.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    row_ptr_.assign(n_ + 1, 0);
    cols_.clear();
    vals_.clear();
    for (std::size_t k = 0; k < triplets_.size();) {
      const auto [r, c, v0] = triplets_[k];
      double v = v0;
      std::size_t j = k + 1;
      while (j < triplets_.size() && std::get<0>(triplets_[j]) == r && std::get<1>(triplets_[j]) == c)
        v += std::get<2>(triplets_[j++]);
      cols_.push_back(c);
      vals_.push_back(v);
      ++row_ptr_[r + 1];
      k = j;
    }
    for (std::size_t i = 0; i < n_; ++i) row_ptr_[i + 1] += row_ptr_[i];
    triplets_.clear();
  }

  std::size_t size() const { return n_; }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
      y[i] = s;
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        if (cols_[k] == i) d[i] = vals_[k];
    return d;
  }

 private:
  std::size_t n_;
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

struct KrylovResult {
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0.0;
};

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite A.
inline KrylovResult conjugate_gradient(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                                       double rel_tol = 1e-12, int max_iter = 5000) {
  using detail::dot;
  const std::size_t n = a.size();
  const auto diag = a.diagonal();
  std::vector<double> r(n), z(n), p(n), ap(n);
  a.multiply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  const double bnorm = std::sqrt(dot(b, b));
  KrylovResult res;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = diag[i] != 0.0 ? r[i] / diag[i] : r[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      res.iterations = it;
      return res;
    }
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = diag[i] != 0.0 ? r[i] / diag[i] : r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    res.iterations = it + 1;
  }
  res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
  res.converged = res.relative_residual <= rel_tol;
  return res;
}

/// Jacobi-preconditioned BiCGSTAB for general nonsingular A.
inline KrylovResult bicgstab(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                             double rel_tol = 1e-12, int max_iter = 5000) {
  using detail::dot;
  const std::size_t n = a.size();
  const auto diag = a.diagonal();
  auto precond = [&](std::span<const double> in, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = diag[i] != 0.0 ? in[i] / diag[i] : in[i];
  };
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
  a.multiply(x, t);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
  r0 = r;
  const double bnorm = std::sqrt(dot(b, b));
  KrylovResult res;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
    res.iterations = it;
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      return res;
    }
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0 || omega == 0.0) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    precond(p, phat);
    a.multiply(phat, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) break;
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    precond(s, shat);
    a.multiply(shat, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    }
  }
  res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
  res.converged = res.relative_residual <= rel_tol;
  return res;
}

}  // namespace nlsg::linalg
