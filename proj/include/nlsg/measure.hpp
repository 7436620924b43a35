#pragma once
// Weighted discrete measure spaces and the L^q algebra on them.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlsg/index.hpp"

namespace nlsg {

/// Finite measure space {0..n-1} with node weights mu_i > 0.
class DiscreteSpace {
 public:
  explicit DiscreteSpace(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw DomainError("DiscreteSpace: at least one node required");
    for (double w : weights_)
      if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("DiscreteSpace: weights must be finite and > 0");
  }

  static std::shared_ptr<const DiscreteSpace> uniform(std::size_t n, double weight) {
    return std::make_shared<const DiscreteSpace>(std::vector<double>(n, weight));
  }

  std::size_t size() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  double total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

  bool same_as(const DiscreteSpace& other) const { return this == &other || weights_ == other.weights_; }

 private:
  std::vector<double> weights_;
};

using SpacePtr = std::shared_ptr<const DiscreteSpace>;

/// A function on a DiscreteSpace. Value type; copies share the space.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(SpacePtr space) : space_(std::move(space)), values_(space_->size(), 0.0) {}
  GridFunction(SpacePtr space, std::vector<double> values) : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw DomainError("GridFunction: null space");
    if (values_.size() != space_->size())
      throw DomainError("GridFunction: " + std::to_string(values_.size()) + " values for a space of " +
                        std::to_string(space_->size()) + " nodes");
    for (double v : values_)
      if (!std::isfinite(v)) throw DomainError("GridFunction: non-finite value");
  }

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  GridFunction& operator+=(const GridFunction& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  GridFunction& operator*=(double a) {
    for (double& v : values_) v *= a;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double a, GridFunction u) { return u *= a; }
  friend GridFunction operator-(GridFunction u) { return u *= -1.0; }

  void check_compatible(const GridFunction& o) const {
    if (!space_ || !o.space_ || !space_->same_as(*o.space_))
      throw DomainError("GridFunction: operands live on different spaces");
  }

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

/// (sum_i mu_i |u_i|^q)^{1/q}, or max_i |u_i| for q = inf.
inline double lq_norm(const GridFunction& u, LebesgueIndex q) {
  const auto v = u.values();
  if (q.is_infinite()) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  const double qq = q.value();
  const auto w = u.space()->weights();
  if (qq == 1.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::abs(v[i]);
    return s;
  }
  if (qq == 2.0) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i] * v[i];
    return std::sqrt(s);
  }
  // scale by the max to keep |u|^q in range
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::pow(std::abs(v[i]) / m, qq);
  return m * std::pow(s, 1.0 / qq);
}

inline double lq_norm(const GridFunction& u, double q) { return lq_norm(u, LebesgueIndex::finite(q)); }

/// sum_i mu_i u_i
inline double integral(const GridFunction& u) {
  const auto v = u.values();
  const auto w = u.space()->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
  return s;
}

/// sum_i mu_i u_i v_i
inline double inner(const GridFunction& u, const GridFunction& v) {
  u.check_compatible(v);
  const auto w = u.space()->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i] * v[i];
  return s;
}

/// Right directional derivative of (1/q)||.||_q^q at u in direction v.
///   q > 1 : sum mu_i |u_i|^{q-2} u_i v_i
///   q = 1 : sum_{u_i != 0} mu_i sign(u_i) v_i + sum_{u_i == 0} mu_i |v_i|
/// "u_i == 0" is an exact comparison.
inline double q_bracket(const GridFunction& u, const GridFunction& v, LebesgueIndex q) {
  if (q.is_infinite()) throw DomainError("q_bracket: q = inf is not supported");
  u.check_compatible(v);
  const double qq = q.value();
  const auto w = u.space()->weights();
  double s = 0.0;
  if (qq == 1.0) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] == 0.0)
        s += w[i] * std::abs(v[i]);
      else
        s += w[i] * (u[i] > 0.0 ? v[i] : -v[i]);
    }
    return s;
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0.0) continue;
    s += w[i] * std::pow(std::abs(u[i]), qq - 2.0) * u[i] * v[i];
  }
  return s;
}

inline double q_bracket(const GridFunction& u, const GridFunction& v, double q) {
  return q_bracket(u, v, LebesgueIndex::finite(q));
}

template <class F>
GridFunction pointwise(const GridFunction& u, F&& f) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = f(u[i]);
  return GridFunction(u.space(), std::move(out));
}

template <class F>
GridFunction pointwise(const GridFunction& u, const GridFunction& v, F&& f) {
  u.check_compatible(v);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = f(u[i], v[i]);
  return GridFunction(u.space(), std::move(out));
}

inline GridFunction positive_part(const GridFunction& u) {
  return pointwise(u, [](double x) { return std::max(x, 0.0); });
}
inline GridFunction negative_part(const GridFunction& u) {
  return pointwise(u, [](double x) { return std::max(-x, 0.0); });
}
inline GridFunction abs_value(const GridFunction& u) {
  return pointwise(u, [](double x) { return std::abs(x); });
}
/// u v v (pointwise max)
inline GridFunction lattice_max(const GridFunction& u, const GridFunction& v) {
  return pointwise(u, v, [](double a, double b) { return std::max(a, b); });
}
/// u ^ v (pointwise min)
inline GridFunction lattice_min(const GridFunction& u, const GridFunction& v) {
  return pointwise(u, v, [](double a, double b) { return std::min(a, b); });
}

}  // namespace nlsg
