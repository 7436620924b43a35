#pragma once
// Nonlinear resolvent J_lambda: solve u + lambda (A phi(u) + F(u)) = g.
//
// Damped Newton with Armijo backtracking on the weighted l2 residual, or on
// the convex energy when the equation has one. For p < 2 and fast diffusion
// the lagged-coefficient (Picard) step competes with the Newton step.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlsg/linalg.hpp"
#include "nlsg/operators.hpp"

namespace nlsg {

class PreconditionViolated : public DomainError {
 public:
  using DomainError::DomainError;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(double residual, int iterations, long step = -1, double time = NAN)
      : std::runtime_error(message(residual, iterations, step, time)),
        residual(residual),
        iterations(iterations),
        step(step),
        time(time) {}

  double residual;
  int iterations;
  long step;    // failing step of an iterated resolvent, -1 if not applicable
  double time;  // time of the failing step, NaN if not applicable

 private:
  static std::string message(double residual, int iterations, long step, double time) {
    std::string m = "resolvent did not converge: residual " + std::to_string(residual) + " after " +
                    std::to_string(iterations) + " iterations";
    if (step >= 0) m += " (step " + std::to_string(step);
    if (step >= 0 && std::isfinite(time)) m += ", t = " + std::to_string(time);
    if (step >= 0) m += ")";
    return m;
  }
};

struct ResolventQuery {
  OperatorSpec spec;
  double lambda = 1.0;
  GridFunction g;
  double tol = 1e-10;
  int max_iter = 200;
};

struct ResolventResult {
  GridFunction u;
  double residual = NAN;
  int iterations = 0;
  int fallback_steps = 0;
  bool converged = false;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 200;
  int max_backtracks = 40;
  double armijo = 1e-4;
  double linear_tol = 1e-12;
};

/// Reusable solver for one operator; solve() is const and thread-safe.
class ResolventSolver {
 public:
  explicit ResolventSolver(OperatorSpec spec, SolverOptions opts = {}) : op_(std::move(spec)), opts_(opts) {}

  const DiscreteOperator& op() const { return op_; }
  const SolverOptions& options() const { return opts_; }

  ResolventResult solve(double lambda, const GridFunction& g) const {
    check_lambda(lambda);
    op_.check(g);
    const std::size_t n = op_.size();
    const auto mu = g.space()->weights();
    const auto gv = g.values();
    const auto& phi = op_.spec().phi;

    // phi = |u|^{m-1} u with m < 1 has phi'(0) = inf; iterate on w = phi(u)
    // instead, where u = |w|^{1/m-1} w is smooth
    const bool dual = phi.kind == PhiSpec::Kind::Power && phi.m < 1.0;
    // without F the equation is the gradient equation of a convex energy,
    // which gives a second merit function
    const bool variational = !op_.spec().perturbation && (phi.is_identity() || dual);
    // for p < 2 the full Newton step overshoots where the flux is steep, so
    // the Picard step is tried as well and the better one kept
    const bool singular = op_.spec().p < 2.0 || dual;

    std::vector<double> v(n), r(n), delta(n);
    if (dual)
      op_.compose_phi(gv, v);
    else
      std::copy(gv.begin(), gv.end(), v.begin());
    double res = residual(lambda, v, gv, mu, dual, r);

    struct Candidate {
      std::vector<double> v, r;
      double res = INFINITY, merit = INFINITY;
    };
    Candidate cand[2];
    for (auto& c : cand) {
      c.v.resize(n);
      c.r.resize(n);
    }

    ResolventResult out;
    int it = 0;
    while (res > opts_.tol && it < opts_.max_iter) {
      ++it;
      const double e0 = variational ? energy(lambda, v, gv, mu, dual) : 0.0;
      int best = -1;
      for (int pi = 0; pi < 2; ++pi) {
        if (pi == 1 && best == 0 && !singular) break;
        Candidate& c = cand[pi];
        c.res = c.merit = INFINITY;
        if (!newton_direction(lambda, v, r, pi == 1, dual, delta)) continue;
        double slope = 0.0;  // dE/dt at t = 0
        for (std::size_t k = 0; k < n; ++k) slope += mu[k] * r[k] * delta[k];
        double t = 1.0;
        for (int bt = 0; bt <= opts_.max_backtracks; ++bt, t *= 0.5) {
          for (std::size_t k = 0; k < n; ++k) c.v[k] = v[k] + t * delta[k];
          const double rt = residual(lambda, c.v, gv, mu, dual, c.r);
          if (!std::isfinite(rt)) continue;
          const double et = variational ? energy(lambda, c.v, gv, mu, dual) : rt;
          const bool by_residual = rt <= (1.0 - opts_.armijo * t) * res;
          const bool by_energy = variational && slope < 0.0 && et <= e0 + opts_.armijo * t * slope;
          if (by_residual || by_energy) {
            c.res = rt;
            c.merit = et;
            break;
          }
        }
        if (!std::isfinite(c.res)) continue;
        if (best < 0 || c.merit < cand[best].merit) best = pi;
      }
      if (best < 0) break;
      if (best == 1) ++out.fallback_steps;
      v.swap(cand[best].v);
      r.swap(cand[best].r);
      res = cand[best].res;
    }
    if (dual)
      for (auto& x : v) x = from_phi(x);
    out.u = GridFunction(g.space(), std::move(v));
    out.residual = res;
    out.iterations = it;
    out.converged = res <= opts_.tol;
    return out;
  }

  /// Throws NonConvergence instead of returning an unconverged result.
  GridFunction apply(double lambda, const GridFunction& g) const {
    auto res = solve(lambda, g);
    if (!res.converged) throw NonConvergence(res.residual, res.iterations);
    return std::move(res.u);
  }

 private:
  void check_lambda(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("resolvent: lambda must be > 0");
    const double L = op_.spec().lipschitz();
    if (lambda * L >= 1.0)
      throw PreconditionViolated("resolvent: lambda * L = " + std::to_string(lambda * L) + " >= 1");
  }

  // u = phi^{-1}(w) for phi = |u|^{m-1} u
  double from_phi(double w) const {
    return w == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(w), 1.0 / op_.spec().phi.m), w);
  }
  double from_phi_derivative(double w) const {
    const double e = 1.0 / op_.spec().phi.m;
    return e * std::pow(std::abs(w), e - 1.0);
  }

  // v is u, or w = phi(u) when dual
  double residual(double lambda, std::span<const double> v, std::span<const double> g, std::span<const double> mu,
                  bool dual, std::span<double> r) const {
    const std::size_t n = v.size();
    if (dual) {
      std::vector<double> u(n), f(n);
      for (std::size_t k = 0; k < n; ++k) u[k] = from_phi(v[k]);
      op_.diffusion(v, r);
      op_.perturbation_value(u, f);
      for (std::size_t k = 0; k < n; ++k) r[k] = u[k] + lambda * (r[k] + f[k]) - g[k];
    } else {
      op_.apply(v, r);
      for (std::size_t k = 0; k < n; ++k) r[k] = v[k] + lambda * r[k] - g[k];
    }
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += mu[k] * r[k] * r[k];
    return std::sqrt(s);
  }

  // identity phi: 1/2 ||u - g||^2 + lambda Psi(u);
  // dual: sum mu (m/(m+1) |w|^{1/m+1} - g w) + lambda Psi(w)
  double energy(double lambda, std::span<const double> v, std::span<const double> g, std::span<const double> mu,
                bool dual) const {
    double e = 0.0;
    if (dual) {
      const double m = op_.spec().phi.m;
      for (std::size_t k = 0; k < v.size(); ++k)
        e += mu[k] * (m / (m + 1.0) * std::pow(std::abs(v[k]), 1.0 / m + 1.0) - g[k] * v[k]);
    } else {
      for (std::size_t k = 0; k < v.size(); ++k) e += 0.5 * mu[k] * (v[k] - g[k]) * (v[k] - g[k]);
    }
    return e + lambda * op_.energy_of(v);
  }

  bool newton_direction(double lambda, std::span<const double> v, std::span<const double> r, bool picard, bool dual,
                        std::span<double> delta) const {
    const std::size_t n = v.size();
    std::vector<double> w(n), u(n), col(n), df(n), diag(n), rhs(n);
    if (dual) {
      std::copy(v.begin(), v.end(), w.begin());
      for (std::size_t k = 0; k < n; ++k) u[k] = from_phi(v[k]);
      std::fill(col.begin(), col.end(), 1.0);
      op_.perturbation_derivative(u, df);
      for (std::size_t k = 0; k < n; ++k) diag[k] = from_phi_derivative(v[k]) * (1.0 + lambda * df[k]);
    } else {
      op_.compose_phi(v, w);
      op_.phi_derivative(v, col);
      op_.perturbation_derivative(v, df);
      for (std::size_t k = 0; k < n; ++k) diag[k] = 1.0 + lambda * df[k];
    }
    for (std::size_t k = 0; k < n; ++k) rhs[k] = -r[k];

    if (op_.grid().dim() == 1) {
      linalg::Tridiagonal jac(n);
      for (std::size_t k = 0; k < n; ++k) jac.diag[k] = diag[k];
      op_.add_diffusion_jacobian(w, col, lambda, picard, jac);
      return linalg::solve_tridiagonal(jac, rhs, delta);
    }
    linalg::SparseMatrix jac(n);
    for (std::size_t k = 0; k < n; ++k) jac.add(k, k, diag[k]);
    op_.add_diffusion_jacobian(w, col, lambda, picard, jac);
    jac.finalize();
    std::fill(delta.begin(), delta.end(), 0.0);
    const bool symmetric = op_.spec().phi.is_identity() || (dual && !op_.spec().perturbation);
    const auto kr = symmetric ? linalg::conjugate_gradient(jac, rhs, delta, opts_.linear_tol)
                              : linalg::bicgstab(jac, rhs, delta, opts_.linear_tol);
    if (!kr.converged) return false;
    for (double d : delta)
      if (!std::isfinite(d)) return false;
    return true;
  }

  DiscreteOperator op_;
  SolverOptions opts_;
};

/// One implicit step. Unconverged solves are returned with converged = false;
/// lambda L >= 1 throws PreconditionViolated.
inline ResolventResult solve_resolvent(const ResolventQuery& q) {
  SolverOptions opts;
  opts.tol = q.tol;
  opts.max_iter = q.max_iter;
  return ResolventSolver(q.spec, opts).solve(q.lambda, q.g);
}

/// J_lambda^n g. Throws NonConvergence carrying the failing step index (1-based).
inline GridFunction resolvent_power(const ResolventSolver& solver, double lambda, const GridFunction& g, int n) {
  if (n < 0) throw DomainError("resolvent_power: n must be >= 0");
  GridFunction u = g;
  for (int i = 1; i <= n; ++i) {
    auto res = solver.solve(lambda, u);
    if (!res.converged) throw NonConvergence(res.residual, res.iterations, i, i * lambda);
    u = std::move(res.u);
  }
  return u;
}

inline GridFunction resolvent_power(const OperatorSpec& spec, double lambda, const GridFunction& g, int n) {
  return resolvent_power(ResolventSolver(spec), lambda, g, n);
}

}  // namespace nlsg
