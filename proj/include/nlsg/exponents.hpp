#pragma once
// Closed-form smoothing exponents for semigroups generated by operators
// satisfying Gagliardo-Nirenberg type inequalities, together with the
// extrapolation and iteration machinery that produces L^s-L^infty rates.
//
// Every function here is pure. Violated theorem side conditions do not
// throw; they come back as a result with valid == false and the offending
// condition named in `conditions`. Arguments outside the mathematical
// domain of a formula (sigma <= 0, kappa <= 1, m <= 0, ...) throw DomainError.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlsg/index.hpp"

namespace nlsg {

struct Condition {
  std::string name;
  bool holds;
};
using Conditions = std::vector<Condition>;

inline bool all_hold(const Conditions& cs) {
  for (const auto& c : cs)
    if (!c.holds) return false;
  return true;
}

inline std::string first_failed(const Conditions& cs) {
  for (const auto& c : cs)
    if (!c.holds) return c.name;
  return {};
}

/// Parameters (q, r, sigma, rho, omega, C) of
///   ||u - v||_r^sigma <= C ([u - v, Au - Av]_q + omega ||u - v||_q^q) ||u - v||_q^rho.
struct GNParams {
  double q = 2.0;
  LebesgueIndex r = LebesgueIndex::finite(2.0);
  double sigma = 2.0;
  double rho = 0.0;
  double omega = 0.0;
  double c = 1.0;

  void validate() const {
    if (!std::isfinite(q) || q < 1.0) throw DomainError("GNParams: q must be finite and >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("GNParams: sigma must be > 0");
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("GNParams: rho must be >= 0");
    if (!(omega >= 0.0)) throw DomainError("GNParams: omega must be >= 0");
    if (!(c > 0.0)) throw DomainError("GNParams: C must be > 0");
  }
};

/// t^{-alpha} e^{omega beta t} ||.||^gamma
struct ExponentTriple {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct StarExponents {
  double alpha_star = NAN;
  double beta_star = NAN;
  double gamma_star = NAN;
  double m0 = NAN;
  bool valid = false;
  Conditions conditions;
};

/// L^s-L^r (usually r = infinity) exponents reached after extrapolation.
struct SExponents {
  std::string case_label;
  double s = NAN;
  double alpha_s = NAN;
  double beta_s = NAN;
  double gamma_s = NAN;
  double theta_s = NAN;
  /// Amplified constant, only for extrapolate_to_s.
  std::optional<double> constant;
  /// Intermediate L^{s_max}-L^infty exponents when the route has one.
  std::optional<ExponentTriple> star;
  bool valid = false;
  Conditions conditions;

  std::string failed_condition() const { return first_failed(conditions); }
};

struct IterationSequence {
  std::vector<double> values;       // recursion
  std::vector<double> closed_form;  // explicit formula
  bool monotone = false;            // strictly increasing iff the seed condition holds
  double limit_ratio = NAN;         // lim values[k] / kappa^k
};

enum class BoundaryKind { Dirichlet, Neumann, Robin };

inline std::string to_string(BoundaryKind bc) {
  switch (bc) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::Neumann: return "neumann";
    case BoundaryKind::Robin: return "robin";
  }
  return "?";
}

namespace detail {

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

/// alpha_s = a/(1-g(1-f)), beta_s = (b/2+g f)/(1-g(1-f)), gamma_s = g f/(1-g(1-f))
/// where f is the interpolation weight attached to s.
inline void reduce_to_s(SExponents& out, double alpha_star, double beta_star, double gamma_star, double f) {
  out.theta_s = f;
  const double den = 1.0 - gamma_star * (1.0 - f);
  out.conditions.push_back({"reduction_denominator_positive", den > 0.0});
  if (!all_hold(out.conditions)) return;
  out.alpha_s = alpha_star / den;
  out.beta_s = (0.5 * beta_star + gamma_star * f) / den;
  out.gamma_s = gamma_star * f / den;
  out.valid = true;
}

inline bool plus_tolerance_le(double a, double b) { return a <= b * (1.0 + 1e-14) + 1e-14; }

}  // namespace detail

/// alpha = 1/sigma, beta = gamma + 1, gamma = (q + rho)/sigma.
/// The same triple serves the difference and the u0-centred inequality.
inline ExponentTriple smoothing_exponents(const GNParams& p) {
  p.validate();
  const double gamma = (p.q + p.rho) / p.sigma;
  return {1.0 / p.sigma, gamma + 1.0, gamma};
}

/// Extrapolation of an L^q-L^r estimate (r finite) to L^{gamma r m0/q}-L^infty.
/// beta_star uses the general formula valid for any beta.
inline StarExponents extrapolate_to_infinity(double q, LebesgueIndex r, double gamma, double alpha, double beta,
                                             double m0) {
  detail::require_finite(q, "q");
  detail::require_finite(gamma, "gamma");
  detail::require_finite(alpha, "alpha");
  detail::require_finite(beta, "beta");
  detail::require_finite(m0, "m0");
  if (q < 1.0) throw DomainError("extrapolate_to_infinity: q must be >= 1");
  if (!(gamma > 0.0)) throw DomainError("extrapolate_to_infinity: gamma must be > 0");

  StarExponents out;
  out.m0 = m0;
  out.conditions.push_back({"r_finite", r.is_finite()});
  if (r.is_infinite()) return out;
  const double rv = r.value();
  const double kappa = gamma * rv / q;
  const double denom = (kappa - 1.0) * m0 + q * (1.0 / gamma - 1.0);
  out.conditions.push_back({"gamma_r_gt_q", gamma * rv > q});
  out.conditions.push_back({"m0_ge_q_over_gamma", m0 >= q / gamma});
  out.conditions.push_back({"m0_condition", denom > 0.0});
  if (!all_hold(out.conditions)) return out;

  out.alpha_star = alpha * q / gamma / denom;
  out.gamma_star = (kappa - 1.0) * m0 / denom;
  out.beta_star = ((beta - 1.0) * kappa + gamma - beta) / denom + 1.0;
  out.valid = true;
  return out;
}

/// beta_star in the form used when beta = gamma + 1: (gamma^2 r/q - 1)/denom + 1.
/// Kept separate from extrapolate_to_infinity so the two can be cross-checked.
inline double beta_star_for_unit_shift(double q, double r, double gamma, double m0) {
  const double denom = (gamma * r / q - 1.0) * m0 + q * (1.0 / gamma - 1.0);
  return (gamma * gamma * r / q - 1.0) / denom + 1.0;
}

/// Extrapolation of an L^q-L^r estimate toward a smaller source index s < q.
/// `c` is the constant of the L^q-L^r estimate; the amplified constant is returned.
inline SExponents extrapolate_to_s(double q, LebesgueIndex r, double gamma, double alpha, double beta, double s,
                                   double c = 1.0) {
  detail::require_finite(q, "q");
  detail::require_finite(s, "s");
  detail::require_finite(alpha, "alpha");
  detail::require_finite(beta, "beta");
  if (q < 1.0) throw DomainError("extrapolate_to_s: q must be >= 1");
  if (!(gamma > 0.0)) throw DomainError("extrapolate_to_s: gamma must be > 0");
  if (!(alpha > 0.0)) throw DomainError("extrapolate_to_s: alpha must be > 0");
  if (!(c > 0.0)) throw DomainError("extrapolate_to_s: C must be > 0");

  SExponents out;
  out.case_label = r.is_infinite() ? "r=inf" : "r<inf";
  out.s = s;
  out.conditions.push_back({"s_ge_1", s >= 1.0});
  out.conditions.push_back({"s_lt_q", s < q});
  out.conditions.push_back({"q_lt_r", r.is_infinite() || q < r.value()});
  if (!all_hold(out.conditions)) return out;

  const double theta = r.is_infinite() ? s / q : (r.value() - q) * s / (q * (r.value() - s));
  out.theta_s = theta;
  out.conditions.push_back({"theta_positive", theta > 0.0});
  out.conditions.push_back({"gamma_one_minus_theta_lt_1", gamma * (1.0 - theta) < 1.0});
  if (!all_hold(out.conditions)) return out;

  detail::reduce_to_s(out, alpha, beta, gamma, theta);
  if (out.valid) {
    const double den = 1.0 - gamma * (1.0 - theta);
    out.constant = std::pow(c * std::pow(2.0, out.alpha_s), 1.0 / den);
  }
  return out;
}

/// Full chain GN inequality -> L^q-L^r -> L^{s_max}-L^infty -> L^s-L^infty,
/// with s_max = gamma r m0 / q and interpolation weight s q/(gamma r m0).
inline SExponents chained_exponents(const GNParams& gn, double m0, double s) {
  const ExponentTriple base = smoothing_exponents(gn);
  const StarExponents star = extrapolate_to_infinity(gn.q, gn.r, base.gamma, base.alpha, base.beta, m0);
  SExponents out;
  out.case_label = "chain";
  out.s = s;
  out.conditions = star.conditions;
  if (!star.valid) return out;
  out.star = ExponentTriple{star.alpha_star, star.beta_star, star.gamma_star};
  const double s_max = base.gamma * gn.r.value() * m0 / gn.q;
  out.conditions.push_back({"s_ge_1", s >= 1.0});
  out.conditions.push_back({"s_le_s_max", detail::plus_tolerance_le(s, s_max)});
  detail::reduce_to_s(out, star.alpha_star, star.beta_star, star.gamma_star, s / s_max);
  return out;
}

/// m_{k+1} = kappa m_k - r kappa^{-1} (gamma - 1), k = 0..n-1.
inline IterationSequence iteration_sequence(double kappa, double r, double gamma, double m0, int n) {
  detail::require_finite(kappa, "kappa");
  detail::require_finite(r, "r");
  detail::require_finite(gamma, "gamma");
  detail::require_finite(m0, "m0");
  if (!(kappa > 1.0)) throw DomainError("iteration_sequence: kappa must be > 1");
  if (n < 0) throw DomainError("iteration_sequence: n must be >= 0");

  const double shift = r / kappa * (1.0 - gamma);  // m_{k+1} = kappa m_k + shift
  const double lead = ((kappa - 1.0) * m0 + shift) / (kappa - 1.0);
  IterationSequence seq;
  seq.values.reserve(n + 1);
  seq.closed_form.reserve(n + 1);
  double m = m0;
  for (int k = 0; k <= n; ++k) {
    seq.values.push_back(m);
    seq.closed_form.push_back(std::pow(kappa, k) * lead - shift / (kappa - 1.0));
    m = kappa * m - r / kappa * (gamma - 1.0);
  }
  seq.monotone = (kappa - 1.0) * m0 + shift > 0.0;
  seq.limit_ratio = lead;
  return seq;
}

/// q_{n+1} = kappa q_n + p - 1 - 1/m, the index sequence of the Moser-type iteration.
inline IterationSequence moser_sequence(double kappa, double p, double m, double q0, int n) {
  detail::require_finite(q0, "q0");
  if (!(kappa > 1.0)) throw DomainError("moser_sequence: kappa must be > 1");
  if (!(m > 0.0)) throw DomainError("moser_sequence: m must be > 0");
  if (n < 0) throw DomainError("moser_sequence: n must be >= 0");
  const double shift = p - 1.0 - 1.0 / m;
  const double seed = (kappa - 1.0) * q0 + shift;
  IterationSequence seq;
  double qn = q0;
  for (int k = 0; k <= n; ++k) {
    seq.values.push_back(qn);
    seq.closed_form.push_back(std::pow(kappa, k) / (kappa - 1.0) * seed - shift / (kappa - 1.0));
    qn = kappa * qn + shift;
  }
  seq.monotone = seed > 0.0;
  seq.limit_ratio = seed / (kappa - 1.0);
  return seq;
}

namespace detail {

/// beta* = (kappa-1)/D * S/(2 kappa) with
/// S = 1/2 sum_nu 2^{-nu} (kappa q_nu/q_{nu+1} + 1) kappa^{-nu} q_{nu+1},
/// summed until the next term drops below rel_tol * partial sum. The term
/// ratio tends to 1/2, so the remaining tail is bounded by about one term.
inline double moser_beta_star(double kappa, double m, double p, double q0, double rel_tol = 1e-12) {
  const double shift = p - 1.0 - 1.0 / m;
  const double seed = (kappa - 1.0) * q0 + shift;  // D
  // q_nu = (kappa^nu seed - shift)/(kappa - 1); scaled_q(nu) = kappa^{-nu} q_nu
  auto scaled_q = [&](int nu) { return (seed - shift * std::pow(kappa, -nu)) / (kappa - 1.0); };
  double sum = 0.0;
  for (int nu = 0; nu < 4000; ++nu) {
    const double qn_scaled = scaled_q(nu);            // kappa^{-nu} q_nu
    const double qn1_scaled = scaled_q(nu + 1);       // kappa^{-nu-1} q_{nu+1}
    const double ratio = qn_scaled / qn1_scaled;      // kappa q_nu / q_{nu+1}
    const double term = std::ldexp(1.0, -nu) * (ratio + 1.0) * kappa * qn1_scaled;
    sum += term;
    if (nu > 4 && std::abs(term) <= rel_tol * std::abs(sum)) break;
  }
  const double S = 0.5 * sum;
  return (kappa - 1.0) / seed * S / (2.0 * kappa);
}

}  // namespace detail

/// L^s-L^infty exponents from the one-parameter family of Sobolev type
/// inequalities (second-class operators in L^1, e.g. doubly nonlinear).
inline SExponents moser_exponents(double kappa, double m, double p, double q0, double s) {
  detail::require_finite(kappa, "kappa");
  detail::require_finite(m, "m");
  detail::require_finite(p, "p");
  detail::require_finite(q0, "q0");
  detail::require_finite(s, "s");
  if (!(kappa > 1.0)) throw DomainError("moser_exponents: kappa must be > 1");
  if (!(m > 0.0)) throw DomainError("moser_exponents: m must be > 0");

  SExponents out;
  out.case_label = "moser";
  out.s = s;
  const double D = (kappa - 1.0) * q0 + p - 1.0 - 1.0 / m;
  const double top = kappa * m * q0;
  out.conditions.push_back({"q0_positive", q0 > 0.0});
  out.conditions.push_back({"kappa_m_q0_ge_1", top >= 1.0});
  out.conditions.push_back({"moser_seed_condition", D > 0.0});
  out.conditions.push_back({"s_ge_1", s >= 1.0});
  out.conditions.push_back({"s_le_kappa_m_q0", detail::plus_tolerance_le(s, top)});
  if (!all_hold(out.conditions)) return out;

  const double alpha_star = 1.0 / (m * D);
  const double gamma_star = (kappa - 1.0) * q0 / D;
  const double beta_star = detail::moser_beta_star(kappa, m, p, q0);
  out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
  detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s / top);
  return out;
}

/// d/lambda with lambda = d(p-2) + p; the decay rate of the Barenblatt profile.
inline double barenblatt_exponent(int d, double p) {
  if (d < 1) throw DomainError("barenblatt_exponent: d must be >= 1");
  const double lambda = d * (p - 2.0) + p;
  if (!(lambda > 0.0)) throw DomainError("barenblatt_exponent: lambda = d(p-2)+p must be > 0 (p > 2d/(d+1))");
  return d / lambda;
}

/// L^s-L^infty exponents of the p-Laplace semigroup (Dirichlet, Neumann and
/// local Robin conditions share them). Case dispatch on p against d.
///   1 < p < d : m0 defaults to p when 2d/(d+2) < p; otherwise must be given.
///   p = d     : theta in (0,1), default 1/2.
///   p > d     : 1 <= s <= 2.
inline SExponents plaplace_exponents(int d, double p, BoundaryKind bc, double s,
                                     std::optional<double> m0 = std::nullopt,
                                     std::optional<double> theta = std::nullopt) {
  if (d < 1) throw DomainError("plaplace_exponents: d must be >= 1");
  detail::require_finite(p, "p");
  detail::require_finite(s, "s");
  if (!(p > 1.0)) throw DomainError("plaplace_exponents: p must be > 1");

  SExponents out;
  out.s = s;
  const double dd = d;
  const std::string prefix = to_string(bc) + ":";
  if (p < dd) {
    out.case_label = prefix + "p<d";
    const bool default_ok = p > 2.0 * dd / (dd + 2.0);
    out.conditions.push_back({"m0_given_or_default_admissible", m0.has_value() || default_ok});
    if (!all_hold(out.conditions)) return out;
    const double mm = m0.value_or(p);
    const double kd = dd / (dd - p);
    const double den = p * mm + (dd - p) * (p - 2.0);
    out.conditions.push_back({"m0_ge_p", mm >= p});
    out.conditions.push_back({"m0_condition", (kd - 1.0) * mm + p - 2.0 > 0.0});
    out.conditions.push_back({"s_ge_1", s >= 1.0});
    out.conditions.push_back({"s_le_d_m0_over_d_minus_p", detail::plus_tolerance_le(s, dd * mm / (dd - p))});
    out.conditions.push_back({"s_gt_d(2-p)/p", s > dd * (2.0 - p) / p});
    if (!all_hold(out.conditions)) return out;
    const double alpha_star = (dd - p) / den;
    const double beta_star = ((2.0 / p - 1.0) * dd + p) / den + 1.0;
    const double gamma_star = p * mm / den;
    out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
    detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s * (dd - p) / (dd * mm));
    return out;
  }
  if (p == dd) {
    out.case_label = prefix + "p=d";
    const double th = theta.value_or(0.5);
    out.conditions.push_back({"d_ge_2", d >= 2});
    out.conditions.push_back({"theta_in_(0,1)", th > 0.0 && th < 1.0});
    out.conditions.push_back({"s_ge_1", s >= 1.0});
    out.conditions.push_back({"s_le_2/(1-theta)", detail::plus_tolerance_le(s, 2.0 / (1.0 - th))});
    if (!all_hold(out.conditions)) return out;
    const double w = 2.0 * th + p * (1.0 - th);
    const double alpha_star = (1.0 - th) / w;
    const double gamma_star = 2.0 / w;
    const double beta_star = (w * w - (1.0 - th) * p * p) / (p * p * 2.0 * th) + 1.0;
    out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
    detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s * (1.0 - th) / 2.0);
    return out;
  }
  out.case_label = prefix + "p>d";
  out.conditions.push_back({"s_ge_1", s >= 1.0});
  out.conditions.push_back({"s_le_2", s <= 2.0});
  if (!all_hold(out.conditions)) return out;
  const double theta0 = p * dd / (p * dd + 2.0 * (p - dd));
  const double alpha_star = dd / (p * dd + 2.0 * (p - dd));
  const double gamma_star = (2.0 * theta0 + p * (1.0 - theta0)) / p;
  const double beta_star = gamma_star + 1.0;
  out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
  detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s / 2.0);
  return out;
}

/// Doubly nonlinear diffusion d_t u = Delta_p(phi(u)) with phi'(s) >= C|s|^{m-1}.
///   1 < p < d : Moser route with kappa = d/(d-p); q0 defaults to p when
///               d(1+1/m)/(1+d+1/m) < p.
///   p = d     : Moser route with kappa = 1/(1-theta); q0 defaults to p.
///   p > d     : closed form, 1 <= s <= m + 1.
inline SExponents doubly_nonlinear_exponents(int d, double p, double m, double s,
                                             std::optional<double> q0 = std::nullopt,
                                             std::optional<double> theta = std::nullopt) {
  if (d < 1) throw DomainError("doubly_nonlinear_exponents: d must be >= 1");
  detail::require_finite(p, "p");
  detail::require_finite(m, "m");
  detail::require_finite(s, "s");
  if (!(p > 1.0)) throw DomainError("doubly_nonlinear_exponents: p must be > 1");
  if (!(m > 0.0)) throw DomainError("doubly_nonlinear_exponents: m must be > 0");

  SExponents out;
  out.s = s;
  const double dd = d;
  const double shift = p - 1.0 - 1.0 / m;
  if (p < dd) {
    out.case_label = "p<d";
    const bool default_ok = p > dd * (1.0 + 1.0 / m) / (1.0 + dd + 1.0 / m);
    out.conditions.push_back({"q0_given_or_default_admissible", q0.has_value() || default_ok});
    if (!all_hold(out.conditions)) return out;
    const double qq = q0.value_or(p);
    const double D = p * qq / (dd - p) + shift;
    const double top = dd * m * qq / (dd - p);
    out.conditions.push_back({"q0_ge_p", qq >= p});
    out.conditions.push_back({"q0_condition", D > 0.0});
    out.conditions.push_back({"s_ge_1", s >= 1.0});
    out.conditions.push_back({"s_le_d_m_q0_over_d_minus_p", detail::plus_tolerance_le(s, top)});
    if (!all_hold(out.conditions)) return out;
    const double alpha_star = 1.0 / (m * p / (dd - p) * qq + m * p - m - 1.0);
    const double gamma_star = p * qq / (p * qq + (dd - p) * shift);
    const double beta_star = detail::moser_beta_star(dd / (dd - p), m, p, qq);
    out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
    detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s * (dd - p) / (dd * m * qq));
    return out;
  }
  if (p == dd) {
    out.case_label = "p=d";
    const double lo = std::max(0.0, (1.0 + m * (1.0 - p)) / (m + 1.0));
    const double th = theta.value_or(0.5 * (lo + 1.0));
    const double qq = q0.value_or(p);
    const double D = th * qq / (1.0 - th) + shift;
    const double top = m * qq / (1.0 - th);
    out.conditions.push_back({"d_ge_2", d >= 2});
    out.conditions.push_back({"theta_in_(0,1)", th > 0.0 && th < 1.0});
    out.conditions.push_back({"q0_ge_p", qq >= p});
    out.conditions.push_back({"q0_condition", D > 0.0});
    out.conditions.push_back({"s_ge_1", s >= 1.0});
    out.conditions.push_back({"s_le_m_q0/(1-theta)", detail::plus_tolerance_le(s, top)});
    if (!all_hold(out.conditions)) return out;
    const double alpha_star = 1.0 / (m * D);
    const double gamma_star = th / (1.0 - th) * qq / D;
    const double beta_star = detail::moser_beta_star(1.0 / (1.0 - th), m, p, qq);
    out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
    detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s * (1.0 - th) / (m * qq));
    return out;
  }
  out.case_label = "p>d";
  out.conditions.push_back({"s_ge_1", s >= 1.0});
  out.conditions.push_back({"s_le_m+1", detail::plus_tolerance_le(s, m + 1.0)});
  if (!all_hold(out.conditions)) return out;
  const double K = 1.0 - (m + 1.0) / (m * p) + (m + 1.0) / (m * dd);
  const double alpha_star = 1.0 / (p * m * K);
  const double gamma_star = (m + 1.0) / (dd * m * K);
  const double beta_star = gamma_star + 1.0;
  out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
  detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s / (m + 1.0));
  return out;
}

/// Dirichlet-to-Neumann operator of the p-Laplacian; the boundary has
/// dimension d - 1. theta for p = d must lie in (1 - 1/p, 1).
inline SExponents dtn_exponents(int d, double p, double s, std::optional<double> m0 = std::nullopt,
                                std::optional<double> theta = std::nullopt) {
  if (d < 1) throw DomainError("dtn_exponents: d must be >= 1");
  detail::require_finite(p, "p");
  detail::require_finite(s, "s");
  if (!(p > 1.0)) throw DomainError("dtn_exponents: p must be > 1");

  SExponents out;
  out.s = s;
  const double dd = d;
  if (p < dd) {
    out.case_label = "p<d";
    const bool default_ok = p > 2.0 * dd / (dd + 1.0);
    out.conditions.push_back({"m0_given_or_default_admissible", m0.has_value() || default_ok});
    if (!all_hold(out.conditions)) return out;
    const double mm = m0.value_or(p);
    const double den = (p - 1.0) * mm + (dd - p) * (p - 2.0);
    out.conditions.push_back({"m0_ge_p", mm >= p});
    out.conditions.push_back({"m0_condition", ((dd - 1.0) / (dd - p) - 1.0) * mm + p - 2.0 > 0.0});
    out.conditions.push_back({"s_ge_1", s >= 1.0});
    out.conditions.push_back(
        {"s_le_(d-1)m0/(d-p)", detail::plus_tolerance_le(s, (dd - 1.0) * mm / (dd - p))});
    out.conditions.push_back({"s_gt_(2-p)(d-1)/(p-1)", s > (2.0 - p) * (dd - 1.0) / (p - 1.0)});
    if (!all_hold(out.conditions)) return out;
    const double alpha_star = (dd - p) / den;
    const double beta_star = ((2.0 / p - 1.0) * dd + p - 2.0 / p) / den + 1.0;
    const double gamma_star = (p - 1.0) * mm / den;
    out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
    detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s * (dd - p) / ((dd - 1.0) * mm));
    return out;
  }
  if (p == dd) {
    out.case_label = "p=d";
    const double lo = 1.0 - 1.0 / p;
    const double th = theta.value_or(0.5 * (lo + 1.0));
    out.conditions.push_back({"d_ge_2", d >= 2});
    out.conditions.push_back({"theta_in_(1-1/p,1)", th > lo && th < 1.0});
    out.conditions.push_back({"s_ge_1", s >= 1.0});
    out.conditions.push_back({"s_le_1/(1-theta)", detail::plus_tolerance_le(s, 1.0 / (1.0 - th))});
    if (!all_hold(out.conditions)) return out;
    const double w = 1.0 / (1.0 - th);
    const double alpha_star = 1.0 / (w - 2.0);
    const double beta_star = (2.0 / (p * p) * w - 1.0) / (w - 2.0) + 1.0;
    const double gamma_star = (w - p) / (w - 2.0);
    out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
    detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s * (1.0 - th));
    return out;
  }
  out.case_label = "p>d";
  out.conditions.push_back({"s_ge_1", s >= 1.0});
  out.conditions.push_back({"s_le_2", s <= 2.0});
  if (!all_hold(out.conditions)) return out;
  out.alpha_s = 1.0 / (p - 2.0 + s);
  out.beta_s = ((2.0 + p) / 2.0 + s) / (p - 2.0 + s);
  out.gamma_s = s / (p - 2.0 + s);
  out.valid = true;
  return out;
}

/// Fractional p-Laplacian of order sfrac in (0,1) with Dirichlet exterior condition;
/// `s` is the source index (q in the original statement).
inline SExponents fractional_exponents(int d, double p, double sfrac, double s,
                                       std::optional<double> m0 = std::nullopt,
                                       std::optional<double> theta = std::nullopt) {
  if (d < 1) throw DomainError("fractional_exponents: d must be >= 1");
  detail::require_finite(p, "p");
  detail::require_finite(s, "s");
  if (!(p > 1.0)) throw DomainError("fractional_exponents: p must be > 1");
  if (!(sfrac > 0.0 && sfrac < 1.0)) throw DomainError("fractional_exponents: sfrac must lie in (0,1)");

  SExponents out;
  out.s = s;
  const double dd = d;
  const double sp = sfrac * p;
  if (sp < dd) {
    out.case_label = "sp<d";
    const bool default_ok = p > 2.0 * dd / (dd + 2.0 * sfrac);
    out.conditions.push_back({"m0_given_or_default_admissible", m0.has_value() || default_ok});
    if (!all_hold(out.conditions)) return out;
    const double mm = m0.value_or(p);
    const double kd = dd / (dd - sp);
    const double den = (kd - 1.0) * mm + p - 2.0;
    out.conditions.push_back({"m0_ge_p", mm >= p});
    out.conditions.push_back({"m0_condition", sp * mm + (p - 2.0) * (dd - sp) > 0.0});
    out.conditions.push_back({"s_ge_1", s >= 1.0});
    out.conditions.push_back({"s_le_d_m0/(d-sp)", detail::plus_tolerance_le(s, dd * mm / (dd - sp))});
    out.conditions.push_back({"s_lower_bound", s > sp / dd + (p - 2.0) - dd * (2.0 + p) / sp});
    if (!all_hold(out.conditions)) return out;
    const double alpha_star = 1.0 / den;
    const double beta_star = (2.0 / p * kd - 1.0) / den + 1.0;
    const double gamma_star = (kd - 1.0) * mm / den;
    out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
    detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s * (dd - sp) / (dd * mm));
    return out;
  }
  if (sp == dd) {
    out.case_label = "sp=d";
    const double lo = std::max({1.0 - p / 2.0, 2.0 - p, 0.0});
    const double th = theta.value_or(0.5 * (lo + 1.0));
    out.conditions.push_back({"theta_in_(lo,1)", th > lo && th < 1.0});
    out.conditions.push_back({"s_ge_1", s >= 1.0});
    out.conditions.push_back({"s_le_p/(1-theta)", detail::plus_tolerance_le(s, p / (1.0 - th))});
    if (!all_hold(out.conditions)) return out;
    const double w = p / (1.0 - th) - 2.0;
    const double alpha_star = 1.0 / w;
    const double beta_star = (2.0 / (1.0 - th) - 1.0) / w + 1.0;
    const double gamma_star = (1.0 / (1.0 - th) - 1.0) * p / w;
    out.star = ExponentTriple{alpha_star, beta_star, gamma_star};
    detail::reduce_to_s(out, alpha_star, beta_star, gamma_star, s * (1.0 - th) / p);
    return out;
  }
  out.case_label = "sp>d";
  out.conditions.push_back({"s_ge_1", s >= 1.0});
  out.conditions.push_back({"s_le_2", s <= 2.0});
  if (!all_hold(out.conditions)) return out;
  const double den = p - 2.0 * (1.0 - s / 2.0);
  out.alpha_s = 1.0 / den;
  out.beta_s = (1.0 + p / 2.0 + s) / den;
  out.gamma_s = s / den;
  out.valid = true;
  return out;
}

}  // namespace nlsg
