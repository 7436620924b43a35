#pragma once
// Discrete p-Laplace type operators on uniform 1D/2D grids.
//
// The diffusion part is the weighted gradient of the convex energy
//   Psi(w) = sum_cells mu (1/p) [(|xi|^2 + eps^2)^{p/2} - eps^p]
//          + sum_boundary_faces mu_b (b/p) [(w^2 + eps^2)^{p/2} - eps^p]   (Robin only)
// where xi is the forward-difference gradient attached to a cell. Applying
// the operator means (Aw)_k = mu_k^{-1} dPsi/dw_k, so the divergence is the
// exact adjoint of the gradient and constants are annihilated under Neumann
// conditions.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlsg/exponents.hpp"
#include "nlsg/linalg.hpp"
#include "nlsg/measure.hpp"

namespace nlsg {

/// Uniform tensor grid with n[a] nodes on [lo[a], hi[a]] for each axis a < dim.
class Grid {
 public:
  static Grid line(int n, double lo, double hi) { return Grid(1, {n, 1}, {lo, 0.0}, {hi, 0.0}); }
  static Grid rectangle(int nx, int ny, double xlo, double xhi, double ylo, double yhi) {
    return Grid(2, {nx, ny}, {xlo, ylo}, {xhi, yhi});
  }

  int dim() const { return dim_; }
  int nodes(int axis) const { return n_[axis]; }
  double lo(int axis) const { return lo_[axis]; }
  double hi(int axis) const { return hi_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  std::size_t size() const { return static_cast<std::size_t>(n_[0]) * n_[1]; }
  std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_[0]) * j; }
  double cell_volume() const { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }
  /// Measure of a boundary face perpendicular to `axis`.
  double face_measure(int axis) const { return dim_ == 1 ? 1.0 : h_[1 - axis]; }

  std::array<double, 2> coord(std::size_t k) const {
    const int i = static_cast<int>(k % n_[0]);
    const int j = static_cast<int>(k / n_[0]);
    return {lo_[0] + i * h_[0], dim_ == 2 ? lo_[1] + j * h_[1] : 0.0};
  }
  double radius(std::size_t k) const {
    const auto x = coord(k);
    return std::hypot(x[0], x[1]);
  }

  const SpacePtr& space() const { return space_; }

  GridFunction zeros() const { return GridFunction(space_); }
  template <class F>
  GridFunction sample(F&& f) const {
    std::vector<double> v(size());
    for (std::size_t k = 0; k < size(); ++k) v[k] = f(coord(k));
    return GridFunction(space_, std::move(v));
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && lo_ == o.lo_ && hi_ == o.hi_;
  }

 private:
  Grid(int dim, std::array<int, 2> n, std::array<double, 2> lo, std::array<double, 2> hi)
      : dim_(dim), n_(n), lo_(lo), hi_(hi) {
    if (dim != 1 && dim != 2) throw DomainError("Grid: dimension must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
      if (n_[a] < 3) throw DomainError("Grid: at least 3 nodes per axis");
      if (!(hi_[a] > lo_[a])) throw DomainError("Grid: empty axis interval");
      h_[a] = (hi_[a] - lo_[a]) / (n_[a] - 1);
    }
    if (dim == 1) h_[1] = 1.0;
    space_ = DiscreteSpace::uniform(size(), cell_volume());
  }

  int dim_;
  std::array<int, 2> n_;
  std::array<double, 2> lo_, hi_;
  std::array<double, 2> h_{1.0, 1.0};
  SpacePtr space_;
};

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::Dirichlet;
  double b = 0.0;  // Robin coefficient

  static BoundaryCondition dirichlet() { return {BoundaryKind::Dirichlet, 0.0}; }
  static BoundaryCondition neumann() { return {BoundaryKind::Neumann, 0.0}; }
  static BoundaryCondition robin(double b) { return {BoundaryKind::Robin, b}; }
};

/// Nondecreasing phi with phi(0) = 0, composed inside the diffusion: A(phi(u)).
struct PhiSpec {
  enum class Kind { Identity, Power, Custom };
  Kind kind = Kind::Identity;
  double m = 1.0;
  std::function<double(double)> custom_value;
  std::function<double(double)> custom_derivative;

  static PhiSpec identity() { return {}; }
  /// phi(s) = |s|^{m-1} s
  static PhiSpec power(double m) {
    if (!(m > 0.0)) throw DomainError("PhiSpec::power: m must be > 0");
    PhiSpec p;
    p.kind = Kind::Power;
    p.m = m;
    return p;
  }
  static PhiSpec custom(std::function<double(double)> f, std::function<double(double)> df) {
    PhiSpec p;
    p.kind = Kind::Custom;
    p.custom_value = std::move(f);
    p.custom_derivative = std::move(df);
    return p;
  }

  bool is_identity() const { return kind == Kind::Identity || (kind == Kind::Power && m == 1.0); }

  double value(double s) const {
    switch (kind) {
      case Kind::Identity: return s;
      case Kind::Power: return s == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(s), m), s);
      case Kind::Custom: return custom_value(s);
    }
    return s;
  }
  /// phi'(s); for Power, m (s^2 + eps^2)^{(m-1)/2}.
  double derivative(double s, double eps) const {
    switch (kind) {
      case Kind::Identity: return 1.0;
      case Kind::Power: {
        if (m == 1.0) return 1.0;
        const double r2 = s * s + eps * eps;
        if (r2 == 0.0) return m > 1.0 ? 0.0 : INFINITY;
        return m * std::pow(r2, 0.5 * (m - 1.0));
      }
      case Kind::Custom: return custom_derivative(s);
    }
    return 1.0;
  }
};

/// Nemytskii perturbation F(u)(x) = f(x, u(x)) with f(x, 0) = 0 and Lipschitz constant L.
struct LipschitzF {
  std::function<double(const std::array<double, 2>&, double)> f;
  std::function<double(const std::array<double, 2>&, double)> df;
  double lipschitz = 0.0;
  std::string label = "custom";

  /// f(u) = c u
  static LipschitzF linear(double c) {
    return {[c](const std::array<double, 2>&, double u) { return c * u; },
            [c](const std::array<double, 2>&, double) { return c; }, std::abs(c), "linear"};
  }
  /// f(u) = L sin(u)
  static LipschitzF sine(double L) {
    return {[L](const std::array<double, 2>&, double u) { return L * std::sin(u); },
            [L](const std::array<double, 2>&, double u) { return L * std::cos(u); }, std::abs(L), "sine"};
  }
};

struct OperatorSpec {
  Grid grid = Grid::line(3, 0.0, 1.0);
  double p = 2.0;
  BoundaryCondition bc = BoundaryCondition::dirichlet();
  PhiSpec phi = PhiSpec::identity();
  std::optional<LipschitzF> perturbation;
  double eps_reg = 1e-8;

  void validate() const {
    if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("OperatorSpec: p must be > 1");
    if (!(eps_reg >= 0.0)) throw DomainError("OperatorSpec: eps_reg must be >= 0");
    if (bc.kind == BoundaryKind::Robin && !(bc.b > 0.0)) throw DomainError("OperatorSpec: Robin b must be > 0");
    if (perturbation && !(perturbation->lipschitz >= 0.0))
      throw DomainError("OperatorSpec: Lipschitz constant must be >= 0");
  }

  double lipschitz() const { return perturbation ? perturbation->lipschitz : 0.0; }
};

namespace detail {

/// A cell carries the forward-difference gradient at its base node.
/// Index -1 denotes a zero Dirichlet ghost.
struct Cell {
  long base;
  std::array<long, 2> next;
};

inline std::vector<Cell> build_cells(const Grid& g, BoundaryKind bc) {
  std::vector<Cell> cells;
  const int nx = g.nodes(0);
  const int ny = g.dim() == 2 ? g.nodes(1) : 1;
  auto node = [&](int i, int j) -> long {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return static_cast<long>(g.index(i, j));
  };
  if (bc == BoundaryKind::Dirichlet) {
    const int jlo = g.dim() == 2 ? -1 : 0;
    for (int j = jlo; j < ny; ++j)
      for (int i = -1; i < nx; ++i) {
        Cell c{node(i, j), {node(i + 1, j), g.dim() == 2 ? node(i, j + 1) : -1}};
        if (c.base < 0 && c.next[0] < 0 && c.next[1] < 0) continue;
        cells.push_back(c);
      }
  } else {
    // mirror ghosts: the forward neighbour past the boundary is the base node itself
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const long b = node(i, j);
        const long ex = i + 1 < nx ? node(i + 1, j) : b;
        const long ey = g.dim() == 2 ? (j + 1 < ny ? node(i, j + 1) : b) : -1;
        cells.push_back(Cell{b, {ex, ey}});
      }
  }
  return cells;
}

/// (node, face measure) for each boundary face; corners appear once per face.
inline std::vector<std::pair<std::size_t, double>> boundary_faces(const Grid& g) {
  std::vector<std::pair<std::size_t, double>> faces;
  const int nx = g.nodes(0);
  if (g.dim() == 1) {
    faces.emplace_back(g.index(0), 1.0);
    faces.emplace_back(g.index(nx - 1), 1.0);
    return faces;
  }
  const int ny = g.nodes(1);
  for (int j = 0; j < ny; ++j) {
    faces.emplace_back(g.index(0, j), g.face_measure(0));
    faces.emplace_back(g.index(nx - 1, j), g.face_measure(0));
  }
  for (int i = 0; i < nx; ++i) {
    faces.emplace_back(g.index(i, 0), g.face_measure(1));
    faces.emplace_back(g.index(i, ny - 1), g.face_measure(1));
  }
  return faces;
}

}  // namespace detail

/// Precomputed stencil for one OperatorSpec. Immutable and shareable.
class DiscreteOperator {
 public:
  explicit DiscreteOperator(OperatorSpec spec)
      : spec_(std::move(spec)), cells_(), faces_() {
    spec_.validate();
    cells_ = detail::build_cells(spec_.grid, spec_.bc.kind);
    if (spec_.bc.kind == BoundaryKind::Robin) faces_ = detail::boundary_faces(spec_.grid);
    for (std::size_t k = 0; k < spec_.grid.size(); ++k) coords_.push_back(spec_.grid.coord(k));
  }

  const OperatorSpec& spec() const { return spec_; }
  const Grid& grid() const { return spec_.grid; }
  std::size_t size() const { return spec_.grid.size(); }

  /// Diffusion part applied to w (no phi, no F): mu^{-1} grad Psi(w).
  void diffusion(std::span<const double> w, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const Grid& g = spec_.grid;
    const double mu = g.cell_volume();
    const int dim = g.dim();
    const double p = spec_.p;
    const double eps2 = spec_.eps_reg * spec_.eps_reg;
    for (const auto& c : cells_) {
      const double wb = at(w, c.base);
      double xi[2] = {0.0, 0.0};
      double r2 = eps2;
      for (int a = 0; a < dim; ++a) {
        xi[a] = (at(w, c.next[a]) - wb) / g.spacing(a);
        r2 += xi[a] * xi[a];
      }
      if (r2 == 0.0) continue;
      const double coef = p == 2.0 ? 1.0 : std::pow(r2, 0.5 * (p - 2.0));
      // dPsi/dw = mu * a(xi) . dxi/dw, then divide by mu
      for (int a = 0; a < dim; ++a) {
        const double flux = coef * xi[a] / g.spacing(a);
        if (c.next[a] >= 0) out[c.next[a]] += flux;
        if (c.base >= 0) out[c.base] -= flux;
      }
    }
    (void)mu;
    if (spec_.bc.kind == BoundaryKind::Robin) {
      for (const auto& [k, mb] : faces_) {
        const double r2 = w[k] * w[k] + eps2;
        if (r2 == 0.0) continue;
        const double coef = p == 2.0 ? 1.0 : std::pow(r2, 0.5 * (p - 2.0));
        out[k] += mb / mu * spec_.bc.b * coef * w[k];
      }
    }
  }

  /// Psi(w).
  double energy_of(std::span<const double> w) const {
    const Grid& g = spec_.grid;
    const double mu = g.cell_volume();
    const double p = spec_.p;
    const double eps2 = spec_.eps_reg * spec_.eps_reg;
    const double epsp = std::pow(spec_.eps_reg, p);
    double e = 0.0;
    for (const auto& c : cells_) {
      const double wb = at(w, c.base);
      double r2 = eps2;
      for (int a = 0; a < g.dim(); ++a) {
        const double xi = (at(w, c.next[a]) - wb) / g.spacing(a);
        r2 += xi * xi;
      }
      e += mu / p * (std::pow(r2, 0.5 * p) - epsp);
    }
    if (spec_.bc.kind == BoundaryKind::Robin) {
      for (const auto& [k, mb] : faces_) {
        e += mb * spec_.bc.b / p * (std::pow(w[k] * w[k] + eps2, 0.5 * p) - epsp);
      }
    }
    return e;
  }

  /// Adds scale * d(diffusion)/dw into `sink` via sink.add(row, col, v); column
  /// j is additionally multiplied by col_scale[j] (phi' for the chain rule).
  /// With `picard` the xi xi^T part of the Hessian is dropped.
  template <class Sink>
  void add_diffusion_jacobian(std::span<const double> w, std::span<const double> col_scale, double scale,
                              bool picard, Sink& sink) const {
    const Grid& g = spec_.grid;
    const double mu = g.cell_volume();
    const int dim = g.dim();
    const double p = spec_.p;
    const double eps2 = spec_.eps_reg * spec_.eps_reg;
    for (const auto& c : cells_) {
      const double wb = at(w, c.base);
      double xi[2] = {0.0, 0.0};
      double r2 = eps2;
      for (int a = 0; a < dim; ++a) {
        xi[a] = (at(w, c.next[a]) - wb) / g.spacing(a);
        r2 += xi[a] * xi[a];
      }
      double coef, curv;
      if (p == 2.0) {
        coef = 1.0;
        curv = 0.0;
      } else if (r2 == 0.0) {
        coef = p > 2.0 ? 0.0 : 0.0;
        curv = 0.0;
      } else {
        coef = std::pow(r2, 0.5 * (p - 2.0));
        curv = picard ? 0.0 : (p - 2.0) * coef / r2;
      }
      // H = coef I + curv xi xi^T ; local rows/cols are (base, next_0, next_1)
      // dxi_a/dw: base -> -1/h_a, next_a -> +1/h_a
      long nodes[3] = {c.base, c.next[0], dim == 2 ? c.next[1] : -1};
      double grad[3][2] = {{0, 0}, {0, 0}, {0, 0}};  // dxi_a / dw_node
      for (int a = 0; a < dim; ++a) {
        grad[0][a] = -1.0 / g.spacing(a);
        grad[1 + a][a] += 1.0 / g.spacing(a);
      }
      // mirror ghosts reuse the base index; merging happens in the sink
      const int nloc = dim + 1;
      for (int r = 0; r < nloc; ++r) {
        if (nodes[r] < 0) continue;
        for (int s = 0; s < nloc; ++s) {
          if (nodes[s] < 0) continue;
          double hv = 0.0;
          double gr_xi = 0.0, gs_xi = 0.0;
          for (int a = 0; a < dim; ++a) {
            hv += coef * grad[r][a] * grad[s][a];
            gr_xi += grad[r][a] * xi[a];
            gs_xi += grad[s][a] * xi[a];
          }
          hv += curv * gr_xi * gs_xi;
          if (hv == 0.0) continue;
          sink.add(static_cast<std::size_t>(nodes[r]), static_cast<std::size_t>(nodes[s]),
                   scale * hv * col_scale[nodes[s]]);
        }
      }
    }
    (void)mu;
    if (spec_.bc.kind == BoundaryKind::Robin) {
      for (const auto& [k, mb] : faces_) {
        const double r2 = w[k] * w[k] + eps2;
        double d;
        if (p == 2.0)
          d = 1.0;
        else if (r2 == 0.0)
          d = 0.0;
        else if (picard)
          d = std::pow(r2, 0.5 * (p - 2.0));
        else
          d = std::pow(r2, 0.5 * (p - 4.0)) * ((p - 1.0) * w[k] * w[k] + eps2);
        sink.add(k, k, scale * mb / mu * spec_.bc.b * d * col_scale[k]);
      }
    }
  }

  /// phi(u) pointwise.
  void compose_phi(std::span<const double> u, std::span<double> w) const {
    if (spec_.phi.is_identity()) {
      std::copy(u.begin(), u.end(), w.begin());
      return;
    }
    for (std::size_t k = 0; k < u.size(); ++k) w[k] = spec_.phi.value(u[k]);
  }

  void phi_derivative(std::span<const double> u, std::span<double> dphi) const {
    for (std::size_t k = 0; k < u.size(); ++k) dphi[k] = spec_.phi.derivative(u[k], spec_.eps_reg);
  }

  /// A(phi(u)) + F(u).
  void apply(std::span<const double> u, std::span<double> out) const {
    if (spec_.phi.is_identity()) {
      diffusion(u, out);
    } else {
      std::vector<double> w(u.size());
      compose_phi(u, w);
      diffusion(w, out);
    }
    if (spec_.perturbation) {
      for (std::size_t k = 0; k < u.size(); ++k) out[k] += spec_.perturbation->f(coords_[k], u[k]);
    }
  }

  void perturbation_value(std::span<const double> u, std::span<double> out) const {
    for (std::size_t k = 0; k < u.size(); ++k)
      out[k] = spec_.perturbation ? spec_.perturbation->f(coords_[k], u[k]) : 0.0;
  }
  void perturbation_derivative(std::span<const double> u, std::span<double> out) const {
    for (std::size_t k = 0; k < u.size(); ++k)
      out[k] = spec_.perturbation ? spec_.perturbation->df(coords_[k], u[k]) : 0.0;
  }

  GridFunction apply(const GridFunction& u) const {
    check(u);
    std::vector<double> out(u.size());
    apply(u.values(), out);
    return GridFunction(u.space(), std::move(out));
  }

  void check(const GridFunction& u) const {
    if (!u.space() || u.size() != size() || !u.space()->same_as(*spec_.grid.space()))
      throw DomainError("operator: grid function does not live on the operator grid");
  }

  /// Sum over cells of |xi|^p * mu at eps = 0: the discrete ||grad w||_p^p.
  double gradient_norm_pp(std::span<const double> w) const {
    const Grid& g = spec_.grid;
    double s = 0.0;
    for (const auto& c : cells_) {
      const double wb = at(w, c.base);
      double r2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        const double xi = (at(w, c.next[a]) - wb) / g.spacing(a);
        r2 += xi * xi;
      }
      s += g.cell_volume() * std::pow(r2, 0.5 * spec_.p);
    }
    return s;
  }

 private:
  static double at(std::span<const double> w, long k) { return k < 0 ? 0.0 : w[static_cast<std::size_t>(k)]; }

  OperatorSpec spec_;
  std::vector<detail::Cell> cells_;
  std::vector<std::pair<std::size_t, double>> faces_;
  std::vector<std::array<double, 2>> coords_;
};

/// Discrete -div(a_eps(grad phi(u))) + F(u).
inline GridFunction apply(const OperatorSpec& spec, const GridFunction& u) { return DiscreteOperator(spec).apply(u); }

/// Discrete (1/p) int |grad u|^p (+ (b/p) boundary integral of |u|^p for Robin), eps-regularized.
/// Evaluated at u itself; phi is not composed.
inline double energy(const OperatorSpec& spec, const GridFunction& u) {
  DiscreteOperator op(spec);
  op.check(u);
  return op.energy_of(u.values());
}

struct GNCheck {
  double ratio = NAN;
  double numerator = NAN;    // ||u - uhat||_r^sigma
  double denominator = NAN;  // [u - uhat, Au - Auhat]_q + omega ||u - uhat||_q^q
  bool denominator_positive = false;
};

/// ||u-uh||_r^sigma / (([u-uh, Au-Auh]_q + omega ||u-uh||_q^q) ||u-uh||_q^rho).
inline GNCheck gn_check(const DiscreteOperator& op, const GridFunction& u, const GridFunction& uhat,
                        const GNParams& params) {
  params.validate();
  op.check(u);
  op.check(uhat);
  const GridFunction diff = u - uhat;
  if (lq_norm(diff, LebesgueIndex::infinity()) == 0.0) throw DomainError("gn_check: u and uhat must differ");
  const GridFunction adiff = op.apply(u) - op.apply(uhat);
  const auto q = LebesgueIndex::finite(params.q);
  GNCheck out;
  out.numerator = std::pow(lq_norm(diff, params.r), params.sigma);
  out.denominator = q_bracket(diff, adiff, q) + params.omega * std::pow(lq_norm(diff, q), params.q);
  out.denominator_positive = out.denominator > 0.0;
  if (out.denominator_positive) out.ratio = out.numerator / (out.denominator * std::pow(lq_norm(diff, q), params.rho));
  return out;
}

inline GNCheck gn_check(const OperatorSpec& spec, const GridFunction& u, const GridFunction& uhat,
                        const GNParams& params) {
  return gn_check(DiscreteOperator(spec), u, uhat, params);
}

/// Barenblatt profile t^{-d/lambda} [1 + C_p (|x|/t^{1/lambda})^{p/(p-1)}]_+^{(p-1)/(p-2)},
/// lambda = d(p-2)+p, C_p = (1/lambda)^{1/(p-1)} (2-p)/p.
struct BarenblattQuery {
  int d = 1;
  double p = 3.0;
  double radius = 0.0;  // |x|
  double t = 1.0;
};

inline double barenblatt(const BarenblattQuery& q) {
  if (q.d < 1) throw DomainError("barenblatt: d must be >= 1");
  if (q.p == 2.0) throw DomainError("barenblatt: p = 2 has no Barenblatt profile; use heat_kernel");
  if (!(q.p > 1.0)) throw DomainError("barenblatt: p must be > 1");
  if (!(q.t > 0.0)) throw DomainError("barenblatt: t must be > 0");
  const double lambda = q.d * (q.p - 2.0) + q.p;
  if (!(lambda > 0.0)) throw DomainError("barenblatt: lambda = d(p-2)+p must be > 0");
  const double cp = std::pow(1.0 / lambda, 1.0 / (q.p - 1.0)) * (2.0 - q.p) / q.p;
  const double z = std::abs(q.radius) / std::pow(q.t, 1.0 / lambda);
  const double bracket = 1.0 + cp * std::pow(z, q.p / (q.p - 1.0));
  if (bracket <= 0.0) return 0.0;
  return std::pow(q.t, -q.d / lambda) * std::pow(bracket, (q.p - 1.0) / (q.p - 2.0));
}

/// Radius of the support of the Barenblatt profile for p > 2 (infinite otherwise).
inline double barenblatt_support_radius(int d, double p, double t) {
  if (!(p > 2.0)) return INFINITY;
  const double lambda = d * (p - 2.0) + p;
  const double cp = std::pow(1.0 / lambda, 1.0 / (p - 1.0)) * (2.0 - p) / p;
  return std::pow(-1.0 / cp, (p - 1.0) / p) * std::pow(t, 1.0 / lambda);
}

/// Heat kernel (4 pi t)^{-d/2} exp(-|x|^2/(4t)), the p = 2 counterpart.
inline double heat_kernel(int d, double radius, double t) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be > 0");
  return std::pow(4.0 * M_PI * t, -0.5 * d) * std::exp(-radius * radius / (4.0 * t));
}

}  // namespace nlsg
