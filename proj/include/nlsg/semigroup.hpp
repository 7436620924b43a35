#pragma once
// Mild solutions by uniform implicit-Euler partitions and the exponential formula.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "nlsg/resolvent.hpp"

namespace nlsg {

struct TimeGrid {
  double t_end = 1.0;
  long steps = 1;
  int max_snapshots = 64;

  double dt() const { return t_end / static_cast<double>(steps); }
  void validate() const {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("TimeGrid: t_end must be > 0");
    if (steps < 1) throw DomainError("TimeGrid: at least one step");
    if (max_snapshots < 2) throw DomainError("TimeGrid: at least two snapshots");
  }
};

struct NormRecord {
  double t = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double mass = 0.0;
  long support_margin = 0;  // cells between the numerical support and the boundary; -1 if u = 0
};

struct Snapshot {
  double t = 0.0;
  GridFunction u;
};

struct Trajectory {
  std::vector<NormRecord> records;  // one per step, including t = 0
  std::vector<Snapshot> snapshots;  // geometric in the step index, at most TimeGrid::max_snapshots
  GridFunction final_state;
  long newton_iterations = 0;
  long fallback_steps = 0;
  double max_residual = 0.0;
};

/// Cells between the set {|u| > rel * ||u||_inf} and the nearest boundary node.
inline long support_margin(const Grid& grid, const GridFunction& u, double rel = 1e-12) {
  double m = 0.0;
  for (double v : u.values()) m = std::max(m, std::abs(v));
  if (m == 0.0) return -1;
  const double thr = rel * m;
  long margin = std::numeric_limits<long>::max();
  const int nx = grid.nodes(0);
  const int ny = grid.dim() == 2 ? grid.nodes(1) : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!(std::abs(u[grid.index(i, j)]) > thr)) continue;
      long d = std::min(i, nx - 1 - i);
      if (grid.dim() == 2) d = std::min<long>(d, std::min(j, ny - 1 - j));
      margin = std::min(margin, d);
    }
  return margin;
}

inline NormRecord measure_state(const Grid& grid, double t, const GridFunction& u) {
  return {t,
          lq_norm(u, 1.0),
          lq_norm(u, 2.0),
          lq_norm(u, LebesgueIndex::infinity()),
          integral(u),
          support_margin(grid, u)};
}

namespace detail {
/// 0, steps and roughly geometric indices in between, at most `count` in total.
inline std::set<long> snapshot_steps(long steps, int count) {
  std::set<long> out{0, steps};
  if (count <= 2 || steps <= 1) return out;
  const int inner = count - 2;
  for (int k = 0; k < inner; ++k) {
    const double e = static_cast<double>(k) / std::max(1, inner - 1);
    const long s = std::lround(std::pow(static_cast<double>(steps), e));
    if (s > 0 && s < steps) out.insert(s);
  }
  return out;
}
}  // namespace detail

/// u_i = J_dt(u_{i-1}), i = 1..N, from `t0`. Norms are recorded at every step.
inline Trajectory evolve(const ResolventSolver& solver, const GridFunction& u0, const TimeGrid& tg, double t0 = 0.0) {
  tg.validate();
  solver.op().check(u0);
  const Grid& grid = solver.op().grid();
  const double dt = tg.dt();
  const auto snaps = detail::snapshot_steps(tg.steps, tg.max_snapshots);

  Trajectory tr;
  tr.records.reserve(static_cast<std::size_t>(tg.steps) + 1);
  GridFunction u = u0;
  tr.records.push_back(measure_state(grid, t0, u));
  tr.snapshots.push_back({t0, u});
  for (long i = 1; i <= tg.steps; ++i) {
    const double t = t0 + i * dt;
    auto res = solver.solve(dt, u);
    if (!res.converged) throw NonConvergence(res.residual, res.iterations, i, t);
    tr.newton_iterations += res.iterations;
    tr.fallback_steps += res.fallback_steps;
    tr.max_residual = std::max(tr.max_residual, res.residual);
    u = std::move(res.u);
    tr.records.push_back(measure_state(grid, t, u));
    if (snaps.count(i)) tr.snapshots.push_back({t, u});
  }
  tr.final_state = std::move(u);
  return tr;
}

inline Trajectory evolve(const OperatorSpec& spec, const GridFunction& u0, const TimeGrid& tg) {
  return evolve(ResolventSolver(spec), u0, tg);
}

struct ProbeEntry {
  int n = 0;
  GridFunction u;
  double cauchy_gap = NAN;  // ||u_n - u_prev||_1 against the previous entry; NaN for the first
};

/// J_{t/n}^n u0 for each n in `n_list` (strictly increasing).
inline std::vector<ProbeEntry> exponential_formula_probe(const ResolventSolver& solver, const GridFunction& u0,
                                                         double t, const std::vector<int>& n_list) {
  if (!(t > 0.0)) throw DomainError("exponential_formula_probe: t must be > 0");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw DomainError("exponential_formula_probe: n must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1])
      throw DomainError("exponential_formula_probe: n_list must be strictly increasing");
  }
  std::vector<ProbeEntry> out;
  for (int n : n_list) {
    ProbeEntry e;
    e.n = n;
    e.u = resolvent_power(solver, t / n, u0, n);
    if (!out.empty()) e.cauchy_gap = lq_norm(e.u - out.back().u, 1.0);
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ProbeEntry> exponential_formula_probe(const OperatorSpec& spec, const GridFunction& u0, double t,
                                                         const std::vector<int>& n_list) {
  return exponential_formula_probe(ResolventSolver(spec), u0, t, n_list);
}

}  // namespace nlsg
