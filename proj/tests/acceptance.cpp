// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
//   acceptance [--threads N]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "nlsg/config.hpp"
#include "nlsg/harness.hpp"

using namespace nlsg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string source(const std::string& rel) { return std::string(NLSG_SOURCE_DIR) + "/" + rel; }

}  // namespace

int main(int argc, char** argv) {
  int threads = 1;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      threads = std::max(1, std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--threads N]\n");
      return 2;
    }
  }

  // the three closed-form criteria share one evaluation
  Report exps;
  bool exps_done = false;
  auto exponent_metrics = [&]() -> const json& {
    if (!exps_done) {
      exps = exponent_suite({});
      exps_done = true;
    }
    return exps.metrics;
  };

  std::vector<Criterion> criteria{
      {1, "exponent-Barenblatt identity", 1.0,
       [&] {
         const auto& m = exponent_metrics();
         const double dev = m["barenblatt_identity_max_dev"];
         return Outcome{m["all_cases_valid"].get<bool>() && dev <= 1e-12, "max dev " + fmt("%.3g", dev)};
       }},
      {2, "heat reduction and m = 1 overlap", 1.0,
       [&] {
         const auto& m = exponent_metrics();
         const double heat = m["heat_reduction_max_dev"], overlap = m["doubly_nonlinear_overlap_max_dev"];
         return Outcome{heat <= 1e-12 && overlap <= 1e-12,
                        "heat dev " + fmt("%.3g", heat) + ", overlap dev " + fmt("%.3g", overlap)};
       }},
      {3, "iteration sequence laws", 1.0,
       [&] {
         const auto& m = exponent_metrics();
         const double err = m["sequence_closed_form_max_rel_err"], lim = m["limit_ratio_max_dev"];
         const int mism = m["monotone_flag_mismatches"];
         return Outcome{err <= 1e-10 && lim <= 1e-6 && mism == 0,
                        "closed form rel err " + fmt("%.3g", err) + ", limit dev " + fmt("%.3g", lim) +
                            ", monotone mismatches " + std::to_string(mism)};
       }},
      {4, "resolvent contraction and order", 60.0,
       [&] {
         ContractionOptions o;
         o.threads = threads;
         const auto c = contraction_suite(o);
         const auto r = order_suite(o);
         return Outcome{c.pass && r.pass, "contraction violations " + c.metrics["violations"].dump() +
                                              ", order violations " + r.metrics["violations"].dump() + " over " +
                                              c.metrics["pairs"].dump() + " pairs"};
       }},
      {5, "exponential formula convergence", 30.0,
       [&] {
         const auto r = convergence_study({});
         return Outcome{r.pass, "gap ratios " + r.metrics["gap_ratios"].dump() + ", error ratios " +
                                    r.metrics["error_ratios"].dump()};
       }},
      {6, "decay exponent, p = 3, d = 1", 600.0,
       [&] {
         const auto r = run_decay_experiment(load_config(source("configs/p3_d1.cfg"), {}));
         const double r2 = r.metrics["r2"];
         return Outcome{r.pass && r2 >= 0.98, "alpha_hat " + fmt("%.5f", r.metrics["alpha_hat"].get<double>()) +
                                                  ", rel err " + fmt("%.4f", r.metrics["rel_err"].get<double>()) +
                                                  ", r2 " + fmt("%.6f", r2)};
       }},
      {7, "Barenblatt tracking", 300.0,
       [&] {
         const auto r = barenblatt_comparison({});
         return Outcome{r.pass, "rel L1 error " + fmt("%.3g", r.metrics["rel_l1_error"].get<double>()) +
                                    ", refinement ratio " +
                                    fmt("%.3f", r.metrics["refinement_ratio"].is_null()
                                                    ? 0.0
                                                    : r.metrics["refinement_ratio"].get<double>())};
       }},
      {8, "conservation and monotone norms", 600.0,
       [&] {
         ConservationOptions o;
         o.threads = threads;
         const auto r = conservation_suite(o);
         return Outcome{r.pass, "mass drift/time " + fmt("%.3g", r.metrics["max_mass_drift_per_time"].get<double>()) +
                                    ", max norm increase " +
                                    fmt("%.3g", r.metrics["max_norm_increase"].get<double>())};
       }},
      {9, "empirical Gagliardo-Nirenberg ratio", 600.0,
       [&] {
         GnOptions o;
         o.threads = threads;
         const auto r = gn_suite(o);
         return Outcome{r.pass, "sup ratios " + r.metrics["grids"].dump() + ", spread " +
                                    r.metrics["sup_spread"].dump()};
       }},
      {10, "porous medium decay, m = 2", 600.0,
       [&] {
         const auto r = run_decay_experiment(load_config(source("configs/porous_m2_d1.cfg"), {}), "porous");
         return Outcome{r.pass && r.metrics["tol"].get<double>() <= 0.20,
                        "alpha_hat " + fmt("%.5f", r.metrics["alpha_hat"].get<double>()) + " vs " +
                            fmt("%.5f", r.metrics["alpha_predicted"].get<double>()) + ", rel err " +
                            fmt("%.4f", r.metrics["rel_err"].get<double>())};
       }},
  };

  bool all = true;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::printf("[%s] %d %s: %s (%.2f s of %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : " over budget");
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
