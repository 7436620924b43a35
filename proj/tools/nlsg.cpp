// nlsg: exponent queries, iteration sequences, simulations and verification suites.
//
//   nlsg exponents --theorem plaplace --d 3 --p 2 --s 1 --m0 2
//   nlsg sequence --kind iteration --kappa 2 --r 1 --gamma 1 --m0 1 --n 5
//   nlsg simulate --config configs/p3_d1.cfg --out traj.csv
//   nlsg verify decay --config configs/p3_d1.cfg
//   nlsg all --threads 4
//
// Data goes to stdout, diagnostics to stderr. Exit status: 0 success, 1 failed
// verification or solver failure, 2 usage error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlsg/harness.hpp"
#include "nlsg/io.hpp"

namespace {

using nlsg::json;

constexpr int kUsage = 2;
constexpr int kFailure = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json conditions_json(const nlsg::Conditions& cs) {
  json out = json::object();
  for (const auto& c : cs) out[c.name] = c.holds;
  return out;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json sexponents_json(const json& inputs, const nlsg::SExponents& e) {
  json out{{"inputs", inputs},
           {"case", e.case_label},
           {"valid", e.valid},
           {"alpha", number_or_null(e.alpha_s)},
           {"beta", number_or_null(e.beta_s)},
           {"gamma", number_or_null(e.gamma_s)},
           {"conditions", conditions_json(e.conditions)}};
  if (std::isfinite(e.theta_s)) out["theta_s"] = e.theta_s;
  if (e.constant) out["constant"] = number_or_null(*e.constant);
  if (e.star)
    out["star"] = {{"alpha", e.star->alpha}, {"beta", e.star->beta}, {"gamma", e.star->gamma}};
  return out;
}

nlsg::BoundaryKind parse_bc(const std::string& s) {
  if (s == "dirichlet") return nlsg::BoundaryKind::Dirichlet;
  if (s == "neumann") return nlsg::BoundaryKind::Neumann;
  if (s == "robin") return nlsg::BoundaryKind::Robin;
  throw UsageError("--bc must be dirichlet, neumann or robin");
}

struct ExponentArgs {
  std::string theorem;
  std::optional<double> q, sigma, rho, omega, c, gamma, alpha, beta, m0, s, p, m, q0, kappa, theta, sfrac;
  std::optional<std::string> r;
  std::optional<int> d;
  std::string bc = "dirichlet";
};

template <class T>
T need(const std::optional<T>& v, const char* flag) {
  if (!v) throw UsageError(std::string("missing ") + flag);
  return *v;
}

json run_exponents(const ExponentArgs& a) {
  json in = json::object();
  auto put = [&](const char* k, const auto& v) {
    if (v) in[k] = *v;
  };
  put("q", a.q); put("r", a.r); put("sigma", a.sigma); put("rho", a.rho); put("omega", a.omega);
  put("c", a.c); put("gamma", a.gamma); put("alpha", a.alpha); put("beta", a.beta); put("m0", a.m0);
  put("s", a.s); put("d", a.d); put("p", a.p); put("m", a.m); put("q0", a.q0); put("kappa", a.kappa);
  put("theta", a.theta); put("sfrac", a.sfrac);
  in["theorem"] = a.theorem;

  const std::string& t = a.theorem;
  if (t == "gn") {
    nlsg::GNParams g;
    g.q = need(a.q, "--q");
    g.sigma = need(a.sigma, "--sigma");
    g.rho = a.rho.value_or(0.0);
    g.omega = a.omega.value_or(0.0);
    g.c = a.c.value_or(1.0);
    g.validate();
    const auto e = nlsg::smoothing_exponents(g);
    return {{"inputs", in}, {"case", "gn"}, {"valid", true}, {"alpha", e.alpha}, {"beta", e.beta},
            {"gamma", e.gamma}, {"conditions", json::object()}};
  }
  if (t == "infinity") {
    const auto e = nlsg::extrapolate_to_infinity(need(a.q, "--q"), nlsg::LebesgueIndex::parse(need(a.r, "--r")),
                                                 need(a.gamma, "--gamma"), need(a.alpha, "--alpha"),
                                                 need(a.beta, "--beta"), need(a.m0, "--m0"));
    return {{"inputs", in},
            {"case", "infinity"},
            {"valid", e.valid},
            {"alpha", number_or_null(e.alpha_star)},
            {"beta", number_or_null(e.beta_star)},
            {"gamma", number_or_null(e.gamma_star)},
            {"conditions", conditions_json(e.conditions)}};
  }
  if (t == "s")
    return sexponents_json(in, nlsg::extrapolate_to_s(need(a.q, "--q"), nlsg::LebesgueIndex::parse(need(a.r, "--r")),
                                                      need(a.gamma, "--gamma"), need(a.alpha, "--alpha"),
                                                      need(a.beta, "--beta"), need(a.s, "--s"), a.c.value_or(1.0)));
  if (t == "plaplace")
    return sexponents_json(in, nlsg::plaplace_exponents(need(a.d, "--d"), need(a.p, "--p"), parse_bc(a.bc),
                                                        need(a.s, "--s"), a.m0, a.theta));
  if (t == "doubly-nonlinear")
    return sexponents_json(in, nlsg::doubly_nonlinear_exponents(need(a.d, "--d"), need(a.p, "--p"), need(a.m, "--m"),
                                                                need(a.s, "--s"), a.q0 ? a.q0 : a.m0, a.theta));
  if (t == "dtn")
    return sexponents_json(in, nlsg::dtn_exponents(need(a.d, "--d"), need(a.p, "--p"), need(a.s, "--s"), a.m0, a.theta));
  if (t == "fractional")
    return sexponents_json(in, nlsg::fractional_exponents(need(a.d, "--d"), need(a.p, "--p"), need(a.sfrac, "--sfrac"),
                                                          need(a.s, "--s"), a.m0, a.theta));
  if (t == "moser")
    return sexponents_json(in, nlsg::moser_exponents(need(a.kappa, "--kappa"), need(a.m, "--m"), need(a.p, "--p"),
                                                     need(a.q0, "--q0"), need(a.s, "--s")));
  if (t == "barenblatt") {
    const double v = nlsg::barenblatt_exponent(need(a.d, "--d"), need(a.p, "--p"));
    return {{"inputs", in}, {"case", "barenblatt"}, {"valid", true}, {"alpha", v}, {"beta", nullptr},
            {"gamma", nullptr}, {"conditions", json::object()}};
  }
  throw UsageError("unknown --theorem '" + t + "'");
}

struct CommonArgs {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<double> tol;
  std::vector<std::string> overrides;
};

nlsg::ExperimentConfig load(const CommonArgs& c, nlsg::ExperimentConfig defaults = {}) {
  auto cfg = nlsg::load_config(c.config, c.overrides, defaults);
  if (c.seed) cfg.seed = *c.seed;
  if (c.tol) cfg.tol = *c.tol;
  return cfg;
}

std::vector<nlsg::Report> run_suite(const std::string& name, const CommonArgs& c) {
  const bool configured = c.config || !c.overrides.empty();
  const nlsg::ExperimentConfig cfg = load(c);
  const std::uint64_t seed = cfg.seed;
  const int trials = configured ? cfg.trials : 100;

  if (name == "exponents") {
    nlsg::ExponentSuiteOptions o;
    o.seed = seed;
    return {nlsg::exponent_suite(o)};
  }
  if (name == "contraction" || name == "order") {
    nlsg::ContractionOptions o;
    o.seed = seed;
    o.trials = trials;
    o.threads = c.threads;
    return {name == "contraction" ? nlsg::contraction_suite(o) : nlsg::order_suite(o)};
  }
  if (name == "gn") {
    nlsg::GnOptions o;
    o.seed = seed;
    o.trials = trials;
    o.threads = c.threads;
    return {nlsg::gn_suite(o)};
  }
  if (name == "conservation") {
    nlsg::ConservationOptions o;
    o.seed = seed;
    o.threads = c.threads;
    return {nlsg::conservation_suite(o)};
  }
  if (name == "convergence") return {nlsg::convergence_study({})};
  if (name == "decay") return {nlsg::run_decay_experiment(cfg)};
  if (name == "porous") {
    auto pm = cfg;
    if (!configured) {
      pm.p = 2.0;
      pm.phi = "power";
      pm.phi_m = 2.0;
      pm.tol = c.tol.value_or(0.20);
    }
    return {nlsg::run_decay_experiment(pm, "porous")};
  }
  if (name == "barenblatt") {
    nlsg::BarenblattOptions o;
    if (configured) {
      o.p = cfg.p;
      o.n = cfg.nx;
      o.lo = cfg.xlo;
      o.hi = cfg.xhi;
      o.t0 = cfg.initial_t;
      o.t1 = cfg.initial_t + cfg.t_end;
      o.steps = cfg.steps;
      o.eps_reg = cfg.eps_reg;
    }
    if (c.tol) o.tol = *c.tol;
    return {nlsg::barenblatt_comparison(o)};
  }
  if (name == "all") {
    std::vector<nlsg::Report> all;
    CommonArgs plain = c;
    plain.config.reset();
    plain.overrides.clear();
    plain.tol.reset();
    for (const char* s : {"barenblatt", "conservation", "contraction", "convergence", "decay", "exponents", "gn",
                          "order", "porous"}) {
      std::cerr << "running " << s << "\n";
      for (auto& r : run_suite(s, plain)) all.push_back(std::move(r));
    }
    return all;
  }
  throw UsageError("unknown suite '" + name + "'");
}

int emit_reports(const std::vector<nlsg::Report>& reports, const CommonArgs& c) {
  json arr = json::array();
  bool pass = true;
  for (const auto& r : reports) {
    arr.push_back(nlsg::to_json(r));
    pass = pass && r.pass;
    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.name << "\n";
  }
  const std::string text = arr.dump(2) + "\n";
  if (c.out) {
    std::ofstream f(*c.out);
    if (!f) throw UsageError("cannot write '" + *c.out + "'");
    f << text;
  } else {
    std::cout << text;
  }
  return pass ? 0 : kFailure;
}

int run_simulate(const CommonArgs& c, const std::optional<std::string>& snapshot_dir) {
  if (!c.out) throw UsageError("simulate requires --out");
  const auto cfg = load(c);
  const auto spec = cfg.make_spec();
  const auto u0 = nlsg::initial_datum(cfg, spec.grid);
  const auto tr = nlsg::evolve(spec, u0, cfg.make_time_grid());
  std::ofstream f(*c.out, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + *c.out + "'");
  nlsg::write_trajectory_csv(f, tr);
  if (snapshot_dir) {
    std::filesystem::create_directories(*snapshot_dir);
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      const auto path = std::filesystem::path(*snapshot_dir) / ("snapshot_" + std::to_string(i) + ".csv");
      nlsg::save_grid_function(path.string(), spec.grid, tr.snapshots[i].u);
    }
  }
  std::cerr << "wrote " << tr.records.size() << " records, config " << nlsg::config_hash(cfg) << "\n";
  return 0;
}

void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--threads", c.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", c.tol, "pass tolerance override");
  cmd->add_option("overrides", c.overrides, "section.key=value config overrides");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear semigroups: smoothing exponents and verification"};
  app.require_subcommand(1);

  ExponentArgs ea;
  auto* exp = app.add_subcommand("exponents", "evaluate an exponent formula");
  exp->add_option("--theorem", ea.theorem,
                  "gn | infinity | s | plaplace | doubly-nonlinear | dtn | fractional | moser | barenblatt")
      ->required();
  exp->add_option("--q", ea.q);
  exp->add_option("--r", ea.r, "output index, 'inf' allowed");
  exp->add_option("--sigma", ea.sigma);
  exp->add_option("--rho", ea.rho);
  exp->add_option("--omega", ea.omega);
  exp->add_option("--c", ea.c);
  exp->add_option("--gamma", ea.gamma);
  exp->add_option("--alpha", ea.alpha);
  exp->add_option("--beta", ea.beta);
  exp->add_option("--m0", ea.m0);
  exp->add_option("--s", ea.s);
  exp->add_option("--d", ea.d);
  exp->add_option("--p", ea.p);
  exp->add_option("--m", ea.m);
  exp->add_option("--q0", ea.q0);
  exp->add_option("--kappa", ea.kappa);
  exp->add_option("--theta", ea.theta);
  exp->add_option("--sfrac", ea.sfrac);
  exp->add_option("--bc", ea.bc)->check(CLI::IsMember({"dirichlet", "neumann", "robin"}));

  std::string kind = "iteration";
  double kappa = 0, r = 0, gamma = 0, m0 = 0, p = 0, m = 0, q0 = 0;
  int n = 0;
  auto* seq = app.add_subcommand("sequence", "iteration index sequences");
  seq->add_option("--kind", kind)->check(CLI::IsMember({"iteration", "moser"}));
  seq->add_option("--kappa", kappa)->required();
  seq->add_option("--r", r);
  seq->add_option("--gamma", gamma);
  seq->add_option("--m0", m0);
  seq->add_option("--p", p);
  seq->add_option("--m", m);
  seq->add_option("--q0", q0);
  seq->add_option("--n", n)->required()->check(CLI::NonNegativeNumber);

  CommonArgs sim_args, verify_args, all_args;
  std::optional<std::string> snapshot_dir;
  auto* sim = app.add_subcommand("simulate", "evolve the configured initial datum, write the trajectory CSV");
  add_common(sim, sim_args);
  sim->add_option("--snapshots", snapshot_dir, "directory for snapshot CSV files");

  std::string suite;
  auto* ver = app.add_subcommand("verify", "run one verification suite");
  ver->add_option("suite", suite,
                  "exponents | contraction | order | gn | conservation | convergence | decay | porous | barenblatt | all")
      ->required();
  add_common(ver, verify_args);

  auto* all = app.add_subcommand("all", "run every verification suite");
  add_common(all, all_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*exp) {
      std::cout << run_exponents(ea).dump(2) << "\n";
      return 0;
    }
    if (*seq) {
      const auto s = kind == "iteration" ? nlsg::iteration_sequence(kappa, r, gamma, m0, n)
                                         : nlsg::moser_sequence(kappa, p, m, q0, n);
      json out{{"kind", kind},
               {"values", s.values},
               {"closed_form", s.closed_form},
               {"monotone", s.monotone},
               {"limit_ratio", s.limit_ratio}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*sim) return run_simulate(sim_args, snapshot_dir);
    if (*ver) return emit_reports(run_suite(suite, verify_args), verify_args);
    if (*all) return emit_reports(run_suite("all", all_args), all_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlsg::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlsg::NonConvergence& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
