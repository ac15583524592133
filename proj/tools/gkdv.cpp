#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gkdv/evolve.hpp"
#include "gkdv/lab.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/profiles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gkdv;

namespace {

constexpr int kOk = 0;
constexpr int kIoError = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

// Thrown for bad flag combinations that CLI11 cannot express.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

// ---- profiles ----

struct ProfilesArgs {
  double L = 60.0;
  std::size_t n = 4096;
  double b = 0.05;
  std::string out;
};

int cmd_profiles(const ProfilesArgs& a) {
  const ProfileSet p = make_profiles(Grid1D(a.L, a.n));
  const LocalizedProfile lp = build_Qb(a.b, p);
  const GridField psi = build_PsiB(lp, p);
  fs::create_directories(a.out);
  const fs::path dir(a.out);
  write_csv(dir / "Q.csv", p.Q);
  write_csv(dir / "P.csv", p.P);
  write_csv(dir / "Qb.csv", lp.Qb);
  write_csv(dir / "PsiB.csv", psi);
  const json j{{"L", a.L},
               {"n", a.n},
               {"b", a.b},
               {"intQ", p.intQ},
               {"intQ2", p.intQ2},
               {"PQ", p.PQ},
               {"PQ_prime", p.PQprime},
               {"P_left", p.Pleft},
               {"residuals", {{"ground_state", p.ground_state_residual}, {"P", p.P_residual}}}};
  write_json(dir / "identities.json", j);
  std::cout << j.dump(2) << '\n';
  return kOk;
}

// ---- evolve ----

struct EvolveArgs {
  std::string in;
  std::optional<double> b0;
  double L = 60.0;
  std::size_t n = 2048;
  double t_max = 1.0;
  double dt = 1e-3;
  double cfl = 0.5;
  double sponge = 0.0;
  double frame_velocity = 0.0;
  std::size_t every = 10;
  std::string out;
};

int cmd_evolve(const EvolveArgs& a) {
  if (a.in.empty() == !a.b0) throw UsageError("evolve: give exactly one of --in and --b0");
  GridField u0 = a.in.empty() ? build_Qb(*a.b0, make_profiles(Grid1D(a.L, a.n))).Qb
                              : read_checkpoint(a.in);
  SolverConfig cfg;
  cfg.dt_initial = a.dt;
  cfg.cfl_safety = a.cfl;
  cfg.t_max = a.t_max;
  cfg.sponge_strength = a.sponge;
  cfg.frame_velocity = a.frame_velocity;
  cfg.validate();

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  std::ofstream csv(dir / "conserved.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "conserved.csv").string());
  csv << "t,mass,energy,h1,max_u\n";
  csv.precision(17);
  std::size_t k = 0;
  const RunOutcome res = run(u0, cfg, [&](const FlowState& s) {
    if (k++ % a.every == 0) csv << s.t << ',' << s.mass << ',' << s.energy << ',' << s.h1_norm << ',' << s.max_u << '\n';
    return ObserverReply{};
  });
  const FlowState& f = res.final_state;
  csv << f.t << ',' << f.mass << ',' << f.energy << ',' << f.h1_norm << ',' << f.max_u << '\n';
  write_checkpoint(dir / "final.bin", f.u);
  const json j{{"status", to_string(res.status)},
               {"message", res.message},
               {"t", f.t},
               {"steps", res.steps},
               {"T_est", res.T_est ? json(*res.T_est) : json(nullptr)},
               {"mass", f.mass},
               {"energy", f.energy},
               {"h1", f.h1_norm},
               {"sponge_mass_loss", res.sponge_mass_loss}};
  write_json(dir / "summary.json", j);
  std::cout << j.dump(2) << '\n';
  return res.status == RunStatus::Unstable ? kNumericalFailure : kOk;
}

// ---- decompose ----

struct DecomposeArgs {
  std::vector<std::string> in;
  double alpha_star = 0.04;
  double s = 0.0;
  std::string out;
};

json decompose_json(const GridField& u, double alpha_star, double s) {
  const ModulationBasis basis = make_modulation_basis(make_profiles(u.grid()));
  DecomposeOptions opt;
  opt.alpha_star = alpha_star;
  ModulationState ms = decompose(u, basis, std::nullopt, opt);
  ms.s = s;
  const FunctionalReport f = functionals(ms, make_weights(u.grid()), basis);
  return {{"lambda", ms.lambda},
          {"b", ms.b},
          {"x", ms.x_center},
          {"s", ms.s},
          {"residuals", ms.residual_history},
          {"iterations", ms.iterations},
          {"eps_l2", ms.eps_l2},
          {"N", num(f.N_norm)},
          {"Nloc", num(f.N_loc)},
          {"F1", num(f.F1)},
          {"F2", num(f.F2)},
          {"J1", num(f.J1)},
          {"J2", num(f.J2)},
          {"lambda0", num(f.lambda0)},
          {"b_over_lambda2", num(f.b_over_lambda2)},
          {"right_tail_w10", num(f.right_tail_w10)}};
}

int cmd_decompose(const DecomposeArgs& a) {
  if (a.in.size() == 1) {
    const json j = decompose_json(read_checkpoint(a.in[0]), a.alpha_star, a.s);
    if (a.out.empty()) {
      std::cout << j.dump(2) << '\n';
    } else {
      write_json(a.out, j);
    }
    return kOk;
  }
  // Several checkpoints: one CSV row per sample, in the order given.
  if (a.out.empty()) throw UsageError("decompose: --out is required with several inputs");
  std::ofstream csv(a.out);
  if (!csv) throw std::runtime_error("cannot write " + a.out);
  csv << "file,lambda,b,x,residual,N,Nloc,F1,F2,J1,J2,lambda0,b_over_lambda2,tail_w10\n";
  csv.precision(17);
  for (const auto& path : a.in) {
    const json j = decompose_json(read_checkpoint(path), a.alpha_star, a.s);
    csv << path;
    csv << ',' << j["lambda"].get<double>() << ',' << j["b"].get<double>() << ',' << j["x"].get<double>() << ','
        << j["residuals"].back().get<double>();
    for (const char* key : {"N", "Nloc", "F1", "F2", "J1", "J2", "lambda0", "b_over_lambda2", "right_tail_w10"})
      csv << ',' << (j[key].is_null() ? std::string("nan") : j[key].dump());
    csv << '\n';
  }
  return kOk;
}

// ---- experiment ----

struct ExperimentArgs {
  std::string config;
  std::string id;
  std::optional<double> b0;
  std::optional<double> alpha_star;
  std::optional<double> L;
  std::optional<std::size_t> n;
  std::optional<double> t_max;
  std::optional<double> decompose_ds;
  std::optional<double> perturbation;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> ladder;
  std::optional<double> tau_end;
  std::optional<double> lambda_stop;
  std::string out;
};

ExperimentConfig build_config(const ExperimentArgs& a) {
  ExperimentConfig c;
  if (!a.config.empty()) c = load_config(a.config);
  if (!a.id.empty()) {
    std::istringstream in("id = " + a.id);
    c.id = parse_config(in).id;
  } else if (a.config.empty()) {
    throw ConfigError("id", "id: required (--id or a config file)");
  }
  if (a.b0) c.b0 = *a.b0;
  if (a.alpha_star) c.alpha_star = *a.alpha_star;
  if (a.L) c.grid.length = *a.L;
  if (a.n) c.grid.size = *a.n;
  if (a.t_max) c.solver.t_max = *a.t_max;
  if (a.decompose_ds) c.solver.decompose_ds = *a.decompose_ds;
  if (a.perturbation) c.perturbation = *a.perturbation;
  if (a.seed) c.seed = *a.seed;
  if (a.ladder) {
    std::istringstream in("id = minimal_mass_construction\nladder = " + *a.ladder);
    c.ladder = parse_config(in).ladder;
  }
  if (a.tau_end) c.tau_end = *a.tau_end;
  if (a.lambda_stop) c.lambda_stop = *a.lambda_stop;
  c.output_dir = a.out;
  c.validate();
  return c;
}

int cmd_experiment(const ExperimentArgs& a) {
  const ExperimentConfig c = build_config(a);
  const fs::path dir(c.output_dir);
  if (c.id == ExperimentId::MinimalMassConstruction) {
    const LadderReport rep = run_minimal_mass_construction(c);
    write_ladder_report(rep, dir);
    std::printf("ladder: %zu runs, tau window [%g, %g], decreasing %s\n", rep.runs.size(), rep.tau_window.first,
                rep.tau_window.second, rep.decreasing ? "yes" : "no");
    for (const auto& g : rep.gaps) std::printf("gap: %s\n", g.c_str());
    for (const auto& r : rep.runs)
      if (r.numerical_failure) return kNumericalFailure;
    return kOk;
  }
  RunRecord r;
  switch (c.id) {
    case ExperimentId::SolitonSanity: r = run_soliton_sanity(c); break;
    case ExperimentId::DefocusExit: r = run_defocus_exit(c); break;
    case ExperimentId::FocusBlowup: r = run_focus_blowup(c); break;
    case ExperimentId::FunctionalAudit: r = run_functional_audit(c); break;
    case ExperimentId::MinimalMassConstruction: break;
  }
  write_run_record(r, dir);
  std::printf("%s: %s (%s)\n", to_string(c.id), to_string(r.outcome), r.detail.c_str());
  return r.numerical_failure ? kNumericalFailure : kOk;
}

// ---- report ----

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return json::parse(in);
}

int cmd_report(const std::string& in) {
  const fs::path dir(in);
  if (fs::exists(dir / "ladder.json")) {
    const json l = read_json(dir / "ladder.json");
    std::cout << "ladder n = " << l["n"].dump() << "\n"
              << "  tau window   " << l["tau_window"].dump() << "\n"
              << "  consecutive  " << l["consecutive"].dump() << "\n"
              << "  decreasing   " << l["decreasing"].dump() << "\n"
              << "  slopes       " << l["slopes"].dump() << "\n"
              << "  gaps         " << l["gaps"].dump() << "\n";
    return kOk;
  }
  const json o = read_json(dir / "outcome.json");
  const json f = read_json(dir / "fits.json");
  const auto rows = read_series_csv(dir / "series.csv");
  std::cout << o["experiment"].get<std::string>() << ": " << o["outcome"].get<std::string>() << "\n  "
            << o["detail"].get<std::string>() << "\n";
  if (!rows.empty()) {
    const auto &a = rows.front(), &b = rows.back();
    std::printf("  samples %zu, t in [%g, %g], s in [%g, %g]\n", rows.size(), a.t, b.t, a.s, b.s);
    std::printf("  lambda %g -> %g, b %g -> %g\n", a.lambda, b.lambda, a.b, b.b);
    std::printf("  mass %.12g -> %.12g\n", a.mass, b.mass);
  }
  if (!f["exit"].is_null()) std::cout << "  exit " << f["exit"].dump() << "\n";
  if (!f["laws"].is_null()) {
    const json& l = f["laws"];
    std::cout << "  laws T = " << l["T_blowup"] << ", ell* = " << l["ell_star"] << ", grad exponent = "
              << l["grad_exponent"] << ", b/lambda^2 spread = " << l["b_over_lambda2_spread"] << "\n";
  }
  if (!f["audit"].is_null()) std::cout << "  audit " << f["audit"].dump() << "\n";
  if (!f["audit_refusal"].is_null()) std::cout << "  audit refused: " << f["audit_refusal"].get<std::string>() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the critical generalized KdV equation"};
  app.require_subcommand(1);

  ProfilesArgs pa;
  auto* prof = app.add_subcommand("profiles", "Q, P, Q_b, Psi_b as CSV plus an identity report");
  prof->add_option("--L", pa.L, "box length")->capture_default_str();
  prof->add_option("--n", pa.n, "grid size")->capture_default_str();
  prof->add_option("--b", pa.b, "b for Q_b and Psi_b")->capture_default_str();
  prof->add_option("--out", pa.out, "output directory")->required();

  EvolveArgs ea;
  auto* evo = app.add_subcommand("evolve", "integrate a checkpoint or Q_b");
  evo->add_option("--in", ea.in, "input checkpoint");
  evo->add_option("--b0", ea.b0, "start from Q_b instead of a checkpoint");
  evo->add_option("--L", ea.L, "box length with --b0")->capture_default_str();
  evo->add_option("--n", ea.n, "grid size with --b0")->capture_default_str();
  evo->add_option("--t-max", ea.t_max)->capture_default_str();
  evo->add_option("--dt", ea.dt, "initial step")->capture_default_str();
  evo->add_option("--cfl", ea.cfl)->capture_default_str();
  evo->add_option("--sponge", ea.sponge, "sponge strength")->capture_default_str();
  evo->add_option("--frame-velocity", ea.frame_velocity)->capture_default_str();
  evo->add_option("--every", ea.every, "conserved.csv stride in steps")->capture_default_str();
  evo->add_option("--out", ea.out, "output directory")->required();

  DecomposeArgs da;
  auto* dec = app.add_subcommand("decompose", "modulation parameters and functionals of checkpoints");
  dec->add_option("--in", da.in, "checkpoint(s)")->required();
  dec->add_option("--alpha-star", da.alpha_star)->capture_default_str();
  dec->add_option("--s", da.s, "rescaled time to record")->capture_default_str();
  dec->add_option("--out", da.out, "JSON for one input, CSV for several");

  ExperimentArgs xa;
  auto* exp = app.add_subcommand("experiment", "run a named experiment");
  exp->add_option("--config", xa.config, "key-value config file; flags override it");
  exp->add_option("--id", xa.id, "soliton_sanity | defocus_exit | focus_blowup | minimal_mass_construction | functional_audit");
  exp->add_option("--b0", xa.b0);
  exp->add_option("--alpha-star", xa.alpha_star);
  exp->add_option("--L", xa.L, "box length (default: per experiment)");
  exp->add_option("--n", xa.n, "grid size (default: per experiment)");
  exp->add_option("--t-max", xa.t_max);
  exp->add_option("--decompose-ds", xa.decompose_ds);
  exp->add_option("--perturbation", xa.perturbation);
  exp->add_option("--seed", xa.seed);
  exp->add_option("--ladder", xa.ladder, "comma-separated n for minimal_mass_construction");
  exp->add_option("--tau-end", xa.tau_end);
  exp->add_option("--lambda-stop", xa.lambda_stop);
  exp->add_option("--out", xa.out, "output directory")->required();

  std::string report_in;
  auto* rep = app.add_subcommand("report", "summarize a run directory");
  rep->add_option("--in", report_in, "run or ladder directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kConfigError;
  }

  try {
    if (*prof) return cmd_profiles(pa);
    if (*evo) return cmd_evolve(ea);
    if (*dec) return cmd_decompose(da);
    if (*exp) return cmd_experiment(xa);
    if (*rep) return cmd_report(report_in);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const DecompositionError& e) {
    std::cerr << "decomposition failed: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kConfigError;
}
