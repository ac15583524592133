// Runs the ten acceptance criteria at their stated tolerances and prints one
// PASS/FAIL line per criterion, followed by the measured values. Exit status
// is the number of failed criteria.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gkdv/evolve.hpp"
#include "gkdv/lab.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/profiles.hpp"

using namespace gkdv;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  // Records one sub-check; the criterion passes only if all do.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << "\n    [" << (ok ? "ok" : "FAIL") << "] " << what;
  }
  void note(const std::string& what) { detail << "\n    (info) " << what; }
};

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / x.size();
    my += std::log(std::abs(y[i])) / x.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(std::abs(y[i])) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

GridField advance(const GridField& u0, double dt, double t_end) {
  SolverConfig cfg;
  cfg.dt_initial = dt;
  cfg.t_max = t_end;
  Integrator it(u0, cfg);
  const auto steps = static_cast<long>(std::llround(t_end / dt));
  for (long i = 0; i < steps; ++i) it.step(dt);
  return it.field();
}

// ---- 1: profile identities ----

void profile_identities(Verdict& v) {
  const ProfileSet ps = make_profiles(Grid1D(60.0, 4096));
  // Independent int Q by adaptive quadrature of the closed form.
  const double intq =
      2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [](double y) { return std::pow(3.0, 0.25) / std::sqrt(std::cosh(2.0 * y)); }, 0.0,
                std::numeric_limits<double>::infinity(), 15, 1e-14);
  const double rel = std::abs(ps.PQ - intq * intq / 16.0) / ps.PQ;
  v.check(rel < 1e-6, fmt("|(P,Q) - (int Q)^2/16| / (P,Q) = %.2e < 1e-6", rel));
  v.check(std::abs(ps.PQprime) < 1e-8, fmt("|(P,Q')| = %.2e < 1e-8", std::abs(ps.PQprime)));
  v.check(ps.P_residual < 1e-7, fmt("max |(LP)' - Lambda Q| = %.2e < 1e-7", ps.P_residual));
  v.check(ps.ground_state_residual < 1e-10,
          fmt("max |Q'' - Q + Q^5| = %.2e < 1e-10", ps.ground_state_residual));
}

// ---- 2: expansion exponents ----

void expansion_exponents(Verdict& v) {
  const ProfileSet ps = make_profiles(Grid1D(1024.0, 16384));
  const auto& g = ps.grid;
  std::vector<double> bs{1e-3, 3e-3, 1e-2}, dm, de, psi;
  for (double b : bs) {
    const LocalizedProfile lp = build_Qb(b, ps);
    dm.push_back(mass(lp.Qb) - ps.intQ2 - 2.0 * b * ps.PQ);
    de.push_back(energy(lp.Qb) + b * ps.PQ);
    // Cutoff region: the bridge |b|^{3/4} y in [-2, -1].
    const double s = std::pow(b, 0.75);
    double m = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
      if (s * g.x(j) >= -2.0 && s * g.x(j) <= -1.0) m = std::max(m, std::abs(lp.PsiB[j]));
    psi.push_back(m);
  }
  const double pm = log_slope(bs, dm), pe = log_slope(bs, de), pp = log_slope(bs, psi);
  v.check(pm >= 1.25, fmt("mass defect exponent %.4f >= 1.25", pm));
  v.check(pe >= 1.9, fmt("energy defect exponent %.4f >= 1.9", pe));
  v.check(pp >= 1.7, fmt("sup |Psi_b| on the cutoff region exponent %.4f >= 1.7", pp));
  if (pm < 1.25)
    v.note("the mass defect is A|b|^{5/4} + D b^2 with D < 0, so its log-slope sits below 5/4 at every finite b");
}

// ---- 3: solver fidelity ----

void solver_fidelity(Verdict& v) {
  const Grid1D g(60.0, 4096);
  const GridField q = ground_state(g);
  const FlowState s0 = make_flow_state(0.0, q);
  const GridField u = advance(q, 5e-4, 5.0);
  const GridField exact = GridField::sample(g, [](double x) { return ground_state_at(x - 5.0).q; });
  const double err = (u - exact).max_abs();
  v.check(err < 1e-6, fmt("translation error at t = 5: %.2e < 1e-6", err));
  const FlowState s1 = make_flow_state(5.0, u);
  const double dm = std::abs(s1.mass - s0.mass) / s0.mass / 5.0;
  const double de = std::abs(s1.energy - s0.energy) / (s0.grad_norm * s0.grad_norm) / 5.0;
  v.check(dm < 1e-9, fmt("relative mass drift per unit time %.2e < 1e-9", dm));
  v.check(de < 1e-9, fmt("relative energy drift per unit time %.2e < 1e-9 (scale ||Q_x||^2)", de));
  const GridField ref = advance(q, 1.25e-4, 1.0);
  const double e1 = (advance(q, 2e-3, 1.0) - ref).max_abs();
  const double e2 = (advance(q, 1e-3, 1.0) - ref).max_abs();
  v.check(e1 / e2 >= 8.0, fmt("dt-halving error ratio %.2f >= 8", e1 / e2));
}

// ---- 4: decomposition round trip ----

void decomposition_round_trip(Verdict& v) {
  const ModulationBasis mb = make_modulation_basis(make_profiles(Grid1D(128.0, 4096)));
  const Grid1D gx(512.0, 16384);
  double worst = 0.0, worst_res = 0.0;
  int cases = 0;
  for (double lam : {0.5, 1.0, 4.0})
    for (double b : {-0.02, 0.0, 0.02})
      for (double x0 : {-3.0, 0.0, 3.0}) {
        const GridField u = synthesize(mb, gx, lam, b, x0);
        const ModulationState st = decompose(u, mb);
        worst = std::max({worst, std::abs(st.lambda - lam), std::abs(st.b - b), std::abs(st.x_center - x0)});
        const auto r = orthogonality_residuals(u, mb, st.lambda, st.x_center, st.b, ObservationWindow::whole(gx));
        worst_res = std::max({worst_res, std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
        ++cases;
      }
  v.check(cases == 27 && worst < 1e-8, fmt("%g cases, worst parameter error %.2e < 1e-8", cases, worst));
  v.check(worst_res < 1e-10, fmt("worst orthogonality residual %.2e < 1e-10", worst_res));
}

// ---- 5, 6, 9: the defocus run ----

void rigidity(Verdict& v, const RunRecord& r) {
  if (!r.exit) {
    v.check(false, "defocus run did not exit: " + r.detail);
    return;
  }
  v.check(r.exit->rigidity_max <= 0.15,
          fmt("max |b/lambda^2 - b0|/|b0| until exit = %.4f <= 0.15", r.exit->rigidity_max));
}

void exit_laws(Verdict& v, const RunRecord& r) {
  if (!r.exit) {
    v.check(false, "defocus run did not exit: " + r.detail);
    return;
  }
  const auto& e = *r.exit;
  const double b0 = std::abs(*r.config.b0);
  const double lam_pred = std::sqrt(r.config.alpha_star / b0);
  const double dl = std::abs(e.lambda_star - lam_pred) / lam_pred;
  v.check(dl <= 0.10, fmt("lambda(t*) = %.4f vs %.4f: off by %.2f%% <= 10%%", e.lambda_star, lam_pred, 100 * dl));
  const double t_pred = (e.lambda_star - 1.0) / b0;
  const double dt = std::abs(e.t_star - t_pred) / t_pred;
  v.check(dt <= 0.15, fmt("t* = %.3f vs (lambda(t*) - 1)/|b0| = %.3f: off by %.2f%% <= 15%%", e.t_star, t_pred, 100 * dt));
  if (!e.slope) {
    v.check(false, "no samples on the renormalized window");
    return;
  }
  const double a = r.config.alpha_star;
  const double ds = std::abs(*e.slope - a) / a;
  v.check(ds <= 0.10, fmt("d lambda_v/d tau on [0, %g] = %.5f vs alpha* = %.3f", e.tau_end, *e.slope, a) +
                          fmt(": off by %.1f%% <= 10%%", 100 * ds));
  v.note(fmt("predicted t* (leading order) %.2f, tube distance at t = 0 %.3f", e.predicted_t, r.admission.tube_distance));
}

void lyapunov(Verdict& v, const RunRecord& r, double C) {
  const std::size_t end = r.exit ? static_cast<std::size_t>(
                                       std::upper_bound(r.series.begin(), r.series.end(), r.exit->t_star,
                                                        [](double t, const SeriesRow& row) { return t < row.t; }) -
                                       r.series.begin())
                                 : r.series.size();
  std::size_t ok = 0, total = 0;
  std::vector<double> needed;
  for (std::size_t i = 1; i < end; ++i) {
    const auto &p = r.series[i - 1], &q = r.series[i];
    const double rate = (q.f.F1 - p.f.F1) / (q.s - p.s);
    const double b4 = std::pow(p.b, 4);
    ++total;
    if (rate <= C * b4) ++ok;
    needed.push_back(rate / b4);
  }
  const double frac = total ? static_cast<double>(ok) / total : 0.0;
  v.check(frac >= 0.90, fmt("dF1/ds <= %g b^4 on %.1f%% of %g intervals (need 90%%)", C, 100 * frac, total));
  if (!needed.empty()) {
    std::nth_element(needed.begin(), needed.begin() + static_cast<long>(0.9 * (needed.size() - 1)), needed.end());
    v.note(fmt("smallest C covering 90%% of intervals: %.3g", needed[static_cast<std::size_t>(0.9 * (needed.size() - 1))]));
  }
  std::vector<SeriesRow> rows(r.series.begin(), r.series.begin() + static_cast<long>(end));
  const auto [c95, f50] = integrated_bound(rows, 0.95, 50.0);
  v.check(f50 >= 0.95, fmt("integrated N bound with C = 50 holds on %.1f%% of pairs (need 95%%)", 100 * f50));
  v.note(fmt("smallest C covering 95%% of pairs: %.3g", c95));
  if (r.F1_increase_share) v.note(fmt("share of F1 variation that is increase: %.3f", *r.F1_increase_share));
  if (r.audit_refusal) v.note("regime audit refused: " + *r.audit_refusal);
}

// ---- 7, 8: the focus run ----

void blowup_speed(Verdict& v, const RunRecord& r) {
  if (r.outcome != Outcome::Blowup || !r.laws) {
    v.check(false, std::string("focus run: ") + to_string(r.outcome) + " (" + r.detail + ")");
    return;
  }
  const auto& f = *r.laws;
  v.check(std::abs(f.grad_exponent + 1.0) <= 0.05,
          fmt("||u_x|| exponent vs T - t: %.4f (stderr %.1e), within 0.05 of -1", f.grad_exponent, f.grad_exponent_stderr));
  v.check(f.b_over_lambda2_spread < 0.10,
          fmt("b/lambda^2 spread about ell* = %.4f: %.2f%% < 10%%", f.ell_star, 100 * f.b_over_lambda2_spread));
  v.note(fmt("T = %.4f over %g samples in the final decade of lambda", f.T_blowup, static_cast<double>(f.samples)));
  v.note(fmt("lambda/(ell*(T - t)) in [%.4f, %.4f]", f.lambda_ratio_min, f.lambda_ratio_max));
  v.note(fmt("mean x ell*^2 (T - t) = %.4f (forward blow-up moves right)", f.escape_ratio));
}

void b_of_s(Verdict& v, const RunRecord& r) {
  if (r.outcome != Outcome::Blowup || !r.laws) {
    v.check(false, std::string("focus run: ") + to_string(r.outcome));
    return;
  }
  const auto& f = *r.laws;
  v.check(f.sb_min >= 0.4 && f.sb_max <= 0.6, fmt("s b(s) over the last decade of s in [%.4f, %.4f]", f.sb_min, f.sb_max));
}

// ---- 10: the ladder ----

void ladder(Verdict& v, const LadderReport& rep) {
  if (!rep.gaps.empty()) {
    for (const auto& g : rep.gaps) v.check(false, "gap: " + g);
    return;
  }
  std::ostringstream d;
  for (std::size_t i = 0; i < rep.consecutive.size(); ++i)
    d << (i ? ", " : "") << "d(" << rep.n[i] << "," << rep.n[i + 1] << ") = " << fmt("%.3e", rep.consecutive[i]);
  v.check(rep.decreasing, "sup distances between consecutive n decrease: " + d.str());
  v.note(fmt("common tau window [%.3f, %.3f]", rep.tau_window.first, rep.tau_window.second));
  std::ostringstream s;
  for (std::size_t i = 0; i < rep.slopes.size(); ++i) s << (i ? ", " : "") << fmt("%.5f", rep.slopes[i]);
  v.note("slopes " + s.str());
  double m = 0.0;
  for (double e : rep.mass_identity_error) m = std::max(m, e);
  v.note(fmt("max |int v_n^2(0) - int u_n^2(0)| = %.2e", m));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1 to 10"};
  std::vector<int> only;
  std::string out;
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--out", out, "directory for the run records");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> want = only.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}
                                          : std::set<int>(only.begin(), only.end());
  auto save = [&](const RunRecord& r, const char* name) {
    if (!out.empty()) write_run_record(r, std::filesystem::path(out) / name);
  };

  const char* names[] = {"",
                         "profile identities",
                         "expansion exponents",
                         "solver fidelity",
                         "decomposition round trip",
                         "rigidity of b/lambda^2",
                         "exit laws",
                         "blow-up speed",
                         "b(s) asymptotic",
                         "Lyapunov structure",
                         "minimal-mass ladder"};
  int failed = 0;
  auto report = [&](int k, Verdict& v, double seconds) {
    std::printf("criterion %2d %s  %s (%.1f s)%s\n", k, v.pass ? "PASS" : "FAIL", names[k], seconds,
                v.detail.str().c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  };
  using clock = std::chrono::steady_clock;
  auto timed = [&](int k, const std::function<void(Verdict&)>& body) {
    if (!want.count(k)) return;
    Verdict v;
    const auto t0 = clock::now();
    try {
      body(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    report(k, v, std::chrono::duration<double>(clock::now() - t0).count());
  };

  timed(1, profile_identities);
  timed(2, expansion_exponents);
  timed(3, solver_fidelity);
  timed(4, decomposition_round_trip);

  // Each trajectory is computed once, on first use.
  auto cached_run = [&](ExperimentConfig c, const char* name, RunRecord (*fn)(const ExperimentConfig&)) {
    return [=, &save, r = std::optional<RunRecord>()]() mutable -> const RunRecord& {
      if (!r) {
        const auto t0 = clock::now();
        r = fn(c);
        save(*r, name);
        std::printf("%s run b0 = %+g: %s (%.1f s)\n", name, *c.b0, r->detail.c_str(),
                    std::chrono::duration<double>(clock::now() - t0).count());
      }
      return *r;
    };
  };
  ExperimentConfig dc;
  dc.id = ExperimentId::DefocusExit;
  dc.b0 = -0.01;
  dc.alpha_star = 0.04;
  auto defocus = cached_run(dc, "defocus_exit", run_defocus_exit);
  ExperimentConfig fc;
  fc.id = ExperimentId::FocusBlowup;
  fc.b0 = 0.05;
  auto focus = cached_run(fc, "focus_blowup", run_focus_blowup);

  timed(5, [&](Verdict& v) { rigidity(v, defocus()); });
  timed(6, [&](Verdict& v) { exit_laws(v, defocus()); });
  timed(7, [&](Verdict& v) { blowup_speed(v, focus()); });
  timed(8, [&](Verdict& v) { b_of_s(v, focus()); });
  // C = 50 for both parts: the largest constant the criterion admits.
  timed(9, [&](Verdict& v) { lyapunov(v, defocus(), 50.0); });

  timed(10, [&](Verdict& v) {
    ExperimentConfig c;
    c.id = ExperimentId::MinimalMassConstruction;
    const LadderReport rep = run_minimal_mass_construction(c);
    if (!out.empty()) write_ladder_report(rep, std::filesystem::path(out) / "ladder");
    ladder(v, rep);
  });

  std::printf("%d of %zu criteria failed\n", failed, want.size());
  return failed;
}
