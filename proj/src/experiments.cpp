#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "gkdv/evolve.hpp"
#include "gkdv/lab.hpp"
#include "gkdv/profiles.hpp"

namespace gkdv {
namespace {

// Largest 2^{m/k} not above v; keeps the integrator's coefficient cache warm.
double ladder_floor(double v, int per_octave) {
  return std::exp2(std::floor(std::log2(v) * per_octave) / per_octave);
}

double nearest_ladder(double v, int per_octave) {
  if (v == 0.0) return 0.0;
  return std::copysign(std::exp2(std::round(std::log2(std::abs(v)) * per_octave) / per_octave), v);
}

// eps also carries the mismatch between the trailing shelf and the Q_b plateau,
// of size |b|^{5/8}; only growth beyond the audit smallness level is anomalous.
constexpr double kLocalEpsLimit = 0.1;

// A focus run that ends above this scale is inconclusive.
constexpr double kBlowupLambda = 0.1;

double peak_scale(double umax) {
  static const double q0 = ground_state_at(0.0).q;
  return (q0 / umax) * (q0 / umax);
}

struct Setup {
  Grid1D grid;
  ModulationBasis basis;
  FunctionalWeights weights;
};

Setup make_setup(const Grid1D& g) {
  ModulationBasis basis = make_modulation_basis(make_profiles(g));
  FunctionalWeights w = make_weights(basis.profiles.grid);
  return {g, std::move(basis), std::move(w)};
}

GridField initial_data(const ExperimentConfig& cfg, const Setup& st) {
  const double b0 = cfg.b0.value_or(0.0);
  GridField u = build_Qb(b0, st.basis.profiles, cfg.solver.sponge_fraction).Qb;
  if (cfg.perturbation > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    auto unit = [&rng] { return std::generate_canonical<double, 53>(rng); };
    for (int k = 0; k < 3; ++k) {
      const double c = -5.0 + 10.0 * unit();
      const double w = 0.5 + 1.5 * unit();
      const double a = (unit() < 0.5 ? -1.0 : 1.0) * cfg.perturbation;
      u += GridField::sample(st.grid, [&](double x) { return a * std::exp(-(x - c) * (x - c) / (w * w)); });
    }
  }
  return u;
}

struct Extra {
  double eps_l2 = 0.0;
  double grad = 0.0;
  double tube = std::numeric_limits<double>::quiet_NaN();
};

enum class Stop { Continue, Done };

struct TrackOptions {
  double t_max = 0.0;
  bool zoom = false;
  bool tube_distance = false;
  // Called after each sample; returning Done ends the run.
  std::function<Stop(const std::vector<SeriesRow>&, const std::vector<Extra>&)> on_sample;
};

struct TrackResult {
  std::vector<SeriesRow> rows;
  std::vector<Extra> extra;
  std::size_t steps = 0;
  std::size_t remeshes = 0;
  double sponge_loss = 0.0;
  double remesh_loss = 0.0;
  bool stopped = false;
  std::optional<std::string> failure;
  std::optional<GridField> final_field;
};

// Integrates u0 in a frame following the soliton, decomposing on a fixed
// s-cadence. With zoom, the box halves whenever lambda halves, keeping the
// resolution per soliton width fixed.
TrackResult track(const GridField& u0, const ExperimentConfig& cfg, const Setup& st,
                  const TrackOptions& opt) {
  TrackResult res;
  SolverConfig scfg;
  scfg.dt_initial = cfg.solver.dt_base;
  scfg.dt_max = 1.0;
  scfg.cfl_safety = cfg.solver.cfl_safety;
  scfg.sponge_strength = cfg.solver.sponge_strength;
  scfg.sponge_fraction = cfg.solver.sponge_fraction;
  scfg.t_max = opt.t_max;
  scfg.frame_velocity = 1.0;

  auto integ = std::make_unique<Integrator>(u0, scfg, 0.0);
  double origin = 0.0;       // absolute position of the current box's frame origin
  double zoom_ref = 1.0;     // lambda at the last remesh
  double s = 0.0;
  double calib = 1.0;        // modulation lambda / peak-height scale at the last sample
  double last_dt = 0.0;
  ModulationGuess guess{1.0, cfg.b0.value_or(0.0), 0.0};
  double sponge_before = 0.0;

  auto window_of = [&](const Grid1D& g) {
    return ObservationWindow{g.left() + cfg.solver.sponge_fraction * g.length(), g.left() + g.length()};
  };

  auto sample = [&](const GridField& u) -> bool {
    DecomposeOptions dopt;
    dopt.alpha_star = cfg.alpha_star;
    dopt.window = window_of(u.grid());
    ModulationState ms = [&] {
      try {
        return decompose(u, st.basis, guess, dopt);
      } catch (const DecompositionError&) {
        return decompose(u, st.basis, std::nullopt, dopt);
      }
    }();
    ms.s = s;
    ms.t = integ->time();
    guess = {ms.lambda, ms.b, ms.x_center};
    calib = ms.lambda / peak_scale(u.max_abs());
    const FlowState fs = make_flow_state(integ->time(), u);
    SeriesRow row;
    row.t = integ->time();
    row.s = s;
    row.dt = last_dt;
    row.lambda = ms.lambda;
    row.b = ms.b;
    row.x = origin + integ->frame_offset() + ms.x_center;
    row.mass = fs.mass;
    row.energy = fs.energy;
    row.h1 = fs.h1_norm;
    row.f = functionals(ms, st.weights, st.basis);
    Extra ex;
    ex.eps_l2 = ms.eps_l2;
    ex.grad = fs.grad_norm;
    if (opt.tube_distance) {
      try {
        ex.tube = tube_distance(u, st.basis, guess, window_of(u.grid()));
      } catch (const std::exception&) {
      }
    }
    res.rows.push_back(row);
    res.extra.push_back(ex);
    // Frame speed 1/lambda^2 plus a drift back to the box centre over ~50 units of s.
    const double l3 = ms.lambda * ms.lambda * ms.lambda;
    const double c = 1.0 / (ms.lambda * ms.lambda) + ms.x_center / (50.0 * l3);
    integ->set_frame_velocity(nearest_ladder(c, 256));
    return opt.on_sample && opt.on_sample(res.rows, res.extra) == Stop::Done;
  };

  auto remesh = [&](const GridField& u) {
    const Grid1D& g = u.grid();
    const Grid1D ng(0.5 * g.length(), g.size());
    const double xc = guess.x;
    GridField v = resample_onto(u, ng, 1.0, xc);
    const double ramp = 0.05 * ng.length();
    for (std::size_t j = 0; j < ng.size(); ++j) {
      const double z = (ng.x(j) - ng.left()) / ramp;
      if (z < 1.0) v[j] *= z * z * (3.0 - 2.0 * z);
    }
    res.remesh_loss += mass(u) - mass(v);
    res.sponge_loss += integ->sponge_mass_loss() - sponge_before;
    origin += integ->frame_offset() + xc;
    const double c = integ->config().frame_velocity;
    const double t = integ->time();
    SolverConfig ncfg = integ->config();
    ncfg.frame_velocity = c;
    // Damping rate per unit of s is sigma lambda^3; keep it as the box shrinks.
    ncfg.sponge_strength *= 8.0;
    integ = std::make_unique<Integrator>(v, ncfg, t);
    sponge_before = 0.0;
    guess.x = 0.0;
    ++res.remeshes;
  };

  GridField u = integ->field();
  if (sample(u)) {
    res.stopped = true;
  }
  const double ds = decompose_ds(cfg);
  double next_s = ds;
  while (!res.stopped && integ->time() < opt.t_max) {
    const double umax = u.max_abs();
    const double lam = calib * peak_scale(umax);
    const FlowState probe{integ->time(), u};
    double dt = ladder_floor(adapt_dt(probe, scfg, lam), 16);
    dt = std::min(dt, opt.t_max - integ->time());
    if (!(dt > 1e-14)) {
      res.failure = "time step collapsed";
      break;
    }
    try {
      integ->step(dt);
    } catch (const NumericalError& e) {
      res.failure = e.what();
      break;
    }
    ++res.steps;
    last_dt = dt;
    s += dt / (lam * lam * lam);
    u = integ->field();
    if (s >= next_s || integ->time() >= opt.t_max) {
      next_s = s + ds;
      try {
        res.stopped = sample(u);
      } catch (const DecompositionError& e) {
        res.failure = std::string("decomposition failed: ") + e.what();
        break;
      }
      if (opt.zoom && guess.lambda < 0.5 * zoom_ref) {
        remesh(u);
        zoom_ref *= 0.5;
        u = integ->field();
      }
    }
  }
  res.sponge_loss += integ->sponge_mass_loss() - sponge_before;
  res.final_field = integ->field();
  return res;
}

void fill_common(RunRecord& r, TrackResult&& tr) {
  r.series = std::move(tr.rows);
  r.numerical_failure = tr.failure.has_value();
  r.steps = tr.steps;
  r.remeshes = tr.remeshes;
  r.sponge_mass_loss = tr.sponge_loss;
  r.remesh_mass_loss = tr.remesh_loss;
  r.final_field = std::move(tr.final_field);
}

double lerp(double a, double b, double th) { return a + th * (b - a); }

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

void audit_until(RunRecord& r, const std::vector<Extra>& extra, std::size_t end) {
  std::vector<AuditSample> smp;
  std::vector<SeriesRow> rows(r.series.begin(), r.series.begin() + static_cast<long>(end));
  for (std::size_t i = 0; i < end; ++i) {
    const auto& row = r.series[i];
    smp.push_back({row.s, row.lambda, row.b, extra[i].eps_l2, row.f});
  }
  if (rows.size() >= 2) {
    const auto [c95, f50] = integrated_bound(rows, 0.95, 50.0);
    r.integrated_C95 = c95;
    r.integrated_fraction_50 = f50;
    double pos = 0.0, tot = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double d = rows[i].f.F1 - rows[i - 1].f.F1;
      pos += std::max(d, 0.0);
      tot += std::abs(d);
    }
    r.F1_increase_share = tot > 0.0 ? pos / tot : 0.0;
  }
  try {
    r.audit = monotonicity_audit(smp, r.config.audit_C);
  } catch (const AuditRefused& e) {
    r.audit_refusal = e.what();
  }
}

}  // namespace

AdmissionReport admission_check(const GridField& u0, const ModulationBasis& basis,
                                double alpha_star) {
  AdmissionReport a;
  DecomposeOptions opt;
  opt.alpha_star = alpha_star;
  const ModulationState ms = decompose(u0, basis, std::nullopt, opt);
  a.lambda = ms.lambda;
  a.b = ms.b;
  a.x = ms.x_center;
  a.eps_h1 = std::sqrt(inner(ms.eps, ms.eps) + inner(ms.eps_y, ms.eps_y));
  const Grid1D& g = ms.eps.grid();
  for (std::size_t j = 0; j < g.size(); ++j)
    if (g.x(j) > 0.0) a.right_tail_w10 += std::pow(g.x(j), 10) * ms.eps[j] * ms.eps[j] * g.spacing();
  a.tube_distance = tube_distance(u0, basis, {ms.lambda, 0.0, ms.x_center}, ObservationWindow::whole(u0.grid()));
  a.in_tube = a.tube_distance < alpha_star;
  a.in_set_A = a.eps_h1 < alpha_star && a.right_tail_w10 < 1.0;
  return a;
}

std::pair<double, double> integrated_bound(const std::vector<SeriesRow>& rows, double fraction,
                                           double C_ref) {
  std::vector<double> ratios;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const double den = rows[i].f.N_norm + std::pow(std::abs(rows[i].b), 3) +
                         std::pow(std::abs(rows[j].b), 3);
      const double num = rows[j].f.N_norm;
      const double r = den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0);
      ratios.push_back(r);
      if (r <= C_ref) ++covered;
    }
  if (ratios.empty()) throw std::invalid_argument("integrated_bound: need two samples");
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ratios.size())));
  k = std::clamp<std::size_t>(k, 1, ratios.size()) - 1;
  std::nth_element(ratios.begin(), ratios.begin() + static_cast<long>(k), ratios.end());
  return {ratios[k], static_cast<double>(covered) / static_cast<double>(ratios.size())};
}

RunRecord run_soliton_sanity(const ExperimentConfig& cfg) {
  cfg.validate();
  const Setup st = make_setup(default_grid(cfg));
  RunRecord r;
  r.config = cfg;
  const GridField u0 = initial_data(cfg, st);
  r.initial_mass = mass(u0);
  r.admission = admission_check(u0, st.basis, cfg.alpha_star);
  TrackOptions opt;
  opt.t_max = cfg.solver.t_max > 0.0 ? cfg.solver.t_max : 20.0;
  opt.on_sample = [&](const std::vector<SeriesRow>& rows, const std::vector<Extra>&) {
    const auto& b = rows.back();
    return b.b <= -cfg.alpha_star || b.lambda < 0.5 ? Stop::Done : Stop::Continue;
  };
  TrackResult tr = track(u0, cfg, st, opt);
  const auto failure = tr.failure;
  fill_common(r, std::move(tr));
  const auto& last = r.series.back();
  if (failure) {
    r.outcome = Outcome::Anomalous;
    r.detail = *failure;
  } else if (last.b <= -cfg.alpha_star) {
    r.outcome = Outcome::DefocusExit;
    r.detail = "b crossed -alpha_star";
  } else if (last.lambda < 0.5) {
    r.outcome = Outcome::Blowup;
    r.detail = "lambda fell below 1/2";
  } else {
    r.outcome = Outcome::SolitonPersistent;
    std::ostringstream o;
    const auto [lo, hi] = std::minmax_element(r.series.begin(), r.series.end(),
                                              [](const SeriesRow& a, const SeriesRow& b) { return a.lambda < b.lambda; });
    o << "lambda in [" << lo->lambda << ", " << hi->lambda << "], |b| = " << std::abs(last.b) << " at t = " << last.t;
    r.detail = o.str();
  }
  return r;
}

RunRecord run_defocus_exit(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.id != ExperimentId::DefocusExit && cfg.id != ExperimentId::FunctionalAudit &&
      cfg.id != ExperimentId::MinimalMassConstruction)
    throw ConfigError("id", "run_defocus_exit: unexpected experiment id");
  const double b0 = *cfg.b0;
  const double a = cfg.alpha_star;
  const Setup st = make_setup(default_grid(cfg));
  RunRecord r;
  r.config = cfg;
  const GridField u0 = initial_data(cfg, st);
  r.initial_mass = mass(u0);
  r.initial_field = u0;
  r.admission = admission_check(u0, st.basis, a);

  const ExitPrediction pred = predict_exit(b0, a);
  std::optional<std::size_t> exit_index;
  double t_star = 0.0, lambda_star = 0.0;
  std::optional<std::string> anomaly;
  TrackOptions opt;
  opt.tube_distance = true;
  opt.t_max = cfg.solver.t_max > 0.0
                  ? cfg.solver.t_max
                  : 3.0 * (pred.t_exit + std::pow(pred.lambda_exit, 3) * cfg.tau_end);
  opt.on_sample = [&](const std::vector<SeriesRow>& rows, const std::vector<Extra>&) {
    const auto& b = rows.back();
    if (!exit_index) {
      if (std::sqrt(b.f.eps_local) > kLocalEpsLimit) {
        std::ostringstream o;
        o << "local eps norm " << std::sqrt(b.f.eps_local) << " left the small-eps regime before b reached -alpha_star (t = "
          << b.t << ")";
        anomaly = o.str();
        return Stop::Done;
      }
      if (b.b <= -a && rows.size() >= 2) {
        const auto& p = rows[rows.size() - 2];
        const double th = (-a - p.b) / (b.b - p.b);
        t_star = lerp(p.t, b.t, th);
        lambda_star = lerp(p.lambda, b.lambda, th);
        exit_index = rows.size() - 1;
      }
      return Stop::Continue;
    }
    return (b.t - t_star) / std::pow(lambda_star, 3) >= cfg.tau_end ? Stop::Done : Stop::Continue;
  };
  TrackResult tr = track(u0, cfg, st, opt);
  const auto failure = tr.failure;
  const std::vector<Extra> extra = tr.extra;
  fill_common(r, std::move(tr));
  const auto& rows = r.series;

  if (exit_index) {
    const std::size_t k = *exit_index;
    const auto &p = rows[k - 1], &q = rows[k];
    const double th = (-a - p.b) / (q.b - p.b);
    ExitSummary e;
    e.t_star = t_star;
    e.lambda_star = lambda_star;
    e.x_star = lerp(p.x, q.x, th);
    e.s_star = lerp(p.s, q.s, th);
    e.predicted_t = pred.t_exit;
    e.predicted_lambda = pred.lambda_exit;
    for (std::size_t i = 0; i < k; ++i)
      e.rigidity_max = std::max(e.rigidity_max, std::abs(rows[i].b / (rows[i].lambda * rows[i].lambda) - b0) / std::abs(b0));
    const double bl_star = -a / (lambda_star * lambda_star);
    e.rigidity_max = std::max(e.rigidity_max, std::abs(bl_star - b0) / std::abs(b0));
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (extra[i].tube > a) {
        e.tube_exit_t = rows[i].t;
        break;
      }
    const double l3 = std::pow(lambda_star, 3);
    e.tau_start = -t_star / l3;
    e.tau_end = (rows.back().t - t_star) / l3;
    std::vector<double> tau, lv;
    for (const auto& row : rows) {
      const double tt = (row.t - t_star) / l3;
      if (tt >= 0.0 && tt <= cfg.tau_end) {
        tau.push_back(tt);
        lv.push_back(row.lambda / lambda_star);
      }
    }
    if (tau.size() >= 3) e.slope = slope(tau, lv);
    r.exit = e;
    audit_until(r, extra, k);
  } else {
    audit_until(r, extra, rows.size());
  }

  if (failure) {
    r.outcome = Outcome::Anomalous;
    r.detail = *failure;
  } else if (anomaly) {
    r.outcome = Outcome::Anomalous;
    r.detail = *anomaly;
  } else if (r.exit) {
    r.outcome = Outcome::DefocusExit;
    std::ostringstream o;
    o << "b reached -alpha_star at t = " << r.exit->t_star << " with lambda = " << r.exit->lambda_star;
    if (r.exit->tau_end < cfg.tau_end) o << "; run ended at tau = " << r.exit->tau_end << " < tau_end";
    r.detail = o.str();
  } else {
    r.outcome = Outcome::Inconclusive;
    r.detail = "no exit before t_max";
  }
  return r;
}

RunRecord run_focus_blowup(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.id != ExperimentId::FocusBlowup) throw ConfigError("id", "run_focus_blowup: unexpected experiment id");
  const Setup st = make_setup(default_grid(cfg));
  RunRecord r;
  r.config = cfg;
  const GridField u0 = initial_data(cfg, st);
  r.initial_mass = mass(u0);
  r.admission = admission_check(u0, st.basis, cfg.alpha_star);
  TrackOptions opt;
  opt.zoom = true;
  opt.t_max = cfg.solver.t_max > 0.0 ? cfg.solver.t_max : 100.0;
  opt.on_sample = [&](const std::vector<SeriesRow>& rows, const std::vector<Extra>&) {
    return rows.back().lambda <= cfg.lambda_stop ? Stop::Done : Stop::Continue;
  };
  TrackResult tr = track(u0, cfg, st, opt);
  const auto failure = tr.failure;
  const std::vector<Extra> extra = tr.extra;
  fill_common(r, std::move(tr));
  const auto& rows = r.series;

  BlowupSeries bs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bs.t.push_back(rows[i].t);
    bs.s.push_back(rows[i].s);
    bs.lambda.push_back(rows[i].lambda);
    bs.b.push_back(rows[i].b);
    bs.x.push_back(rows[i].x);
    bs.grad_norm.push_back(extra[i].grad);
  }
  const bool reached = rows.back().lambda <= std::max(cfg.lambda_stop, kBlowupLambda);
  try {
    r.laws = fit_blowup_laws(bs);
  } catch (const std::invalid_argument& e) {
    r.detail = std::string("law fit unavailable: ") + e.what();
  }
  if (failure) {
    r.outcome = Outcome::Anomalous;
    r.detail = *failure;
  } else if (reached) {
    r.outcome = Outcome::Blowup;
    std::ostringstream o;
    o << "lambda reached " << rows.back().lambda << " at t = " << rows.back().t;
    if (r.laws) o << "; fitted T = " << r.laws->T_blowup;
    r.detail = o.str() + (r.detail.empty() ? "" : "; " + r.detail);
  } else {
    r.outcome = Outcome::Inconclusive;
    r.detail = "lambda stayed above 0.1 until t_max";
  }
  return r;
}

RunRecord run_functional_audit(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.id = ExperimentId::FunctionalAudit;
  RunRecord r = run_defocus_exit(c);
  if (r.audit_refusal && r.outcome == Outcome::DefocusExit) r.detail += "; audit refused: " + *r.audit_refusal;
  return r;
}

LadderReport run_minimal_mass_construction(const ExperimentConfig& cfg) {
  cfg.validate();
  LadderReport rep;
  rep.n = cfg.ladder;
  std::sort(rep.n.begin(), rep.n.end());
  for (int n : rep.n) {
    ExperimentConfig c = cfg;
    c.id = ExperimentId::MinimalMassConstruction;
    c.b0 = -1.0 / n;
    c.grid = {};
    rep.runs.push_back(run_defocus_exit(c));
  }

  double lo = -std::numeric_limits<double>::infinity(), hi = cfg.tau_end;
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const auto& r = rep.runs[i];
    if (r.outcome != Outcome::DefocusExit || !r.exit) {
      rep.gaps.push_back("n = " + std::to_string(rep.n[i]) + ": " + to_string(r.outcome) + " (" + r.detail + ")");
      continue;
    }
    lo = std::max(lo, r.exit->tau_start);
    hi = std::min(hi, r.exit->tau_end);
  }
  rep.tau_window = {lo, hi};
  if (!rep.gaps.empty() || !(hi > lo)) return rep;

  const int m = 400;
  for (int k = 0; k <= m; ++k) rep.tau.push_back(lo + (hi - lo) * k / m);
  for (const auto& r : rep.runs) {
    const Renormalization g{r.exit->lambda_star, r.exit->t_star, r.exit->x_star, r.exit->s_star};
    const auto v = renormalize(r.series, g);
    std::vector<double> lv;
    std::size_t j = 0;
    for (double tau : rep.tau) {
      while (j + 2 < v.size() && v[j + 1].t < tau) ++j;
      // Cubic Lagrange through the four samples around tau.
      const std::size_t i0 = std::clamp<std::size_t>(j, 1, v.size() - 3) - 1;
      double val = 0.0;
      for (std::size_t a = i0; a < i0 + 4; ++a) {
        double w = 1.0;
        for (std::size_t c = i0; c < i0 + 4; ++c)
          if (c != a) w *= (tau - v[c].t) / (v[a].t - v[c].t);
        val += w * v[a].lambda;
      }
      lv.push_back(val);
    }
    rep.lambda_v.push_back(std::move(lv));
    if (r.exit->slope) rep.slopes.push_back(*r.exit->slope);
    // The symmetry is an L2 isometry on the initial data.
    if (r.initial_field) {
      const GridField& u = *r.initial_field;
      const Grid1D target(u.grid().length() / g.lambda0, u.size());
      rep.mass_identity_error.push_back(std::abs(mass(renormalize(u, target, g)) - mass(u)));
    }
  }
  const std::size_t K = rep.runs.size();
  rep.sup_distance.assign(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j)
      for (std::size_t k = 0; k < rep.tau.size(); ++k)
        rep.sup_distance[i][j] = std::max(rep.sup_distance[i][j], std::abs(rep.lambda_v[i][k] - rep.lambda_v[j][k]));
  for (std::size_t i = 0; i + 1 < K; ++i) rep.consecutive.push_back(rep.sup_distance[i][i + 1]);
  rep.decreasing = true;
  for (std::size_t i = 0; i + 1 < rep.consecutive.size(); ++i)
    rep.decreasing = rep.decreasing && rep.consecutive[i + 1] < rep.consecutive[i];
  return rep;
}

}  // namespace gkdv
