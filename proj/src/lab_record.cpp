#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gkdv/lab.hpp"

namespace gkdv {

using nlohmann::json;

Renormalization Renormalization::inverse() const {
  const double l3 = lambda0 * lambda0 * lambda0;
  return {1.0 / lambda0, -t0 / l3, -x0 / lambda0, -s0};
}

SeriesRow renormalize(const SeriesRow& r, const Renormalization& g) {
  const double l = g.lambda0;
  const double l3 = l * l * l;
  SeriesRow o = r;
  o.t = (r.t - g.t0) / l3;
  o.s = r.s - g.s0;
  o.dt = r.dt / l3;
  o.lambda = r.lambda / l;
  o.x = (r.x - g.x0) / l;
  o.energy = l * l * r.energy;
  o.h1 = std::sqrt(r.mass + l * l * (r.h1 * r.h1 - r.mass));
  o.f.lambda0 = r.f.lambda0 / l;
  o.f.b_over_lambda2 = r.f.b_over_lambda2 * l * l;
  return o;
}

std::vector<SeriesRow> renormalize(const std::vector<SeriesRow>& rows, const Renormalization& g) {
  std::vector<SeriesRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(renormalize(r, g));
  return out;
}

GridField renormalize(const GridField& u, const Grid1D& target, const Renormalization& g) {
  return std::sqrt(g.lambda0) * resample_onto(u, target, g.lambda0, g.x0);
}

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// JSON has no infinity; large finite values stand in for it.
json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? 1e308 : -1e308;
  return v;
}

json to_json(const LawFit& f) {
  json j{{"ell_star", num(f.ell_star)},
         {"T_blowup", num(f.T_blowup)},
         {"c_lambda", num(f.c_lambda)},
         {"x_star", num(f.x_star)},
         {"c_x", num(f.c_x)},
         {"c_b", num(f.c_b)},
         {"c1_star", opt_json(f.c1_star)},
         {"c2_star", opt_json(f.c2_star)},
         {"residual_norm", num(f.residual_norm)},
         {"window", {num(f.window.first), num(f.window.second)}},
         {"samples", f.samples},
         {"cov_T", num(f.cov_T)},
         {"cov_ell", num(f.cov_ell)},
         {"cov_T_ell", num(f.cov_T_ell)},
         {"condition", num(f.condition)},
         {"grad_exponent", num(f.grad_exponent)},
         {"grad_exponent_stderr", num(f.grad_exponent_stderr)},
         {"b_over_lambda2_spread", num(f.b_over_lambda2_spread)},
         {"escape_ratio", num(f.escape_ratio)},
         {"lambda_ratio_min", num(f.lambda_ratio_min)},
         {"lambda_ratio_max", num(f.lambda_ratio_max)},
         {"sb_min", num(f.sb_min)},
         {"sb_max", num(f.sb_max)},
         {"warnings", f.warnings}};
  return j;
}

json to_json(const MonotonicityAudit& a) {
  return {{"intervals", a.intervals},
          {"C", num(a.C)},
          {"fraction_F1", num(a.fraction_F1)},
          {"fraction_F2", num(a.fraction_F2)},
          {"mu_fit", num(a.mu_fit)},
          {"C_fit", num(a.C_fit)},
          {"positive_over_total", num(a.positive_over_total)},
          {"C_integrated", num(a.C_integrated)},
          {"integrated_fraction", num(a.integrated_fraction)},
          {"C_rigidity", num(a.C_rigidity)}};
}

json to_json(const ExitSummary& e) {
  return {{"t_star", num(e.t_star)},
          {"lambda_star", num(e.lambda_star)},
          {"x_star", num(e.x_star)},
          {"s_star", num(e.s_star)},
          {"predicted_t", num(e.predicted_t)},
          {"predicted_lambda", num(e.predicted_lambda)},
          {"rigidity_max", num(e.rigidity_max)},
          {"tube_exit_t", opt_json(e.tube_exit_t)},
          {"tau_start", num(e.tau_start)},
          {"tau_end", num(e.tau_end)},
          {"slope", opt_json(e.slope)}};
}

json to_json(const AdmissionReport& a) {
  return {{"lambda", num(a.lambda)},       {"b", num(a.b)},
          {"x", num(a.x)},                 {"eps_h1", num(a.eps_h1)},
          {"right_tail_w10", num(a.right_tail_w10)}, {"tube_distance", num(a.tube_distance)},
          {"in_tube", a.in_tube},          {"in_set_A", a.in_set_A}};
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

}  // namespace

std::string fits_json(const RunRecord& r) {
  json j;
  j["schema"] = kRunRecordSchema;
  j["laws"] = r.laws ? to_json(*r.laws) : json(nullptr);
  j["exit"] = r.exit ? to_json(*r.exit) : json(nullptr);
  j["audit"] = r.audit ? to_json(*r.audit) : json(nullptr);
  j["audit_refusal"] = r.audit_refusal ? json(*r.audit_refusal) : json(nullptr);
  j["integrated_C95"] = opt_json(r.integrated_C95);
  j["integrated_fraction_50"] = opt_json(r.integrated_fraction_50);
  j["F1_increase_share"] = opt_json(r.F1_increase_share);
  return j.dump(2);
}

std::string outcome_json(const RunRecord& r) {
  json j;
  j["schema"] = kRunRecordSchema;
  j["experiment"] = to_string(r.config.id);
  j["outcome"] = to_string(r.outcome);
  j["detail"] = r.detail;
  j["numerical_failure"] = r.numerical_failure;
  j["samples"] = r.series.size();
  j["steps"] = r.steps;
  j["remeshes"] = r.remeshes;
  j["initial_mass"] = num(r.initial_mass);
  j["sponge_mass_loss"] = num(r.sponge_mass_loss);
  j["remesh_mass_loss"] = num(r.remesh_mass_loss);
  j["admission"] = to_json(r.admission);
  if (!r.series.empty()) {
    const auto& l = r.series.back();
    j["final"] = {{"t", num(l.t)}, {"s", num(l.s)}, {"lambda", num(l.lambda)}, {"b", num(l.b)}, {"x", num(l.x)}};
  }
  return j.dump(2);
}

void write_run_record(const RunRecord& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "series.csv");
    if (!out) throw std::runtime_error("cannot write " + (dir / "series.csv").string());
    out << kSeriesColumns << '\n';
    char buf[64];
    for (const auto& row : r.series) {
      const double v[] = {row.t,        row.s,         row.dt,      row.lambda,     row.b,     row.x,
                          row.mass,     row.energy,    row.h1,      row.f.N_norm,   row.f.N_loc,
                          row.f.F1,     row.f.F2,      row.f.J1,    row.f.J2,       row.f.lambda0,
                          row.f.b_over_lambda2, row.f.right_tail_w10};
      for (std::size_t k = 0; k < std::size(v); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", v[k]);
        out << (k ? "," : "") << buf;
      }
      out << '\n';
    }
  }
  write_text(dir / "fits.json", fits_json(r));
  write_text(dir / "outcome.json", outcome_json(r));
  write_text(dir / "config.txt", format_config(r.config));
  if (r.initial_field) write_checkpoint(dir / "initial.bin", *r.initial_field);
  if (r.final_field) write_checkpoint(dir / "final.bin", *r.final_field);
}

std::vector<SeriesRow> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kSeriesColumns) throw std::runtime_error("unexpected series header in " + path.string());
  std::vector<SeriesRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 18) throw std::runtime_error("malformed series row in " + path.string());
    SeriesRow r;
    r.t = v[0], r.s = v[1], r.dt = v[2], r.lambda = v[3], r.b = v[4], r.x = v[5];
    r.mass = v[6], r.energy = v[7], r.h1 = v[8];
    r.f.N_norm = v[9], r.f.N_loc = v[10], r.f.F1 = v[11], r.f.F2 = v[12], r.f.J1 = v[13];
    r.f.J2 = v[14], r.f.lambda0 = v[15], r.f.b_over_lambda2 = v[16], r.f.right_tail_w10 = v[17];
    rows.push_back(r);
  }
  return rows;
}

void write_ladder_report(const LadderReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < rep.runs.size(); ++i)
    write_run_record(rep.runs[i], dir / ("n" + std::to_string(rep.n[i])));
  json j;
  j["schema"] = kRunRecordSchema;
  j["n"] = rep.n;
  j["tau_window"] = {num(rep.tau_window.first), num(rep.tau_window.second)};
  j["sup_distance"] = rep.sup_distance;
  j["consecutive"] = rep.consecutive;
  j["decreasing"] = rep.decreasing;
  j["slopes"] = rep.slopes;
  j["mass_identity_error"] = rep.mass_identity_error;
  j["gaps"] = rep.gaps;
  write_text(dir / "ladder.json", j.dump(2));
  std::ofstream out(dir / "renormalized.csv");
  out << "tau";
  for (int n : rep.n) out << ",lambda_v_" << n;
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < rep.tau.size(); ++k) {
    out << rep.tau[k];
    for (const auto& c : rep.lambda_v) out << ',' << c[k];
    out << '\n';
  }
}

}  // namespace gkdv
