#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gkdv/lab.hpp"

namespace gkdv {

const char* to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::SolitonSanity: return "soliton_sanity";
    case ExperimentId::DefocusExit: return "defocus_exit";
    case ExperimentId::FocusBlowup: return "focus_blowup";
    case ExperimentId::MinimalMassConstruction: return "minimal_mass_construction";
    case ExperimentId::FunctionalAudit: return "functional_audit";
  }
  return "?";
}

std::optional<ExperimentId> parse_experiment_id(std::string_view name) {
  for (auto id : {ExperimentId::SolitonSanity, ExperimentId::DefocusExit, ExperimentId::FocusBlowup,
                  ExperimentId::MinimalMassConstruction, ExperimentId::FunctionalAudit})
    if (name == to_string(id)) return id;
  return std::nullopt;
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::DefocusExit: return "defocus_exit";
    case Outcome::Blowup: return "blowup";
    case Outcome::SolitonPersistent: return "soliton_persistent";
    case Outcome::Anomalous: return "anomalous";
    case Outcome::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ConfigError(field, field + ": " + why);
}

void require_positive(const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(field, "must be positive and finite");
}

double require_b0(const ExperimentConfig& c) {
  if (!c.b0) fail("b0", "required for " + std::string(to_string(c.id)));
  if (!std::isfinite(*c.b0)) fail("b0", "must be finite");
  return *c.b0;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(alpha_star > 0.0 && alpha_star <= 0.1)) fail("alpha_star", "must lie in (0, 0.1]");
  if (grid.length < 0.0 || !std::isfinite(grid.length)) fail("grid.length", "must be >= 0");
  if (grid.size % 2 != 0) fail("grid.size", "must be even");
  require_positive("solver.dt_base", solver.dt_base);
  if (!(solver.cfl_safety > 0.0 && solver.cfl_safety <= 1.0))
    fail("solver.cfl_safety", "must lie in (0, 1]");
  if (!(solver.sponge_strength >= 0.0)) fail("solver.sponge_strength", "must be >= 0");
  if (!(solver.sponge_fraction > 0.0 && solver.sponge_fraction < 0.5))
    fail("solver.sponge_fraction", "must lie in (0, 0.5)");
  if (!(solver.t_max >= 0.0)) fail("solver.t_max", "must be >= 0");
  if (!(solver.decompose_ds >= 0.0)) fail("solver.decompose_ds", "must be >= 0");
  if (!(perturbation >= 0.0)) fail("perturbation", "must be >= 0");
  require_positive("tau_end", tau_end);
  if (!(lambda_stop > 0.0 && lambda_stop < 1.0)) fail("lambda_stop", "must lie in (0, 1)");
  require_positive("audit_C", audit_C);

  switch (id) {
    case ExperimentId::SolitonSanity:
      if (b0 && !(std::abs(*b0) <= 0.2)) fail("b0", "must satisfy |b0| <= 0.2");
      break;
    case ExperimentId::DefocusExit:
    case ExperimentId::FunctionalAudit: {
      const double b = require_b0(*this);
      if (!(b < 0.0)) fail("b0", "must be negative for " + std::string(to_string(id)));
      if (!(alpha_star > std::abs(b))) fail("alpha_star", "must exceed |b0|");
      break;
    }
    case ExperimentId::FocusBlowup: {
      const double b = require_b0(*this);
      if (!(b > 0.0 && b <= 0.2)) fail("b0", "must lie in (0, 0.2] for focus_blowup");
      break;
    }
    case ExperimentId::MinimalMassConstruction:
      if (ladder.empty()) fail("ladder", "must not be empty");
      for (int n : ladder)
        if (!(n > 0 && 1.0 / n < alpha_star)) fail("ladder", "each n must satisfy 1/n < alpha_star");
      break;
  }
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(key, "not a number: '" + v + "'");
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(key, "not an integer: '" + v + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m{
      {"id",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto id = parse_experiment_id(v);
         if (!id) fail(k, "unknown experiment '" + v + "'");
         c.id = *id;
       }},
      {"b0", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.b0 = to_double(k, v); }},
      {"alpha_star",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.alpha_star = to_double(k, v); }},
      {"grid.length",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.grid.length = to_double(k, v); }},
      {"grid.size",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.grid.size = to_int<std::size_t>(k, v);
       }},
      {"solver.dt_base",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.solver.dt_base = to_double(k, v); }},
      {"solver.cfl_safety",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.solver.cfl_safety = to_double(k, v);
       }},
      {"solver.sponge_strength",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.solver.sponge_strength = to_double(k, v);
       }},
      {"solver.sponge_fraction",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.solver.sponge_fraction = to_double(k, v);
       }},
      {"solver.t_max",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.solver.t_max = to_double(k, v); }},
      {"solver.decompose_ds",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.solver.decompose_ds = to_double(k, v);
       }},
      {"output_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
      {"seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seed = to_int<std::uint64_t>(k, v); }},
      {"perturbation",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.perturbation = to_double(k, v); }},
      {"ladder",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.ladder.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) c.ladder.push_back(to_int<int>(k, trim(item)));
       }},
      {"tau_end",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.tau_end = to_double(k, v); }},
      {"lambda_stop",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.lambda_stop = to_double(k, v); }},
      {"audit_C",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.audit_C = to_double(k, v); }},
  };
  return m;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  bool have_id = false;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line, "expected 'field = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) fail(key, "unknown field");
    it->second(c, key, value);
    have_id = have_id || key == "id";
  }
  if (!have_id) fail("id", "missing");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse_config(in);
}

std::string format_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "id = " << to_string(c.id) << '\n';
  if (c.b0) o << "b0 = " << *c.b0 << '\n';
  o << "alpha_star = " << c.alpha_star << '\n'
    << "grid.length = " << c.grid.length << '\n'
    << "grid.size = " << c.grid.size << '\n'
    << "solver.dt_base = " << c.solver.dt_base << '\n'
    << "solver.cfl_safety = " << c.solver.cfl_safety << '\n'
    << "solver.sponge_strength = " << c.solver.sponge_strength << '\n'
    << "solver.sponge_fraction = " << c.solver.sponge_fraction << '\n'
    << "solver.t_max = " << c.solver.t_max << '\n'
    << "solver.decompose_ds = " << c.solver.decompose_ds << '\n'
    << "output_dir = " << c.output_dir << '\n'
    << "seed = " << c.seed << '\n'
    << "perturbation = " << c.perturbation << '\n'
    << "ladder = ";
  for (std::size_t i = 0; i < c.ladder.size(); ++i) o << (i ? "," : "") << c.ladder[i];
  o << '\n'
    << "tau_end = " << c.tau_end << '\n'
    << "lambda_stop = " << c.lambda_stop << '\n'
    << "audit_C = " << c.audit_C << '\n';
  return o.str();
}

Grid1D default_grid(const ExperimentConfig& c) {
  double L = c.grid.length;
  if (L == 0.0) {
    L = 64.0;
    const double b = c.b0.value_or(0.0);
    if (c.id == ExperimentId::FocusBlowup || c.id == ExperimentId::SolitonSanity) {
      L = 60.0;
    } else if (b != 0.0) {
      // Cutoff reach plus a soliton width must clear the sponge.
      const double reach = 2.0 * std::pow(std::abs(b), -0.75) + 8.0;
      while (!(reach < (0.5 - c.solver.sponge_fraction) * L)) L *= 2.0;
    }
  }
  std::size_t n = c.grid.size;
  if (n == 0) {
    n = c.id == ExperimentId::FocusBlowup || c.id == ExperimentId::SolitonSanity
            ? 2048
            : static_cast<std::size_t>(std::lround(32.0 * L));
  }
  return Grid1D(L, n);
}

double decompose_ds(const ExperimentConfig& c) {
  if (c.solver.decompose_ds > 0.0) return c.solver.decompose_ds;
  return c.id == ExperimentId::FocusBlowup || c.id == ExperimentId::SolitonSanity ? 0.5 : 0.1;
}

}  // namespace gkdv
