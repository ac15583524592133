#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gkdv/grid.hpp"
#include "gkdv/modulation.hpp"
#include "gkdv/reduced.hpp"

namespace gkdv {

inline constexpr const char* kRunRecordSchema = "gkdv-run-record/1";

enum class ExperimentId {
  SolitonSanity,
  DefocusExit,
  FocusBlowup,
  MinimalMassConstruction,
  FunctionalAudit
};
const char* to_string(ExperimentId id);
std::optional<ExperimentId> parse_experiment_id(std::string_view name);

// Zero length or size selects the default for the experiment.
struct GridSpec {
  double length = 0.0;
  std::size_t size = 0;
};

struct SolverSpec {
  double dt_base = 0.02;     // dt at lambda = 1, scaled by lambda^3
  double cfl_safety = 0.8;
  double sponge_strength = 100.0;
  double sponge_fraction = 0.1;
  double t_max = 0.0;        // 0: experiment default
  double decompose_ds = 0.0; // decomposition cadence in s; 0: experiment default
};

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  ExperimentId id = ExperimentId::SolitonSanity;
  std::optional<double> b0;
  double alpha_star = 0.04;
  GridSpec grid;
  SolverSpec solver;
  std::string output_dir;
  std::uint64_t seed = 0;
  double perturbation = 0.0;           // amplitude of the seeded initial perturbation
  std::vector<int> ladder{50, 100, 200, 400};
  double tau_end = 3.0;                // renormalized time tracked past exit
  double lambda_stop = 0.05;           // focus run target scale
  double audit_C = 20.0;               // constant in the F1 <= C b^4 audit

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Key-value text, one "field = value" per line; '#' starts a comment. Keys are
// the field names above, with grid.length, solver.dt_base, ... for nested
// fields and a comma-separated ladder. Unknown keys throw ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string format_config(const ExperimentConfig& cfg);

// Grid used when the config leaves it open: the box holds the Q_b cutoff
// region with room for the sponge, at spacing at most 1/32 so that the dealiasing band
// cuts the spectrum of Q below 1e-11.
Grid1D default_grid(const ExperimentConfig& cfg);
// 0.5 for the focus and soliton runs, whose s-range is long; 0.1 otherwise.
double decompose_ds(const ExperimentConfig& cfg);

// Membership of the initial data in the tube and in the set of data with a
// small H1 remainder and a controlled right tail.
struct AdmissionReport {
  double lambda = 0.0, b = 0.0, x = 0.0;
  double eps_h1 = 0.0;
  double right_tail_w10 = 0.0;
  double tube_distance = 0.0;
  bool in_tube = false;     // tube_distance < alpha_star
  bool in_set_A = false;    // eps_h1 < alpha_star and right_tail_w10 < 1
};
AdmissionReport admission_check(const GridField& u0, const ModulationBasis& basis,
                                double alpha_star);

struct SeriesRow {
  double t = 0.0, s = 0.0, dt = 0.0;
  double lambda = 1.0, b = 0.0, x = 0.0;
  double mass = 0.0, energy = 0.0, h1 = 0.0;
  FunctionalReport f;
};
inline constexpr const char* kSeriesColumns =
    "t,s,dt,lambda,b,x,mass,energy,h1,N,Nloc,F1,F2,J1,J2,lambda0,b_over_lambda2,tail_w10";

enum class Outcome { DefocusExit, Blowup, SolitonPersistent, Anomalous, Inconclusive };
const char* to_string(Outcome o);

struct ExitSummary {
  double t_star = 0.0, lambda_star = 0.0, x_star = 0.0, s_star = 0.0;
  double predicted_t = 0.0, predicted_lambda = 0.0;
  double rigidity_max = 0.0;  // max |b/lambda^2 - b0|/|b0| up to exit
  std::optional<double> tube_exit_t;  // first sample with tube distance > alpha_star
  double tau_start = 0.0;             // renormalized time of the initial data
  double tau_end = 0.0;
  std::optional<double> slope;        // d lambda_v / d tau on [0, tau_end]
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<SeriesRow> series;
  Outcome outcome = Outcome::Inconclusive;
  std::string detail;
  bool numerical_failure = false;  // solver or decomposition broke down
  AdmissionReport admission;
  double initial_mass = 0.0;
  double sponge_mass_loss = 0.0;
  double remesh_mass_loss = 0.0;
  std::size_t steps = 0;
  std::size_t remeshes = 0;
  std::optional<ExitSummary> exit;
  std::optional<LawFit> laws;
  std::optional<MonotonicityAudit> audit;
  std::optional<std::string> audit_refusal;
  // Integrated N bound over sample pairs: smallest C that covers the given
  // fraction of pairs, and the fraction covered by C = 50.
  std::optional<double> integrated_C95;
  std::optional<double> integrated_fraction_50;
  // Sum max(dF1, 0) / sum |dF1| over consecutive samples.
  std::optional<double> F1_increase_share;
  std::optional<GridField> initial_field;
  std::optional<GridField> final_field;  // in the last box, frame coordinates
};

// Symmetry action u -> lambda0^{1/2} u(t0 + lambda0^3 tau, lambda0 y + x0) on
// recorded scalars; s is shifted by s0.
struct Renormalization {
  double lambda0 = 1.0, t0 = 0.0, x0 = 0.0, s0 = 0.0;
  Renormalization inverse() const;
};
SeriesRow renormalize(const SeriesRow& row, const Renormalization& g);
std::vector<SeriesRow> renormalize(const std::vector<SeriesRow>& rows, const Renormalization& g);
// lambda0^{1/2} u(lambda0 y + x0) on the target grid.
GridField renormalize(const GridField& u, const Grid1D& target, const Renormalization& g);

struct LadderReport {
  std::vector<int> n;
  std::vector<RunRecord> runs;
  std::pair<double, double> tau_window{0.0, 0.0};
  std::vector<double> tau;                    // common sampling of the window
  std::vector<std::vector<double>> lambda_v;  // per n, on tau
  std::vector<std::vector<double>> sup_distance;
  std::vector<double> consecutive;  // sup distance between neighbours in n
  bool decreasing = false;
  std::vector<double> slopes;
  std::vector<double> mass_identity_error;  // |int v_n^2(0) - int u_n^2(0)|
  std::vector<std::string> gaps;
};

RunRecord run_soliton_sanity(const ExperimentConfig& cfg);
RunRecord run_defocus_exit(const ExperimentConfig& cfg);
RunRecord run_focus_blowup(const ExperimentConfig& cfg);
LadderReport run_minimal_mass_construction(const ExperimentConfig& cfg);
RunRecord run_functional_audit(const ExperimentConfig& cfg);

// Smallest C with N(s2) <= C (N(s1) + |b(s1)|^3 + |b(s2)|^3) on the given
// fraction of pairs s1 < s2, and the fraction of pairs covered by C_ref.
std::pair<double, double> integrated_bound(const std::vector<SeriesRow>& rows, double fraction,
                                           double C_ref);

// series.csv, fits.json, outcome.json, config.txt and final.bin in dir.
void write_run_record(const RunRecord& record, const std::filesystem::path& dir);
void write_ladder_report(const LadderReport& report, const std::filesystem::path& dir);
std::vector<SeriesRow> read_series_csv(const std::filesystem::path& path);
std::string fits_json(const RunRecord& record);
std::string outcome_json(const RunRecord& record);

}  // namespace gkdv
