#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gkdv/grid.hpp"

namespace gkdv {

struct SolverConfig {
  double dt_initial = 1e-3;
  // Upper bound on dt when a scale estimate is supplied; defaults to dt_initial.
  std::optional<double> dt_max;
  double cfl_safety = 0.5;
  // Modes with |k| < dealias_fraction * n/2 are retained.
  double dealias_fraction = 1.0 / 3.0;
  double t_max = 1.0;
  double h1_blowup_threshold = 1e4;
  // Peak damping rate in the left layer; 0 disables the sponge.
  double sponge_strength = 0.0;
  double sponge_fraction = 0.1;
  // Solve in the frame xi = x - c t.
  double frame_velocity = 0.0;

  // Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  double effective_dt_max() const { return dt_max.value_or(dt_initial); }
};

struct FlowState {
  double t = 0.0;
  GridField u;
  double mass = 0.0;
  double energy = 0.0;
  double grad_norm = 0.0;  // ||u_x||_{L^2}
  double h1_norm = 0.0;    // (||u||^2 + ||u_x||^2)^{1/2}
  double max_u = 0.0;
  double argmax_x = 0.0;
};

FlowState make_flow_state(double t, GridField u);

enum class NumericalErrorKind { Instability, StepCollapse };

class NumericalError : public std::runtime_error {
 public:
  NumericalError(NumericalErrorKind kind, const std::string& what, FlowState last_good)
      : std::runtime_error(what), kind_(kind), last_good_(std::move(last_good)) {}
  NumericalErrorKind kind() const { return kind_; }
  const FlowState& last_good() const { return last_good_; }

 private:
  NumericalErrorKind kind_;
  FlowState last_good_;
};

// Exponential time differencing RK4 (Cox-Matthews) for u_t + (u_xx + u^5)_x = 0
// in Fourier space; the dispersive part exp(i (k^3 + c k) dt) is exact. The
// state is kept inside the retained band, so the scheme is a Galerkin
// truncation: mass and energy are conserved up to time-stepping error.
class Integrator {
 public:
  Integrator(GridField u0, const SolverConfig& cfg, double t0 = 0.0);

  // One step of size dt (negative allowed); sponge applied afterwards. Throws
  // NumericalError on a non-finite result, leaving the state unchanged.
  void step(double dt);

  double time() const { return t_; }
  const Grid1D& grid() const { return grid_; }
  const SolverConfig& config() const { return cfg_; }
  GridField field() const;
  FlowState state() const;
  double mass() const;
  double grad_norm() const;
  // Cumulative int u^2 (1 - e^{-2 sigma dt}) removed by the sponge.
  double sponge_mass_loss() const { return sponge_loss_; }
  // Distance travelled by the frame since construction or the last reset.
  double frame_offset() const { return frame_offset_; }

  void set_frame_velocity(double c);
  // Replaces the field (projected onto the band) and the clock.
  void reset(const GridField& u, double t);

 private:
  void nonlinear(const std::vector<Complex>& uh, std::vector<Complex>& out) const;
  void apply_sponge(double dt);
  struct Coefficients {
    double dt = 0.0;
    double frame_velocity = 0.0;
    std::vector<Complex> E, E2, Q, f1, f2, f3;
  };
  // Small cache keyed by (dt, frame velocity); callers keep dt on a ladder.
  const Coefficients& coefficients(double dt);

  Grid1D grid_;
  SolverConfig cfg_;
  double t_;
  double frame_offset_ = 0.0;
  double sponge_loss_ = 0.0;
  std::size_t kcut_;  // retained: k < kcut_
  std::vector<double> k_;
  std::vector<double> sigma_;
  std::vector<Complex> uh_;
  std::vector<Coefficients> coeff_cache_;
  mutable std::vector<double> work_;
  mutable std::vector<Complex> spec_work_;
};

// Single step on a FlowState (convenience wrapper).
FlowState step(const FlowState& state, const SolverConfig& cfg, double dt);

// dt = min(dt_max, dt_initial * lambda^3) with a scale estimate lambda,
// otherwise min(dt_initial, cfl_safety * h / (4 ||u||_inf^2)). Both are
// clamped by the explicit stability bound cfl_safety * 5.6 / (5 k_band ||u||^4).
double adapt_dt(const FlowState& state, const SolverConfig& cfg,
                std::optional<double> lambda = std::nullopt);

enum class RunStatus { Completed, BlowupDetected, Unstable, Stopped };
const char* to_string(RunStatus s);

struct RunOutcome {
  RunStatus status;
  FlowState final_state;
  std::optional<double> T_est;
  std::size_t steps;
  double sponge_mass_loss;
  std::string message;
};

struct ObserverReply {
  bool stop = false;
  std::optional<double> lambda;  // scale estimate for the next dt
  std::optional<double> frame_velocity;
};

using Observer = std::function<ObserverReply(const FlowState&)>;

// Integrates until t_max, blow-up (h1_norm > threshold), instability, or an
// observer stop. The observer sees the initial and every accepted state.
RunOutcome run(const GridField& u0, const SolverConfig& cfg, const Observer& observer = {});

// Linear extrapolation of 1 / ||u_x|| to zero over the given samples.
std::optional<double> extrapolate_blowup_time(const std::vector<double>& t,
                                              const std::vector<double>& grad_norm);

}  // namespace gkdv
