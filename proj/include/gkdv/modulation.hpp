#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gkdv/grid.hpp"
#include "gkdv/profiles.hpp"

namespace gkdv {

// Profile data plus the fixed directions used by the decomposition, all on the
// y-grid of the profile set.
struct ModulationBasis {
  ProfileSet profiles;
  GridField yLambdaQ;
  GridField rho1, rho2;
  double LambdaP_Q = 0.0;         // (Lambda P, Q)
  double LambdaQ_norm2 = 0.0;     // ||Lambda Q||^2
  std::array<double, 3> Q_dot{};  // (Q, y Lambda Q), (Q, Lambda Q), (Q, Q)
};

ModulationBasis make_modulation_basis(ProfileSet profiles);

// Part of the lab box where u is trusted. Points of the rescaled y-grid that
// map outside it carry eps = 0.
struct ObservationWindow {
  double left;
  double right;
  bool contains(double x) const { return x >= left && x < right; }
  static ObservationWindow whole(const Grid1D& g) { return {g.left(), g.left() + g.length()}; }
};

struct DecomposeOptions {
  double alpha_star = 0.04;
  double tolerance = 1e-10;
  int max_iterations = 50;
  double fd_step = 1e-6;
  std::optional<ObservationWindow> window;  // defaults to the whole box
};

struct ModulationGuess {
  double lambda;
  double b;
  double x;
};

struct ModulationState {
  ModulationState(double lambda_, double b_, double x_, GridField eps_, GridField eps_y_)
      : lambda(lambda_), b(b_), x_center(x_), eps(std::move(eps_)), eps_y(std::move(eps_y_)) {}

  double lambda;
  double b;
  double x_center;
  GridField eps;    // lambda^{1/2} u(lambda y + x) - Q_b(y)
  GridField eps_y;  // from u_x, not from differentiating eps
  double s = 0.0;
  double t = 0.0;
  std::vector<double> residual_history;  // max |orthogonality residual| per iterate
  int iterations = 0;
  double eps_l2 = 0.0;
  bool tube_exit = false;  // eps_l2 > alpha_star
};

class DecompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ((eps, y Lambda Q), (eps, Lambda Q), (eps, Q)) for the given parameters,
// by quadrature of lambda^{-1/2} u((x' - x)/lambda) against the closed-form
// directions on u's grid.
std::array<double, 3> orthogonality_residuals(const GridField& u, const ModulationBasis& basis,
                                              double lambda, double x, double b,
                                              const ObservationWindow& window);

// Newton iteration on the three orthogonality conditions, centered-difference
// Jacobian. Default guess: lambda = (Q(0)/max u)^2, x = argmax u, b = 0.
// Throws DecompositionError after max_iterations or on a non-finite iterate.
ModulationState decompose(const GridField& u, const ModulationBasis& basis,
                          std::optional<ModulationGuess> guess = std::nullopt,
                          const DecomposeOptions& options = {});

// lambda^{-1/2} Q_b((x - x0)/lambda) sampled on target.
GridField synthesize(const ModulationBasis& basis, const Grid1D& target, double lambda, double b,
                     double x0);

// inf over (lambda0, x0) of ||u - lambda0^{-1/2} Q((. - x0)/lambda0)||, by
// Newton on the stationarity conditions (u - Q_{lambda0,x0}, Lambda Q) =
// (u - Q_{lambda0,x0}, Q') = 0.
double tube_distance(const GridField& u, const ModulationBasis& basis, ModulationGuess guess,
                     const ObservationWindow& window);

struct RefinedObservables {
  double J1 = 0.0;
  double J2 = 0.0;
  double lambda0 = 0.0;  // lambda (1 - J1)^2
};

RefinedObservables refined_observables(const ModulationState& state, const ModulationBasis& basis);

// Per-sample residuals of the leading-order modulation laws and the local size
// of eps, from centered differences on a nonuniform s-grid.
struct RateSample {
  double s = 0.0;
  double lambda_residual = 0.0;  // lambda_s / lambda + b
  double x_residual = 0.0;       // x_s / lambda - 1
  double b_residual = 0.0;       // b_s + 2 b^2
  double bound = 0.0;            // (int eps^2 e^{-|y|/10})^{1/2} + b^2
};

struct TrajectoryPoint {
  double s, lambda, b, x;
  double eps_local = 0.0;  // int eps^2 e^{-|y|/10}
};

// Throws std::invalid_argument on fewer than three samples or non-increasing s.
// The first and last samples use one-sided three-point formulas.
std::vector<RateSample> modulation_rates(const std::vector<TrajectoryPoint>& trajectory);

double local_eps_norm2(const GridField& eps);  // int eps^2 e^{-|y|/10}

// Half-exponential weights. phi: e^y on y < -1, 1 + y on (-1/2, 1/2), y^2 on
// y > 2, phi' > 0. psi: e^{2y} on y < -1, 1 on y > -1/2, psi' >= 0.
double weight_phi(double y);
double weight_phi_prime(double y);
double weight_psi(double y);
double weight_psi_prime(double y);

struct FunctionalWeights {
  double B;
  GridField psi_B, phi_B, phi_B_prime;
};

FunctionalWeights make_weights(const Grid1D& grid, double B = 100.0);

struct FunctionalReport {
  double N_norm = 0.0;
  double N_loc = 0.0;  // int (eps_y^2 + eps^2) phi_B'
  double F1 = 0.0;
  double F2 = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
  double lambda0 = 0.0;
  double b_over_lambda2 = 0.0;
  double right_tail_w10 = 0.0;  // int_{y>0} y^10 eps^2
  double eps_local = 0.0;       // int eps^2 e^{-|y|/10}
};

FunctionalReport functionals(const ModulationState& state, const FunctionalWeights& weights,
                             const ModulationBasis& basis);

// Regime thresholds for the Lyapunov audit.
struct AuditRegime {
  double smallness = 0.1;    // ||eps|| + |b| + N
  double comparison = 0.1;   // (|b| + N) / lambda^2
  double tail_factor = 10.0;  // int_{y>0} y^10 eps^2 <= tail_factor (1 + lambda^{-10})
};

struct AuditSample {
  double s, lambda, b, eps_l2;
  FunctionalReport report;
};

struct MonotonicityAudit {
  std::size_t intervals = 0;
  double C = 0.0;  // constant used for the per-interval test
  double fraction_F1 = 0.0;  // dF1/ds <= C b^4
  double fraction_F2 = 0.0;  // d(F2/lambda^2)/ds <= C b^4 / lambda^2
  // mu_fit: 10th percentile of -dF1/ds / N_loc over intervals (>= 0). C_fit:
  // smallest C with dF1/ds + mu_fit N_loc <= C b^4 on every interval.
  double mu_fit = 0.0;
  double C_fit = 0.0;
  double positive_over_total = 0.0;  // sum max(dF1, 0) / sum |dF1|
  // Smallest C with N(s2) <= C [N(s1) + |b1|^3 + |b2|^3] on the given
  // fraction of pairs s1 < s2.
  double C_integrated = 0.0;
  double integrated_fraction = 0.95;
  // Smallest C* with |b2/lambda2^2 - b1/lambda1^2| <= (C*/10)[b1^2/lambda1^2 +
  // b2^2/lambda2^2 + N_loc(s1)/lambda1^2] over all pairs s1 < s2.
  double C_rigidity = 0.0;
};

class AuditRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws AuditRefused naming the violated hypothesis (H1, H2 or H3), or on
// fewer than three samples.
MonotonicityAudit monotonicity_audit(const std::vector<AuditSample>& samples, double C,
                                     const AuditRegime& regime = {},
                                     double integrated_fraction = 0.95);

}  // namespace gkdv
