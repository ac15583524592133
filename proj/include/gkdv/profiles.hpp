#pragma once

#include "gkdv/grid.hpp"

namespace gkdv {

// Exponent gamma of the cutoff scale |b|^{-gamma}.
inline constexpr double kCutoffExponent = 0.75;
// Largest |b| for which Q_b is built.
inline constexpr double kMaxProfileB = 0.2;

// Closed-form ground state Q(y) = (3 / cosh^2(2y))^{1/4} and its derivatives,
// evaluated without overflow for any y.
struct GroundStateValues {
  double q;       // Q
  double dq;      // Q'
  double lambda;  // Q/2 + y Q'
};
GroundStateValues ground_state_at(double y);

// Monotone C^2 cutoff: 0 on (-inf, -2], 1 on [-1, inf). On [-2, -1] it is the
// quintic 10 t^3 - 15 t^4 + 6 t^5 with t = z + 2.
double cutoff(double z);
double cutoff_derivative(double z);
// chi_b(y) = chi(|b|^{3/4} y); identically 1 at b = 0.
double smooth_cutoff(double y, double b);
double smooth_cutoff_derivative(double y, double b);

// Smooth step used to carry the left plateau of P: 1 at -inf, 0 at +inf.
double plateau_step(double y);

struct PSolution {
  GridField P;
  GridField Pprime;
  GridField periodic_part;  // P - Pleft * plateau_step
  double Pleft = 0.0;
  double residual = 0.0;  // interior max |(L P)' - Lambda Q|
  int iterations = 0;
};

// Q and everything derived from it on one grid. Immutable after construction.
struct ProfileSet {
  Grid1D grid;
  GridField Q, Qprime, LambdaQ, P, Pprime;
  GridField Q4;
  GridField P_periodic;
  double intQ = 0.0;
  double intQ2 = 0.0;
  double PQ = 0.0;
  double PQprime = 0.0;
  double Pleft = 0.0;
  // Both residuals are maxima over the interior |y| <= 0.4 L. Within a tenth
  // of the box from the wrap the closed-form tails are not periodic to
  // round-off and spectral third derivatives amplify the mismatch.
  double ground_state_residual = 0.0;  // max |Q'' - Q + Q^5|
  double P_residual = 0.0;             // max |(L P)' - Lambda Q|
};

ProfileSet make_profiles(const Grid1D& grid);

// |x_j| <= 0.4 L.
bool in_interior(const Grid1D& grid, std::size_t j);

GridField ground_state(const Grid1D& grid);

// L f = -f'' + f - 5 Q^4 f with the spectral second derivative.
GridField apply_L(const GridField& f, const ProfileSet& profiles);

// P with (L P)' = Lambda Q, P -> (1/2) int Q on the left, P -> 0 on the right,
// (P, Q') = 0. Throws std::runtime_error if the solve fails or the residual
// exceeds 1e-7.
PSolution solve_P(const GridField& Q);

struct LocalizedProfile {
  double b = 0.0;
  GridField Qb;
  GridField PsiB;
  GridField chi_b;
};

// Q_b = Q + b chi_b P. Requires |b| <= 0.2 and the cutoff region to sit inside
// the box minus the sponge layer; otherwise throws std::invalid_argument.
LocalizedProfile build_Qb(double b, const ProfileSet& profiles, double sponge_fraction = 0.1);

// -Psi_b = (Q_b'' - Q_b + Q_b^5)' + b Lambda Q_b.
GridField build_PsiB(const LocalizedProfile& lp, const ProfileSet& profiles);

// Unchecked Q_b and Q_b' on the profile grid. Used by the decomposition, where
// the cutoff may extend beyond the y-box.
GridField evaluate_Qb(double b, const ProfileSet& profiles);
GridField evaluate_Qb_prime(double b, const ProfileSet& profiles);

double mass(const GridField& u);
double energy(const GridField& u);

}  // namespace gkdv
