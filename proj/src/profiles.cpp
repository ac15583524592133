#include "gkdv/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gkdv {
namespace {

const double kQuarticRoot3 = std::pow(3.0, 0.25);

// sech^2(y) and tanh(y) from e = exp(-2|y|); no overflow for large |y|.
struct SechTanh {
  double sech2;
  double tanh;
};

SechTanh sech_tanh(double y) {
  const double e = std::exp(-2.0 * std::abs(y));
  const double d = 1.0 + e;
  const double t = (1.0 - e) / d;
  return {4.0 * e / (d * d), y < 0.0 ? -t : t};
}

// Plateau step H = (1 - tanh y)/2 and its first two derivatives.
struct StepValues {
  double h, dh, d2h;
};

StepValues step_at(double y) {
  const auto [s2, t] = sech_tanh(y);
  return {0.5 * (1.0 - t), -0.5 * s2, s2 * t};
}

GridField step_field(const Grid1D& g, int which) {
  return GridField::sample(g, [which](double y) {
    const auto s = step_at(y);
    return which == 0 ? s.h : which == 1 ? s.dh : s.d2h;
  });
}

// Symmetric operator used inside the Krylov solve: L + kappa q q^T, where q
// is the unit Euclidean vector along Q'.
struct DeflatedL {
  const GridField& q4;
  std::vector<double> q;
  double kappa;

  void apply(const std::vector<double>& v, std::vector<double>& out) const {
    const Grid1D& g = q4.grid();
    GridField f(g, v);
    GridField d2 = derivative(f, 2);
    double proj = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) proj += q[j] * v[j];
    out.resize(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
      out[j] = -d2[j] + v[j] - 5.0 * q4[j] * v[j] + kappa * proj * q[j];
  }
};

// (1 - d^2)^{-1}, symmetric positive definite.
void precondition(const Grid1D& g, const std::vector<double>& r, std::vector<double>& out) {
  auto c = spectrum(GridField(g, r));
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double kk = g.wavenumber(k);
    c[k] /= 1.0 + kk * kk;
  }
  GridField z = from_spectrum(g, c);
  out.assign(z.values().begin(), z.values().end());
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

struct KrylovResult {
  std::vector<double> x;
  int iterations = 0;
  bool converged = false;
};

// Preconditioned MINRES (Paige-Saunders recurrences).
KrylovResult minres(const DeflatedL& op, const std::vector<double>& rhs, double tol, int max_iter) {
  const Grid1D& g = op.q4.grid();
  const std::size_t n = rhs.size();
  KrylovResult res;
  res.x.assign(n, 0.0);

  std::vector<double> r1 = rhs, r2 = rhs, y, v(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0);
  precondition(g, r1, y);
  const double beta1 = std::sqrt(std::max(dot(r1, y), 0.0));
  if (beta1 == 0.0) {
    res.converged = true;
    return res;
  }
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;

  for (int itn = 1; itn <= max_iter; ++itn) {
    const double s = 1.0 / beta;
    for (std::size_t j = 0; j < n; ++j) v[j] = s * y[j];
    op.apply(v, y);
    if (itn >= 2)
      for (std::size_t j = 0; j < n; ++j) y[j] -= (beta / oldb) * r1[j];
    const double alfa = dot(v, y);
    for (std::size_t j = 0; j < n; ++j) y[j] -= (alfa / beta) * r2[j];
    r1.swap(r2);
    r2 = y;
    precondition(g, r2, y);
    oldb = beta;
    beta = std::sqrt(std::max(dot(r2, y), 0.0));

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar *= sn;

    w1.swap(w2);
    w2.swap(w);
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = (v[j] - oldeps * w1[j] - delta * w2[j]) / gamma;
      res.x[j] += phi * w[j];
    }
    res.iterations = itn;
    if (phibar <= tol * beta1) {
      res.converged = true;
      break;
    }
    if (beta == 0.0) break;
  }
  return res;
}

}  // namespace

bool in_interior(const Grid1D& g, std::size_t j) {
  return std::abs(g.x(j)) <= 0.4 * g.length();
}

GroundStateValues ground_state_at(double y) {
  const double e = std::exp(-4.0 * std::abs(y));
  // sech(2y) = 2 e^{-2|y|} / (1 + e^{-4|y|}), tanh(2|y|) = (1 - e) / (1 + e).
  const double q = kQuarticRoot3 * std::sqrt(2.0 * std::sqrt(e) / (1.0 + e));
  const double t = (1.0 - e) / (1.0 + e);
  const double dq = -q * (y < 0.0 ? -t : t);
  return {q, dq, 0.5 * q + y * dq};
}

// Plateaus absorb a 1e-12 band at each end so that chi_b is exactly 0 or 1 at
// the nominal abscissae despite rounding in |b|^{3/4} y.
double cutoff(double z) {
  if (z <= -2.0 + 1e-12) return 0.0;
  if (z >= -1.0 - 1e-12) return 1.0;
  const double t = z + 2.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double cutoff_derivative(double z) {
  if (z <= -2.0 + 1e-12 || z >= -1.0 - 1e-12) return 0.0;
  const double t = z + 2.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

double smooth_cutoff(double y, double b) {
  if (b == 0.0) return 1.0;
  return cutoff(std::pow(std::abs(b), kCutoffExponent) * y);
}

double smooth_cutoff_derivative(double y, double b) {
  if (b == 0.0) return 0.0;
  const double s = std::pow(std::abs(b), kCutoffExponent);
  return s * cutoff_derivative(s * y);
}

double plateau_step(double y) { return step_at(y).h; }

GridField ground_state(const Grid1D& grid) {
  return GridField::sample(grid, [](double y) { return ground_state_at(y).q; });
}

GridField apply_L(const GridField& f, const ProfileSet& profiles) {
  require_same_grid(f, profiles.Q, "apply_L");
  GridField out = derivative(f, 2);
  for (std::size_t j = 0; j < f.size(); ++j)
    out[j] = -out[j] + f[j] - 5.0 * profiles.Q4[j] * f[j];
  return out;
}

PSolution solve_P(const GridField& Q) {
  const Grid1D& g = Q.grid();
  const std::size_t n = g.size();
  const GridField Qp = GridField::sample(g, [](double y) { return ground_state_at(y).dq; });
  GridField Q4 = Q * Q;
  Q4 *= Q4;
  const double intQ = integrate(Q);
  const double Pleft = 0.5 * intQ;
  const GridField H = step_field(g, 0);
  const GridField dH = step_field(g, 1);
  const GridField d2H = step_field(g, 2);

  // S(y) = int_y^inf Q = intQ * H + A with A periodic, A(left) = 0.
  GridField dA = Q * -1.0 - intQ * dH;
  const GridField S = intQ * H + periodic_antiderivative(dA);

  // L P = G with G = y Q + S/2; write P = Pleft * H + Pt and solve for Pt.
  std::vector<double> rhs(n);
  GridField LH(g);
  for (std::size_t j = 0; j < n; ++j) {
    LH[j] = -d2H[j] + H[j] - 5.0 * Q4[j] * H[j];
    rhs[j] = g.x(j) * Q[j] + 0.5 * S[j] - Pleft * LH[j];
  }

  DeflatedL op{Q4, std::vector<double>(Qp.values().begin(), Qp.values().end()), 1.0};
  const double qn = std::sqrt(dot(op.q, op.q));
  for (double& v : op.q) v /= qn;
  // The preconditioned norm weights mode k by 1/(1+k^2), so the true residual
  // is driven down by a few refinement sweeps on the unweighted residual.
  std::vector<double> x(n, 0.0), r = rhs, ax;
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  int iterations = 0;
  for (int sweep = 0; sweep < 6; ++sweep) {
    auto kr = minres(op, r, 1e-14, 5000);
    iterations += kr.iterations;
    if (!kr.converged)
      throw std::runtime_error("solve_P: linear solve singular (grid too coarse or box too small)");
    for (std::size_t j = 0; j < n; ++j) x[j] += kr.x[j];
    op.apply(x, ax);
    for (std::size_t j = 0; j < n; ++j) r[j] = rhs[j] - ax[j];
    if (std::sqrt(dot(r, r)) <= 1e-15 * rhs_norm) break;
  }

  GridField Pt(g, std::move(x));
  const double c = inner(Pt + Pleft * H, Qp) / inner(Qp, Qp);
  Pt -= c * Qp;
  const GridField P = Pt + Pleft * H;

  // (L P)' - Lambda Q, with L P - Pleft * H periodic.
  GridField LPt = derivative(Pt, 2);
  for (std::size_t j = 0; j < n; ++j) LPt[j] = -LPt[j] + Pt[j] - 5.0 * Q4[j] * Pt[j];
  const GridField dLP = derivative(LPt + Pleft * (LH - H), 1) + Pleft * dH;

  double residual = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (in_interior(g, j))
      residual = std::max(residual, std::abs(dLP[j] - ground_state_at(g.x(j)).lambda));
  if (residual > 1e-7) {
    std::ostringstream msg;
    msg << "solve_P: residual " << std::scientific << residual << " exceeds 1e-7";
    throw std::runtime_error(msg.str());
  }

  PSolution sol{P, derivative(Pt, 1) + Pleft * dH, Pt, Pleft, residual, iterations};
  return sol;
}

ProfileSet make_profiles(const Grid1D& grid) {
  ProfileSet ps{grid,
                ground_state(grid),
                GridField::sample(grid, [](double y) { return ground_state_at(y).dq; }),
                GridField::sample(grid, [](double y) { return ground_state_at(y).lambda; }),
                GridField(grid),
                GridField(grid),
                GridField(grid),
                GridField(grid)};
  ps.Q4 = ps.Q * ps.Q;
  ps.Q4 *= ps.Q4;
  auto sol = solve_P(ps.Q);
  ps.P = std::move(sol.P);
  ps.Pprime = std::move(sol.Pprime);
  ps.P_periodic = std::move(sol.periodic_part);
  ps.Pleft = sol.Pleft;
  ps.P_residual = sol.residual;
  ps.intQ = integrate(ps.Q);
  ps.intQ2 = inner(ps.Q, ps.Q);
  ps.PQ = inner(ps.P, ps.Q);
  ps.PQprime = inner(ps.P, ps.Qprime);
  const GridField r = derivative(ps.Q, 2) - ps.Q + ps.Q4 * ps.Q;
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (in_interior(grid, j))
      ps.ground_state_residual = std::max(ps.ground_state_residual, std::abs(r[j]));
  return ps;
}

GridField evaluate_Qb(double b, const ProfileSet& profiles) {
  const Grid1D& g = profiles.grid;
  GridField out(g);
  for (std::size_t j = 0; j < g.size(); ++j)
    out[j] = profiles.Q[j] + b * smooth_cutoff(g.x(j), b) * profiles.P[j];
  return out;
}

GridField evaluate_Qb_prime(double b, const ProfileSet& profiles) {
  const Grid1D& g = profiles.grid;
  GridField out(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double y = g.x(j);
    out[j] = profiles.Qprime[j] + b * (smooth_cutoff_derivative(y, b) * profiles.P[j] +
                                       smooth_cutoff(y, b) * profiles.Pprime[j]);
  }
  return out;
}

LocalizedProfile build_Qb(double b, const ProfileSet& profiles, double sponge_fraction) {
  if (!std::isfinite(b) || std::abs(b) > kMaxProfileB)
    throw std::invalid_argument("build_Qb: |b| must not exceed 0.2");
  const Grid1D& g = profiles.grid;
  if (b != 0.0) {
    const double reach = 2.0 * std::pow(std::abs(b), -kCutoffExponent);
    if (!(reach < 0.5 * g.length() - sponge_fraction * g.length()))
      throw std::invalid_argument("build_Qb: box too small for this b");
  }
  LocalizedProfile lp{b, evaluate_Qb(b, profiles), GridField(g),
                      GridField::sample(g, [b](double y) { return smooth_cutoff(y, b); })};
  lp.PsiB = build_PsiB(lp, profiles);
  return lp;
}

GridField build_PsiB(const LocalizedProfile& lp, const ProfileSet& profiles) {
  require_same_grid(lp.Qb, profiles.Q, "build_PsiB");
  const Grid1D& g = profiles.grid;
  const GridField& Qb = lp.Qb;
  GridField inner_term = derivative(Qb, 2) - Qb;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double q2 = Qb[j] * Qb[j];
    inner_term[j] += q2 * q2 * Qb[j];
  }
  GridField psi = derivative(inner_term, 1);
  const GridField dQb = derivative(Qb, 1);
  for (std::size_t j = 0; j < g.size(); ++j)
    psi[j] = -(psi[j] + lp.b * (0.5 * Qb[j] + g.x(j) * dQb[j]));
  return psi;
}

double mass(const GridField& u) { return inner(u, u); }

double energy(const GridField& u) {
  const GridField ux = derivative(u, 1);
  double u6 = 0.0;
  for (double v : u.values()) u6 += v * v * v * v * v * v;
  return 0.5 * inner(ux, ux) - u6 * u.grid().spacing() / 6.0;
}

}  // namespace gkdv
