#include "gkdv/modulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace gkdv {
namespace {

// Beyond this |y| the fixed directions are below 1e-14.
constexpr double kCoreRadius = 45.0;

struct Directions {
  double ylq, lq, q, dq;
};

Directions directions_at(double y) {
  const auto g = ground_state_at(y);
  return {y * g.lambda, g.lambda, g.q, g.dq};
}

// Sum over u's grid of u(x') f((x' - x)/lambda) h lambda^{-1/2} for the four
// directions, restricted to the window and the core.
std::array<double, 4> rescaled_moments(const GridField& u, double lambda, double x,
                                       const ObservationWindow& w) {
  const Grid1D& g = u.grid();
  std::array<double, 4> m{};
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double xj = g.x(j);
    if (!w.contains(xj)) continue;
    const double y = (xj - x) / lambda;
    if (std::abs(y) > kCoreRadius) continue;
    const auto d = directions_at(y);
    m[0] += u[j] * d.ylq;
    m[1] += u[j] * d.lq;
    m[2] += u[j] * d.q;
    m[3] += u[j] * d.dq;
  }
  const double scale = g.spacing() / std::sqrt(lambda);
  for (double& v : m) v *= scale;
  return m;
}

// (chi_b P, f) for f in (y Lambda Q, Lambda Q, Q) on the y-grid.
std::array<double, 3> plateau_moments(const ModulationBasis& mb, double b) {
  const ProfileSet& ps = mb.profiles;
  const Grid1D& g = ps.grid;
  std::array<double, 3> m{};
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double y = g.x(j);
    if (std::abs(y) > kCoreRadius) continue;
    const double w = smooth_cutoff(y, b) * ps.P[j];
    m[0] += w * mb.yLambdaQ[j];
    m[1] += w * ps.LambdaQ[j];
    m[2] += w * ps.Q[j];
  }
  for (double& v : m) v *= g.spacing();
  return m;
}

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct NewtonResult {
  Eigen::VectorXd p;
  std::vector<double> history;
  int iterations = 0;
};

// Newton with centered-difference Jacobian. Component 0 of p must stay
// positive; the step is halved until it does and until the residual is finite.
NewtonResult newton(Eigen::VectorXd p, const ResidualFn& f, const Eigen::VectorXd& steps,
                    double tol, int max_iterations) {
  NewtonResult out;
  Eigen::VectorXd r = f(p);
  const auto n = p.size();
  while (true) {
    const double rn = r.cwiseAbs().maxCoeff();
    if (!std::isfinite(rn)) throw DecompositionError("decompose: non-finite residual");
    out.history.push_back(rn);
    if (rn < tol) break;
    if (out.iterations >= max_iterations)
      throw DecompositionError("decompose: Newton did not converge; outside soliton tube");
    Eigen::MatrixXd J(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::VectorXd pp = p, pm = p;
      pp[k] += steps[k];
      pm[k] -= steps[k];
      J.col(k) = (f(pp) - f(pm)) / (2.0 * steps[k]);
    }
    Eigen::VectorXd delta = -J.fullPivLu().solve(r);
    if (!delta.allFinite()) throw DecompositionError("decompose: singular Jacobian");
    double scale = 1.0;
    Eigen::VectorXd trial, rt;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      trial = p + scale * delta;
      if (!(trial[0] > 0.0)) continue;
      rt = f(trial);
      if (rt.allFinite()) break;
    }
    if (!(trial[0] > 0.0) || !rt.allFinite())
      throw DecompositionError("decompose: no admissible Newton step");
    p = trial;
    r = rt;
    ++out.iterations;
  }
  out.p = p;
  return out;
}

}  // namespace

ModulationBasis make_modulation_basis(ProfileSet profiles) {
  const Grid1D g = profiles.grid;
  ModulationBasis mb{std::move(profiles), GridField(g), GridField(g), GridField(g)};
  const ProfileSet& ps = mb.profiles;
  const GridField& Q = ps.Q;
  mb.yLambdaQ = GridField::sample(g, [](double y) { return directions_at(y).ylq; });

  // int_{-inf}^y Q = intQ (1 - H) + periodic antiderivative of Q + intQ H'.
  GridField dH = GridField::sample(g, [](double y) {
    const double c = 1.0 / std::cosh(y);
    return -0.5 * c * c;
  });
  GridField cumQ = periodic_antiderivative(Q + ps.intQ * dH);
  for (std::size_t j = 0; j < g.size(); ++j) cumQ[j] += ps.intQ * (1.0 - plateau_step(g.x(j)));

  // int_{-inf}^y Lambda Q = y Q - (1/2) int_{-inf}^y Q.
  const double c1 = 4.0 / (ps.intQ * ps.intQ);
  for (std::size_t j = 0; j < g.size(); ++j)
    mb.rho1[j] = c1 * (g.x(j) * Q[j] - 0.5 * cumQ[j]);

  GridField LambdaP = 0.5 * ps.P;
  for (std::size_t j = 0; j < g.size(); ++j) LambdaP[j] += g.x(j) * ps.Pprime[j];
  mb.LambdaP_Q = inner(LambdaP, Q);
  mb.LambdaQ_norm2 = inner(ps.LambdaQ, ps.LambdaQ);
  const double ratio = mb.LambdaP_Q / mb.LambdaQ_norm2;
  const double c2 = 16.0 / (ps.intQ * ps.intQ);
  for (std::size_t j = 0; j < g.size(); ++j)
    mb.rho2[j] = c2 * (ratio * ps.LambdaQ[j] + ps.P[j] - 0.5 * ps.intQ) - 8.0 * mb.rho1[j];

  mb.Q_dot = {inner(Q, mb.yLambdaQ), inner(Q, ps.LambdaQ), ps.intQ2};
  return mb;
}

std::array<double, 3> orthogonality_residuals(const GridField& u, const ModulationBasis& mb,
                                              double lambda, double x, double b,
                                              const ObservationWindow& window) {
  const auto m = rescaled_moments(u, lambda, x, window);
  const auto pm = plateau_moments(mb, b);
  std::array<double, 3> r{};
  for (int i = 0; i < 3; ++i) r[i] = m[i] - mb.Q_dot[i] - b * pm[i];
  return r;
}

ModulationState decompose(const GridField& u, const ModulationBasis& mb,
                          std::optional<ModulationGuess> guess, const DecomposeOptions& opt) {
  if (!u.all_finite()) throw DecompositionError("decompose: non-finite input");
  const ObservationWindow window = opt.window.value_or(ObservationWindow::whole(u.grid()));
  if (!guess) {
    std::size_t jmax = 0;
    for (std::size_t j = 0; j < u.size(); ++j)
      if (window.contains(u.grid().x(j)) && u[j] > u[jmax]) jmax = j;
    if (!(u[jmax] > 0.0)) throw DecompositionError("decompose: no positive peak; outside soliton tube");
    const double r = ground_state_at(0.0).q / u[jmax];
    guess = ModulationGuess{r * r, 0.0, u.grid().x(jmax)};
  }
  if (!(guess->lambda > 0.0)) throw std::invalid_argument("decompose: guess lambda must be positive");

  const ResidualFn f = [&](const Eigen::VectorXd& p) {
    const auto r = orthogonality_residuals(u, mb, p[0], p[1], p[2], window);
    return Eigen::Vector3d(r[0], r[1], r[2]).eval();
  };
  const Eigen::Vector3d p0(guess->lambda, guess->x, guess->b);
  const auto step_for = [&](const Eigen::VectorXd& p) {
    return Eigen::Vector3d(opt.fd_step * p[0], opt.fd_step * p[0],
                           opt.fd_step * std::max(std::abs(p[2]), 1.0));
  };
  // Steps are fixed from the guess; they only affect the Jacobian.
  const NewtonResult nr = newton(p0, f, step_for(p0), opt.tolerance, opt.max_iterations);

  const ProfileSet& ps = mb.profiles;
  const Grid1D& yg = ps.grid;
  ModulationState st(nr.p[0], nr.p[2], nr.p[1], GridField(yg), GridField(yg));
  st.residual_history = nr.history;
  st.iterations = nr.iterations;

  const double lam = st.lambda;
  GridField v = resample_onto(u, yg, lam, st.x_center);
  GridField vy = resample_onto(derivative(u, 1), yg, lam, st.x_center);
  const GridField Qb = evaluate_Qb(st.b, ps);
  const GridField Qbp = evaluate_Qb_prime(st.b, ps);
  const double s12 = std::sqrt(lam), s32 = lam * s12;
  for (std::size_t j = 0; j < yg.size(); ++j) {
    if (!window.contains(lam * yg.x(j) + st.x_center)) continue;
    st.eps[j] = s12 * v[j] - Qb[j];
    st.eps_y[j] = s32 * vy[j] - Qbp[j];
  }
  st.eps_l2 = l2_norm(st.eps);
  st.tube_exit = st.eps_l2 > opt.alpha_star;
  return st;
}

GridField synthesize(const ModulationBasis& mb, const Grid1D& target, double lambda, double b,
                     double x0) {
  if (!(lambda > 0.0)) throw std::invalid_argument("synthesize: lambda must be positive");
  const ProfileSet& ps = mb.profiles;
  const double half = 0.5 * ps.grid.length();
  GridField Pt = resample_onto(ps.P_periodic, target, 1.0 / lambda, -x0 / lambda);
  const double scale = 1.0 / std::sqrt(lambda);
  GridField out(target);
  for (std::size_t j = 0; j < target.size(); ++j) {
    const double y = (target.x(j) - x0) / lambda;
    const double pt = (y >= -half && y < half) ? Pt[j] : 0.0;
    const double P = ps.Pleft * plateau_step(y) + pt;
    out[j] = scale * (ground_state_at(y).q + b * smooth_cutoff(y, b) * P);
  }
  return out;
}

double tube_distance(const GridField& u, const ModulationBasis& mb, ModulationGuess guess,
                     const ObservationWindow& window) {
  // (Q, Lambda Q) = (Q, Q') = 0, so the stationarity residuals are moments.
  const ResidualFn f = [&](const Eigen::VectorXd& p) {
    const auto m = rescaled_moments(u, p[0], p[1], window);
    return Eigen::Vector2d(m[1], m[3]).eval();
  };
  const Eigen::Vector2d p0(guess.lambda, guess.x);
  const Eigen::Vector2d steps(1e-6 * guess.lambda, 1e-6 * guess.lambda);
  const NewtonResult nr = newton(p0, f, steps, 1e-10, 50);
  const auto m = rescaled_moments(u, nr.p[0], nr.p[1], window);
  double uu = 0.0;
  const Grid1D& g = u.grid();
  for (std::size_t j = 0; j < g.size(); ++j)
    if (window.contains(g.x(j))) uu += u[j] * u[j];
  uu *= g.spacing();
  return std::sqrt(std::max(0.0, uu - 2.0 * m[2] + mb.profiles.intQ2));
}

RefinedObservables refined_observables(const ModulationState& st, const ModulationBasis& mb) {
  require_same_grid(st.eps, mb.rho1, "refined_observables");
  RefinedObservables r;
  r.J1 = inner(st.eps, mb.rho1);
  r.J2 = inner(st.eps, mb.rho2);
  r.lambda0 = st.lambda * (1.0 - r.J1) * (1.0 - r.J1);
  return r;
}

double local_eps_norm2(const GridField& eps) {
  const Grid1D& g = eps.grid();
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    acc += eps[j] * eps[j] * std::exp(-std::abs(g.x(j)) / 10.0);
  return acc * g.spacing();
}

std::vector<RateSample> modulation_rates(const std::vector<TrajectoryPoint>& tr) {
  const std::size_t m = tr.size();
  if (m < 3) throw std::invalid_argument("modulation_rates: need at least three samples");
  for (std::size_t i = 1; i < m; ++i)
    if (!(tr[i].s > tr[i - 1].s)) throw std::invalid_argument("modulation_rates: s must increase");

  // Three-point derivative weights at node i of (i0, i0+1, i0+2).
  auto weights = [&](std::size_t i0, std::size_t i) {
    const double a = tr[i0].s, b = tr[i0 + 1].s, c = tr[i0 + 2].s, s = tr[i].s;
    return std::array<double, 3>{(2 * s - b - c) / ((a - b) * (a - c)),
                                 (2 * s - a - c) / ((b - a) * (b - c)),
                                 (2 * s - a - b) / ((c - a) * (c - b))};
  };
  std::vector<RateSample> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t i0 = i == 0 ? 0 : (i == m - 1 ? m - 3 : i - 1);
    const auto w = weights(i0, i);
    double dlog = 0.0, dx = 0.0, db = 0.0;
    for (int k = 0; k < 3; ++k) {
      const auto& p = tr[i0 + k];
      dlog += w[k] * std::log(p.lambda);
      dx += w[k] * p.x;
      db += w[k] * p.b;
    }
    const auto& p = tr[i];
    out[i] = {p.s, dlog + p.b, dx / p.lambda - 1.0, db + 2.0 * p.b * p.b,
              std::sqrt(p.eps_local) + p.b * p.b};
  }
  return out;
}

}  // namespace gkdv
