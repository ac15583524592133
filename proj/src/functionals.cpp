#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gkdv/modulation.hpp"

namespace gkdv {
namespace {

// Quintic Hermite interpolant on [a, b] matching (value, first, second
// derivative) at both ends; returns value and first derivative.
struct Hermite5 {
  double a, d;
  std::array<double, 6> c;  // coefficients in t = (y - a)/d

  Hermite5(double a_, double b_, std::array<double, 3> f, std::array<double, 3> g) : a(a_), d(b_ - a_) {
    // Basis polynomials in t, lowest degree first.
    static constexpr double H[6][6] = {
        {1, 0, 0, -10, 15, -6},  {0, 1, 0, -6, 8, -3},  {0, 0, 0.5, -1.5, 1.5, -0.5},
        {0, 0, 0, 0.5, -1, 0.5}, {0, 0, 0, -4, 7, -3},  {0, 0, 0, 10, -15, 6}};
    const double w[6] = {f[0], d * f[1], d * d * f[2], d * d * g[2], d * g[1], g[0]};
    c.fill(0.0);
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 6; ++k) c[k] += w[i] * H[i][k];
  }
  double value(double y) const {
    const double t = (y - a) / d;
    double v = 0.0;
    for (int k = 5; k >= 0; --k) v = v * t + c[k];
    return v;
  }
  double slope(double y) const {
    const double t = (y - a) / d;
    double v = 0.0;
    for (int k = 5; k >= 1; --k) v = v * t + k * c[k];
    return v / d;
  }
};

// Gauss-Legendre rule on [0, 1].
struct GaussLegendre {
  static constexpr int kOrder = 32;
  std::array<double, kOrder> x{}, w{};
  GaussLegendre() {
    for (int i = 0; i < kOrder; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (kOrder + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= kOrder; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kOrder * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = 0.5 * (1.0 - z);
      w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

// Bridge of phi on [-1, -1/2]: phi' = exp(h(t)), t = 2(y + 1), with h the cubic
// Hermite interpolant of log phi' and its slope plus a t^2 (1-t)^2. The C^2
// quintic bridge is not monotone here, since the mean slope lies below both
// end slopes.
struct LeftBridge {
  static constexpr double kA = -1.0, kD = 0.5;
  double a = 0.0;
  GaussLegendre gl;

  double h(double t) const {
    const double t2 = t * t, t3 = t2 * t;
    // log phi'(-1) = -1, (log phi')' = 1 -> slope kD in t; at -1/2: 0 and 0.
    return -(2 * t3 - 3 * t2 + 1) + kD * (t3 - 2 * t2 + t) + a * t2 * (1 - t) * (1 - t);
  }
  double integral(double t) const {  // kD int_0^t exp(h)
    double acc = 0.0;
    for (int i = 0; i < GaussLegendre::kOrder; ++i) acc += gl.w[i] * std::exp(h(t * gl.x[i]));
    return kD * t * acc;
  }
  LeftBridge() {
    const double target = 0.5 - std::exp(-1.0);
    double lo = -200.0, hi = 0.0;
    for (int it = 0; it < 200; ++it) {
      a = 0.5 * (lo + hi);
      (integral(1.0) > target ? hi : lo) = a;
    }
    a = 0.5 * (lo + hi);
  }
  double value(double y) const { return std::exp(-1.0) + integral((y - kA) / kD); }
  double slope(double y) const { return std::exp(h((y - kA) / kD)); }
};

const LeftBridge& phi_left() {
  static const LeftBridge b;
  return b;
}
const Hermite5& phi_right() {
  static const Hermite5 h(0.5, 2.0, {1.5, 1.0, 0.0}, {4.0, 4.0, 2.0});
  return h;
}
const Hermite5& psi_bridge() {
  const double e = std::exp(-2.0);
  static const Hermite5 h(-1.0, -0.5, {e, 2 * e, 4 * e}, {1.0, 0.0, 0.0});
  return h;
}

}  // namespace

double weight_phi(double y) {
  if (y < -1.0) return std::exp(y);
  if (y <= -0.5) return phi_left().value(y);
  if (y < 0.5) return 1.0 + y;
  if (y <= 2.0) return phi_right().value(y);
  return y * y;
}

double weight_phi_prime(double y) {
  if (y < -1.0) return std::exp(y);
  if (y <= -0.5) return phi_left().slope(y);
  if (y < 0.5) return 1.0;
  if (y <= 2.0) return phi_right().slope(y);
  return 2.0 * y;
}

double weight_psi(double y) {
  if (y < -1.0) return std::exp(2.0 * y);
  if (y <= -0.5) return psi_bridge().value(y);
  return 1.0;
}

double weight_psi_prime(double y) {
  if (y < -1.0) return 2.0 * std::exp(2.0 * y);
  if (y <= -0.5) return psi_bridge().slope(y);
  return 0.0;
}

FunctionalWeights make_weights(const Grid1D& g, double B) {
  if (!(B >= 100.0)) throw std::invalid_argument("make_weights: B must be at least 100");
  return {B, GridField::sample(g, [B](double y) { return weight_psi(y / B); }),
          GridField::sample(g, [B](double y) { return weight_phi(y / B); }),
          GridField::sample(g, [B](double y) { return weight_phi_prime(y / B) / B; })};
}

FunctionalReport functionals(const ModulationState& st, const FunctionalWeights& w,
                             const ModulationBasis& mb) {
  require_same_grid(st.eps, w.psi_B, "functionals");
  require_same_grid(st.eps, mb.profiles.Q, "functionals");
  const Grid1D& g = st.eps.grid();
  const GridField Qb = evaluate_Qb(st.b, mb.profiles);
  const auto ro = refined_observables(st, mb);

  double dy2_psi = 0.0, e2_phi = 0.0, loc = 0.0, pot = 0.0, tail = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double e = st.eps[j], ey = st.eps_y[j], q = Qb[j];
    const double e2 = e * e, q2 = q * q;
    dy2_psi += ey * ey * w.psi_B[j];
    e2_phi += e2 * w.phi_B[j];
    loc += (ey * ey + e2) * w.phi_B_prime[j];
    // (e + q)^6 - q^6 - 6 e q^5 expanded to avoid cancellation.
    const double six = e2 * (15 * q2 * q2 + e * (20 * q2 * q + e * (15 * q2 + e * (6 * q + e))));
    pot += six * w.psi_B[j] / 3.0;
    const double y = g.x(j);
    if (y > 0.0) {
      const double y2 = y * y, y4 = y2 * y2;
      tail += y4 * y4 * y2 * e2;
    }
  }
  const double h = g.spacing();
  FunctionalReport r;
  r.N_norm = (dy2_psi + e2_phi) * h;
  r.N_loc = loc * h;
  const double J1 = 1.0 - ro.J1;
  const double calJ1 = std::pow(J1, -4.0) - 1.0, calJ2 = std::pow(J1, -8.0) - 1.0;
  r.F1 = r.N_norm + calJ1 * e2_phi * h - pot * h;
  r.F2 = r.N_norm + calJ2 * e2_phi * h - pot * h;
  r.J1 = ro.J1;
  r.J2 = ro.J2;
  r.lambda0 = ro.lambda0;
  r.b_over_lambda2 = st.b / (st.lambda * st.lambda);
  r.right_tail_w10 = tail * h;
  r.eps_local = local_eps_norm2(st.eps);
  return r;
}

MonotonicityAudit monotonicity_audit(const std::vector<AuditSample>& smp, double C,
                                     const AuditRegime& regime, double integrated_fraction) {
  const std::size_t m = smp.size();
  if (m < 3) throw AuditRefused("monotonicity_audit: need at least three samples");
  for (std::size_t i = 0; i < m; ++i) {
    const auto& p = smp[i];
    std::ostringstream where;
    where << " at s = " << p.s;
    if (i > 0 && !(p.s > smp[i - 1].s)) throw AuditRefused("monotonicity_audit: s must increase");
    if (!(p.eps_l2 + std::abs(p.b) + p.report.N_norm <= regime.smallness))
      throw AuditRefused("H1 (smallness) violated" + where.str());
    if (!((std::abs(p.b) + p.report.N_norm) / (p.lambda * p.lambda) <= regime.comparison))
      throw AuditRefused("H2 (b and N against lambda^2) violated" + where.str());
    if (!(p.report.right_tail_w10 <= regime.tail_factor * (1.0 + std::pow(p.lambda, -10.0))))
      throw AuditRefused("H3 (weighted right tail) violated" + where.str());
  }

  MonotonicityAudit a;
  a.C = C;
  a.intervals = m - 1;
  a.integrated_fraction = integrated_fraction;
  std::size_t ok1 = 0, ok2 = 0;
  double pos = 0.0, tot = 0.0;
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const auto &p = smp[i], &q = smp[i + 1];
    const double ds = q.s - p.s;
    const double b4 = 0.5 * (std::pow(p.b, 4) + std::pow(q.b, 4));
    const double l2 = 0.5 * (p.lambda * p.lambda + q.lambda * q.lambda);
    const double dF1 = q.report.F1 - p.report.F1;
    const double dF2 = q.report.F2 / (q.lambda * q.lambda) - p.report.F2 / (p.lambda * p.lambda);
    if (dF1 / ds <= C * b4) ++ok1;
    if (dF2 / ds <= C * b4 / l2) ++ok2;
    pos += std::max(dF1, 0.0);
    tot += std::abs(dF1);
    const double loc = 0.5 * (p.report.N_loc + q.report.N_loc);
    if (loc > 0.0) rates.push_back(std::max(0.0, -dF1 / ds / loc));
  }
  a.fraction_F1 = static_cast<double>(ok1) / static_cast<double>(a.intervals);
  a.fraction_F2 = static_cast<double>(ok2) / static_cast<double>(a.intervals);
  a.positive_over_total = tot > 0.0 ? pos / tot : 0.0;

  // mu_fit: 10th percentile of the observed dissipation rate -dF1/ds / N_loc.
  if (!rates.empty()) {
    const std::size_t k = rates.size() / 10;
    std::nth_element(rates.begin(), rates.begin() + static_cast<long>(k), rates.end());
    a.mu_fit = rates[k];
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const auto &p = smp[i], &q = smp[i + 1];
    const double ds = q.s - p.s;
    const double b4 = 0.5 * (std::pow(p.b, 4) + std::pow(q.b, 4));
    const double lhs = (q.report.F1 - p.report.F1) / ds +
                       a.mu_fit * 0.5 * (p.report.N_loc + q.report.N_loc);
    if (lhs > 0.0) a.C_fit = std::max(a.C_fit, b4 > 0.0 ? lhs / b4 : INFINITY);
  }

  std::vector<double> ratios;
  ratios.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& p = smp[i];
    const double l1 = p.lambda * p.lambda;
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto& q = smp[j];
      const double den = p.report.N_norm + std::pow(std::abs(p.b), 3) + std::pow(std::abs(q.b), 3);
      const double num = q.report.N_norm;
      ratios.push_back(den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0));
      const double l2 = q.lambda * q.lambda;
      const double rig = p.b * p.b / l1 + q.b * q.b / l2 + p.report.N_loc / l1;
      const double diff = std::abs(q.b / l2 - p.b / l1);
      if (diff > 0.0) a.C_rigidity = std::max(a.C_rigidity, rig > 0.0 ? 10.0 * diff / rig : INFINITY);
    }
  }
  auto k = static_cast<std::size_t>(std::ceil(integrated_fraction * static_cast<double>(ratios.size())));
  k = std::clamp<std::size_t>(k, 1, ratios.size()) - 1;
  std::nth_element(ratios.begin(), ratios.begin() + static_cast<long>(k), ratios.end());
  a.C_integrated = ratios[k];
  return a;
}

}  // namespace gkdv
