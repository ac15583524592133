#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "gkdv/profiles.hpp"

using namespace gkdv;

namespace {

const ProfileSet& standard() {
  static const ProfileSet ps = make_profiles(Grid1D(60.0, 4096));
  return ps;
}

// Box wide enough to hold the cutoff region for |b| >= 1e-3.
const ProfileSet& wide() {
  static const ProfileSet ps = make_profiles(Grid1D(1024.0, 16384));
  return ps;
}

double closed_q(double y) { return std::pow(3.0 / std::pow(std::cosh(2.0 * y), 2), 0.25); }

template <class F>
double quad(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

double int_q_oracle() {
  const double inf = std::numeric_limits<double>::infinity();
  return 2.0 * quad(closed_q, 0.0, inf);
}

// Least-squares slope of log|v| against log b.
double log_slope(const std::vector<double>& bs, const std::vector<double>& vs) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    mx += std::log(bs[i]);
    my += std::log(std::abs(vs[i]));
  }
  mx /= bs.size();
  my /= bs.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const double dx = std::log(bs[i]) - mx;
    sxy += dx * (std::log(std::abs(vs[i])) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// Max over |y| <= 0.4 L, away from the wrap where the sampled tails are not
// periodic to round-off.
double interior_max(const GridField& f) {
  double m = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    if (in_interior(f.grid(), j)) m = std::max(m, std::abs(f[j]));
  return m;
}

}  // namespace

TEST_CASE("ground state closed form") {
  Grid1D g(60.0, 4096);
  const GridField q = ground_state(g);
  CHECK(ground_state_at(0.0).q == doctest::Approx(1.3160740129524924).epsilon(1e-15));
  for (std::size_t j = 1; j < g.size(); ++j) {
    CHECK(q[j] > 0.0);
    CHECK(std::abs(q[j] - q[g.size() - j]) < 1e-10);
  }
  const auto& ps = standard();
  CHECK(ps.ground_state_residual < 1e-10);
  for (double y : {-3.0, -0.4, 0.0, 0.9, 7.0})
    CHECK(ground_state_at(y).q == doctest::Approx(closed_q(y)).epsilon(1e-14));
  CHECK(std::isfinite(ground_state_at(1e4).q));
  CHECK(ground_state_at(1e4).q == 0.0);
}

TEST_CASE("sharp Gagliardo-Nirenberg constant at Q") {
  // With Q normalized by Q'' - Q + Q^5 = 0, the Pohozaev identity E(Q) = 0
  // gives int Q^6 = 3 int Q_x^2; the sharp inequality carries that factor 3.
  const auto& ps = standard();
  const GridField q2 = ps.Q * ps.Q;
  const double q6 = integrate(q2 * q2 * q2);
  const double qx2 = inner(ps.Qprime, ps.Qprime);
  CHECK(std::abs(q6 - 3.0 * qx2) / q6 < 1e-8);
  CHECK(std::abs(energy(ps.Q)) < 1e-10);

  // Oracle for the closed-form integrals: int Q_x^2 = (1/3) int Q^6 = pi sqrt(3) / 8.
  const double inf = std::numeric_limits<double>::infinity();
  const double q6_oracle = 2.0 * quad([](double y) { return std::pow(closed_q(y), 6); }, 0.0, inf);
  CHECK(std::abs(q6 - q6_oracle) < 1e-9);
}

TEST_CASE("Gagliardo-Nirenberg inequality on perturbed profiles") {
  const auto& ps = standard();
  const auto& g = ps.grid;
  for (double a : {-0.3, -0.1, 0.05, 0.2, 0.5}) {
    for (double w : {0.5, 1.0, 2.0}) {
      auto v = GridField::sample(g, [a, w](double y) {
        return closed_q(w * y) * (1.0 + a * std::tanh(y)) + a * std::exp(-y * y);
      });
      const GridField v2 = v * v;
      const double lhs = integrate(v2 * v2 * v2);
      const GridField vx = derivative(v, 1);
      const double ratio = integrate(v2) / ps.intQ2;
      CHECK(lhs <= 3.0 * inner(vx, vx) * ratio * ratio * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("linearized operator identities") {
  const auto& ps = standard();
  CHECK(interior_max(apply_L(ps.Qprime, ps)) < 1e-9);
  CHECK((apply_L(ps.LambdaQ, ps) + 2.0 * ps.Q).max_abs() < 1e-8);
  CHECK(apply_L(GridField(ps.grid), ps).max_abs() == 0.0);
  CHECK_THROWS_AS(apply_L(GridField(Grid1D(60.0, 2048)), ps), std::invalid_argument);

  // Oracle: Lambda Q as the l-derivative of the scaling family
  // l^{1/2} Q(l y) at l = 1, by a fourth-order difference in l.
  const double d = 1e-3;
  auto family = [](double l, double y) { return std::sqrt(l) * closed_q(l * y); };
  const GridField lq_fd = GridField::sample(ps.grid, [&](double y) {
    return (-family(1 + 2 * d, y) + 8 * family(1 + d, y) - 8 * family(1 - d, y) +
            family(1 - 2 * d, y)) /
           (12 * d);
  });
  CHECK((lq_fd - ps.LambdaQ).max_abs() < 1e-10);
  CHECK((apply_L(lq_fd, ps) + 2.0 * ps.Q).max_abs() < 1e-8);
}

TEST_CASE("P identities") {
  const auto& ps = standard();
  const double iq = int_q_oracle();
  CHECK(std::abs(ps.intQ - iq) < 1e-10);
  CHECK(std::abs(ps.PQ - iq * iq / 16.0) / ps.PQ < 1e-6);
  CHECK(std::abs(ps.PQprime) < 1e-8);
  CHECK(std::abs(ps.Pleft - 0.5 * iq) < 1e-6);
  CHECK(std::abs(ps.P[0] - 0.5 * iq) < 1e-6);
  CHECK(std::abs(ps.P[ps.grid.size() - 1]) < 1e-8);
  CHECK(ps.P_residual < 1e-7);
}

TEST_CASE("P solve is reproducible from Q alone") {
  const auto& ps = standard();
  const PSolution sol = solve_P(ps.Q);
  CHECK((sol.P - ps.P).max_abs() == 0.0);
  CHECK(sol.iterations > 0);
}

TEST_CASE("P' decays exponentially on both sides") {
  // Least-squares fit of log|P'| = c + p log(1 + |y|) - r |y| over 5 <= |y| <= 22.
  const auto& ps = standard();
  const auto& g = ps.grid;
  for (double side : {-1.0, 1.0}) {
    Eigen::MatrixXd A(0, 3);
    std::vector<double> rows, rhs;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double y = g.x(j) * side;
      if (y < 5.0 || y > 22.0) continue;
      rows.insert(rows.end(), {1.0, std::log1p(y), -y});
      rhs.push_back(std::log(std::abs(ps.Pprime[j])));
    }
    const Eigen::Index m = static_cast<Eigen::Index>(rhs.size());
    Eigen::MatrixXd M = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>(rows.data(), m, 3);
    Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(rhs.data(), m);
    const Eigen::VectorXd coef = M.colPivHouseholderQr().solve(v);
    MESSAGE("side " << side << " rate " << coef[2] << " power " << coef[1]);
    CHECK(coef[2] >= 0.9);
  }
}

TEST_CASE("cutoff") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(-3.0) == 0.0);
  CHECK(cutoff(-2.0) == 0.0);
  CHECK(cutoff(-1.0) == 1.0);
  const double d = 1e-6;
  CHECK(std::abs(cutoff(-2.0 + d)) < 1e-15);
  CHECK(std::abs(cutoff_derivative(-2.0 + d)) < 1e-9);
  CHECK(std::abs(cutoff_derivative(-1.0 - d)) < 1e-9);
  // Second derivative 60 t (1 - t)(1 - 2t) vanishes at both ends.
  auto d2 = [](double z) { return (cutoff_derivative(z + 1e-5) - cutoff_derivative(z - 1e-5)) / 2e-5; };
  CHECK(std::abs(d2(-2.0 + 2e-5)) < 1e-2);
  CHECK(std::abs(d2(-1.0 - 2e-5)) < 1e-2);
  double prev = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double z = -3.0 + 3.0 * i / 10000.0;
    const double c = cutoff(z);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(smooth_cutoff(-5.0, 0.0) == 1.0);
  CHECK(smooth_cutoff(-2.0 * std::pow(0.01, -0.75), 0.01) == 0.0);
  CHECK(smooth_cutoff(-std::pow(0.01, -0.75), -0.01) == doctest::Approx(1.0));
}

TEST_CASE("Q_b basics") {
  const auto& ps = standard();
  const auto lp0 = build_Qb(0.0, ps);
  CHECK((lp0.Qb - ps.Q).max_abs() == 0.0);
  // Round-off level for a spectral third derivative on this grid.
  CHECK(interior_max(lp0.PsiB) < 1e-8);

  const auto lp = build_Qb(0.05, ps);
  GridField expect = ps.Q + 0.05 * (lp.chi_b * ps.P);
  CHECK((lp.Qb - expect).max_abs() < 1e-15);
  const double lo = std::pow(0.05, -0.75);
  for (std::size_t j = 0; j < ps.grid.size(); ++j) {
    const double y = ps.grid.x(j);
    if (y >= -lo) CHECK(lp.chi_b[j] == 1.0);
    if (y <= -2.0 * lo) CHECK(lp.chi_b[j] == 0.0);
  }
  CHECK_THROWS_AS(build_Qb(0.25, ps), std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_Qb(0.01, ps), "build_Qb: box too small for this b",
                       std::invalid_argument);
}

TEST_CASE("Q_b tends to Q linearly in b") {
  const auto& ps = wide();
  std::vector<double> bs{1e-3, 3e-3, 1e-2}, dev;
  for (double b : bs) dev.push_back((build_Qb(b, ps).Qb - ps.Q).max_abs());
  const double slope = log_slope(bs, dev);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
  for (std::size_t i = 0; i < bs.size(); ++i)
    CHECK(dev[i] / bs[i] == doctest::Approx(ps.P.max_abs()).epsilon(0.1));
}

TEST_CASE("mass and energy expansions of Q_b") {
  const auto& ps = wide();
  std::vector<double> bs{1e-2, 3e-3, 1e-3}, dm, de;
  for (double b : bs) {
    const auto lp = build_Qb(b, ps);
    dm.push_back(mass(lp.Qb) - ps.intQ2 - 2.0 * b * ps.PQ);
    de.push_back(energy(lp.Qb) + b * ps.PQ);
  }
  MESSAGE("mass exponent " << log_slope(bs, dm) << ", energy exponent " << log_slope(bs, de));
  CHECK(log_slope(bs, de) >= 1.9);

  // Oracle for the mass defect: b^2 int chi_b^2 P^2 splits into the plateau
  // part Pleft^2 |b|^{-3/4} (1 + int_{-2}^{-1} chi^2) and the b-independent
  // remainder D = int (P^2 - Pleft^2 1_{y<0}); the cross term b int (1 - chi_b) P Q
  // is exponentially small.
  const double c_chi = quad([](double z) { return cutoff(z) * cutoff(z); }, -2.0, -1.0);
  const auto& g = ps.grid;
  double D = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double plateau = g.x(j) < 0.0 ? ps.Pleft * ps.Pleft : g.x(j) == 0.0 ? 0.5 * ps.Pleft * ps.Pleft : 0.0;
    D += (ps.P[j] * ps.P[j] - plateau) * g.spacing();
  }
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const double b = bs[i];
    const double model = ps.Pleft * ps.Pleft * (1.0 + c_chi) * std::pow(b, 1.25) + D * b * b;
    CHECK(std::abs(dm[i] - model) / std::abs(dm[i]) < 1e-3);
  }
  MESSAGE("plateau coefficient " << ps.Pleft * ps.Pleft * (1.0 + c_chi) << ", D " << D);
}

TEST_CASE("Psi_b bounds") {
  const auto& ps = wide();
  const auto& g = ps.grid;
  std::vector<double> bs{1e-2, 3e-3, 1e-3}, bridge, right;
  for (double b : bs) {
    const auto lp = build_Qb(b, ps);
    const double s = std::pow(b, 0.75);
    double mb = 0.0, mr = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double y = g.x(j);
      if (s * y >= -2.0 && s * y <= -1.0) mb = std::max(mb, std::abs(lp.PsiB[j]));
      if (y > 0.0 && y < 40.0) mr = std::max(mr, std::abs(lp.PsiB[j]) * std::exp(0.5 * y));
    }
    bridge.push_back(mb);
    right.push_back(mr);
  }
  MESSAGE("bridge exponent " << log_slope(bs, bridge) << ", right exponent "
                             << log_slope(bs, right));
  CHECK(log_slope(bs, bridge) == doctest::Approx(1.75).epsilon(0.05));
  CHECK(log_slope(bs, right) >= 1.9);
}

TEST_CASE("Psi_b decays on the right") {
  const auto& ps = wide();
  for (double b : {1e-3, 3e-3, 1e-2, 2e-2, 5e-2}) {
    const auto lp = build_Qb(b, ps);
    double m = 0.0;
    for (std::size_t j = 0; j < ps.grid.size(); ++j)
      if (ps.grid.x(j) > 5.0 && in_interior(ps.grid, j)) m = std::max(m, std::abs(lp.PsiB[j]));
    CHECK(m <= 10.0 * b * b);
  }
}
