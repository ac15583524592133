#include "gkdv/reduced.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace gkdv {

ReducedState leading_order_solution(double b0, double lambda0, double s) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("leading_order_solution: lambda0 must be positive");
  const double d = 1.0 + 2.0 * b0 * s;
  if (!(d > 0.0)) throw std::domain_error("leading_order_solution: 1 + 2 b0 s must be positive");
  const double r = std::sqrt(d);
  // (r - 1)/b0 and (1 - 1/r)/b0 without cancellation at small b0.
  const double x = 2.0 * lambda0 * s / (r + 1.0);
  const double t = lambda0 * lambda0 * lambda0 * 2.0 * s / ((r + 1.0) * r);
  return {s, b0 / d, lambda0 / r, x, t};
}

RefinedTrajectory integrate_refined(const ReducedState& init, double c1, double c2, double s_end,
                                    double max_ds) {
  if (!(init.lambda > 0.0)) throw std::invalid_argument("integrate_refined: lambda must be positive");
  if (!(max_ds > 0.0) || !std::isfinite(c1) || !std::isfinite(c2) || !std::isfinite(s_end))
    throw std::invalid_argument("integrate_refined: invalid constants or span");
  using V = std::array<double, 4>;  // log lambda, b, x, t
  auto rhs = [&](const V& y) {
    const double lam = std::exp(y[0]), b = y[1];
    return V{-b - c1 * b * b, -2.0 * b * b - c2 * b * b * b, lam, lam * lam * lam};
  };
  RefinedTrajectory out;
  out.states.push_back(init);
  const double span = s_end - init.s;
  const auto n = static_cast<long>(std::ceil(std::abs(span) / max_ds));
  if (n == 0) return out;
  const double h = span / static_cast<double>(n);
  V y{std::log(init.lambda), init.b, init.x, init.t};
  for (long i = 1; i <= n; ++i) {
    const V k1 = rhs(y);
    V tmp;
    for (int j = 0; j < 4; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    const V k2 = rhs(tmp);
    for (int j = 0; j < 4; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    const V k3 = rhs(tmp);
    for (int j = 0; j < 4; ++j) tmp[j] = y[j] + h * k3[j];
    const V k4 = rhs(tmp);
    V next;
    for (int j = 0; j < 4; ++j) next[j] = y[j] + h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    bool ok = std::abs(next[0]) < 30.0;  // 1e-13 < lambda < 1e13
    for (double v : next) ok = ok && std::isfinite(v);
    if (!ok) {
      out.truncated = true;
      break;
    }
    y = next;
    out.states.push_back({init.s + h * static_cast<double>(i), y[1], std::exp(y[0]), y[2], y[3]});
  }
  return out;
}

ExitPrediction predict_exit(double b0, double alpha_star) {
  if (!(alpha_star > 0.0 && alpha_star <= 0.1))
    throw std::invalid_argument("predict_exit: alpha_star must lie in (0, 0.1]");
  if (!(b0 < 0.0)) throw std::invalid_argument("predict_exit: b0 must be negative");
  if (!(-b0 < alpha_star)) throw std::invalid_argument("predict_exit: |b0| >= alpha_star, already outside the tube");
  const double lam = std::sqrt(alpha_star / -b0);
  return {(lam - 1.0) / -b0, lam};
}

}  // namespace gkdv
