#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gkdv {

// Modulation parameters as functions of the rescaled time s; t is lab time.
struct ReducedState {
  double s = 0.0;
  double b = 0.0;
  double lambda = 1.0;
  double x = 0.0;
  double t = 0.0;
};

// Closed-form solution of b_s = -2 b^2, lambda_s / lambda = -b, x_s = lambda,
// t_s = lambda^3 from (b0, lambda0) at s = t = x = 0. Throws std::domain_error
// when 1 + 2 b0 s <= 0.
ReducedState leading_order_solution(double b0, double lambda0, double s);

struct RefinedTrajectory {
  std::vector<ReducedState> states;
  bool truncated = false;  // stopped early on a non-finite or degenerate step
};

// RK4 for lambda_s / lambda = -b - c1 b^2, b_s = -2 b^2 - c2 b^3, x_s = lambda,
// t_s = lambda^3 from initial.s to s_end (either direction) with |ds| <= max_ds.
RefinedTrajectory integrate_refined(const ReducedState& initial, double c1, double c2,
                                    double s_end, double max_ds = 1e-2);

// Leading-order exit from the tube along b/lambda^2 = b0: lambda_exit =
// (alpha_star/|b0|)^{1/2}, t_exit = (lambda_exit - 1)/|b0|. Requires b0 < 0,
// |b0| < alpha_star and alpha_star in (0, 0.1]; throws std::invalid_argument.
struct ExitPrediction {
  double t_exit;
  double lambda_exit;
};
ExitPrediction predict_exit(double b0, double alpha_star);

// Samples of a run that concentrates in finite time.
struct BlowupSeries {
  std::vector<double> t, s, lambda, b, x, grad_norm;
};

struct LawFit {
  double ell_star = 0.0;   // lambda ~ ell (T - t)
  double T_blowup = 0.0;
  double c_lambda = 0.0;   // lambda = ell tau + c_lambda ell^4 tau^3, tau = T - t
  double x_star = 0.0;     // x = 1/(ell^2 tau) + x_star - c_x ell tau
  double c_x = 0.0;
  double c_b = 0.0;        // b / lambda^2 = ell + c_b ell^4 tau^2
  std::optional<double> c1_star, c2_star;  // b(s) - 1/(2s) = (c1 log s + c2)/s^2
  double residual_norm = 0.0;  // rms of the lambda fit
  std::pair<double, double> window;  // t-interval of the final decade of lambda
  std::size_t samples = 0;
  double cov_T = 0.0, cov_ell = 0.0, cov_T_ell = 0.0;
  double condition = 0.0;       // of the (T, ell, c_lambda) normal equations
  double grad_exponent = 0.0;   // ||u_x|| ~ tau^p
  double grad_exponent_stderr = 0.0;
  double b_over_lambda2_spread = 0.0;  // max |b/lambda^2 - ell| / ell on the window
  double escape_ratio = 0.0;           // mean of x ell^2 tau on the window
  double lambda_ratio_min = 0.0, lambda_ratio_max = 0.0;  // lambda / (ell tau) on the window
  double sb_min = 0.0, sb_max = 0.0;   // range of s b over the last decade of s
  std::vector<std::string> warnings;
};

// Fits over the final decade of lambda: (T, ell) by linear least squares, then
// (T, ell, c_lambda) by Gauss-Newton, then the x, b/lambda^2, ||u_x|| and b(s)
// laws on the residuals. Throws std::invalid_argument with fewer than 30
// samples in the window. An ill-conditioned joint fit (> 1e8) keeps the linear
// (T, ell) and adds a warning.
LawFit fit_blowup_laws(const BlowupSeries& series);

}  // namespace gkdv
