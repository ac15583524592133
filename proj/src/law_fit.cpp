#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gkdv/reduced.hpp"

namespace gkdv {
namespace {

struct Linear {
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;
  double rms = 0.0;
};

// Least squares y ~ X c with the usual covariance estimate.
Linear least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Linear r;
  const auto qr = X.colPivHouseholderQr();
  r.coef = qr.solve(y);
  const Eigen::VectorXd res = y - X * r.coef;
  const auto m = X.rows(), k = X.cols();
  r.rms = std::sqrt(res.squaredNorm() / static_cast<double>(m));
  const double sigma2 = m > k ? res.squaredNorm() / static_cast<double>(m - k) : 0.0;
  r.cov = sigma2 * (X.transpose() * X).inverse();
  return r;
}

}  // namespace

LawFit fit_blowup_laws(const BlowupSeries& d) {
  const std::size_t m = d.t.size();
  if (d.lambda.size() != m || d.b.size() != m || d.x.size() != m || d.grad_norm.size() != m ||
      d.s.size() != m)
    throw std::invalid_argument("fit_blowup_laws: series columns differ in length");
  if (m == 0) throw std::invalid_argument("fit_blowup_laws: empty series");

  // Final decade of lambda: the tail after the last sample above 10 min(lambda).
  const double lmin = *std::min_element(d.lambda.begin(), d.lambda.end());
  std::size_t i0 = m;
  while (i0 > 0 && d.lambda[i0 - 1] <= 10.0 * lmin) --i0;
  const std::size_t n = m - i0;
  if (n < 30) throw std::invalid_argument("fit_blowup_laws: fewer than 30 samples in the final decade of lambda");

  LawFit f;
  f.samples = n;
  f.window = {d.t[i0], d.t[m - 1]};
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::VectorXd t(N), lam(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    t[i] = d.t[i0 + static_cast<std::size_t>(i)];
    lam[i] = d.lambda[i0 + static_cast<std::size_t>(i)];
  }

  // lambda = a + m t, ell = -m, T = a / ell.
  Eigen::MatrixXd X(N, 2);
  X.col(0).setOnes();
  X.col(1) = t;
  const Linear lin = least_squares(X, lam);
  double ell = -lin.coef[1];
  double T = lin.coef[0] / ell;
  {
    const double a = lin.coef[0], mm = lin.coef[1];
    Eigen::Matrix2d Jm;
    Jm << -1.0 / mm, a / (mm * mm), 0.0, -1.0;
    const Eigen::Matrix2d C = Jm * lin.cov * Jm.transpose();
    f.cov_T = C(0, 0);
    f.cov_ell = C(1, 1);
    f.cov_T_ell = C(0, 1);
  }
  f.residual_norm = lin.rms;

  // Gauss-Newton on lambda = ell tau + k tau^3, tau = T - t, k = c ell^4.
  {
    double k = 0.0, TT = T, ee = ell;
    bool ok = true;
    for (int it = 0; it < 50; ++it) {
      Eigen::MatrixXd J(N, 3);
      Eigen::VectorXd r(N);
      for (Eigen::Index i = 0; i < N; ++i) {
        const double tau = TT - t[i];
        r[i] = lam[i] - (ee * tau + k * tau * tau * tau);
        J(i, 0) = ee + 3.0 * k * tau * tau;
        J(i, 1) = tau;
        J(i, 2) = tau * tau * tau;
      }
      const Eigen::VectorXd scale = J.colwise().norm().transpose();
      Eigen::MatrixXd Js = J;
      for (int c = 0; c < 3; ++c) Js.col(c) /= scale[c];
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Js);
      const auto sv = svd.singularValues();
      f.condition = (sv[0] / sv[2]) * (sv[0] / sv[2]);
      if (!(f.condition <= 1e8)) {
        ok = false;
        break;
      }
      const Eigen::VectorXd step = Js.colPivHouseholderQr().solve(r).cwiseQuotient(scale);
      TT += step[0];
      ee += step[1];
      k += step[2];
      if (step.cwiseAbs().maxCoeff() < 1e-15 * (1.0 + std::abs(TT))) break;
    }
    if (ok && std::isfinite(TT) && ee > 0.0) {
      T = TT;
      ell = ee;
      f.c_lambda = k / std::pow(ell, 4);
      double ss = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        const double tau = T - t[i];
        const double r = lam[i] - (ell * tau + k * tau * tau * tau);
        ss += r * r;
      }
      f.residual_norm = std::sqrt(ss / static_cast<double>(n));
    } else {
      f.warnings.push_back("joint (T, ell, c_lambda) fit ill-conditioned; linear (T, ell) kept");
    }
  }
  f.ell_star = ell;
  f.T_blowup = T;

  // Correction laws on the same window.
  Eigen::MatrixXd Xx(N, 2), Xb(N, 2), Xg(N, 2);
  Eigen::VectorXd yx(N), yb(N), yg(N);
  double spread = 0.0, escape = 0.0;
  f.lambda_ratio_min = std::numeric_limits<double>::infinity();
  f.lambda_ratio_max = -f.lambda_ratio_min;
  for (Eigen::Index i = 0; i < N; ++i) {
    const std::size_t j = i0 + static_cast<std::size_t>(i);
    const double tau = T - t[i];
    if (!(tau > 0.0)) throw std::invalid_argument("fit_blowup_laws: samples beyond the fitted blow-up time");
    Xx(i, 0) = 1.0;
    Xx(i, 1) = -ell * tau;
    yx[i] = d.x[j] - 1.0 / (ell * ell * tau);
    const double bl = d.b[j] / (d.lambda[j] * d.lambda[j]);
    Xb(i, 0) = 1.0;
    Xb(i, 1) = tau * tau;
    yb[i] = bl;
    Xg(i, 0) = 1.0;
    Xg(i, 1) = std::log(tau);
    yg[i] = std::log(d.grad_norm[j]);
    spread = std::max(spread, std::abs(bl - ell) / ell);
    escape += d.x[j] * ell * ell * tau;
    f.lambda_ratio_min = std::min(f.lambda_ratio_min, d.lambda[j] / (ell * tau));
    f.lambda_ratio_max = std::max(f.lambda_ratio_max, d.lambda[j] / (ell * tau));
  }
  const Linear fx = least_squares(Xx, yx);
  f.x_star = fx.coef[0];
  f.c_x = fx.coef[1];
  const Linear fb = least_squares(Xb, yb);
  f.c_b = fb.coef[1] / std::pow(ell, 4);
  const Linear fg = least_squares(Xg, yg);
  f.grad_exponent = fg.coef[1];
  f.grad_exponent_stderr = std::sqrt(fg.cov(1, 1));
  f.b_over_lambda2_spread = spread;
  f.escape_ratio = escape / static_cast<double>(n);

  // s b over the last decade of s, and the b(s) corrections over two decades.
  const double smax = *std::max_element(d.s.begin(), d.s.end());
  if (smax > 0.0) {
    f.sb_min = std::numeric_limits<double>::infinity();
    f.sb_max = -f.sb_min;
    std::vector<std::size_t> two;
    for (std::size_t j = 0; j < m; ++j) {
      if (d.s[j] >= 0.1 * smax) {
        f.sb_min = std::min(f.sb_min, d.s[j] * d.b[j]);
        f.sb_max = std::max(f.sb_max, d.s[j] * d.b[j]);
      }
      if (d.s[j] >= 0.01 * smax) two.push_back(j);
    }
    const double smin = *std::min_element(d.s.begin(), d.s.end());
    if (smin <= 0.01 * smax && two.size() >= 10) {
      const auto K = static_cast<Eigen::Index>(two.size());
      Eigen::MatrixXd Xs(K, 2);
      Eigen::VectorXd ys(K);
      for (Eigen::Index i = 0; i < K; ++i) {
        const double s = d.s[two[static_cast<std::size_t>(i)]];
        Xs(i, 0) = std::log(s);
        Xs(i, 1) = 1.0;
        ys[i] = (d.b[two[static_cast<std::size_t>(i)]] - 0.5 / s) * s * s;
      }
      const Linear fs = least_squares(Xs, ys);
      f.c1_star = fs.coef[0];
      f.c2_star = fs.coef[1];
    } else {
      f.warnings.push_back("s-window spans fewer than two decades; c1*, c2* not identifiable");
    }
  }
  return f;
}

}  // namespace gkdv
