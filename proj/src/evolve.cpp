#include "gkdv/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

namespace gkdv {
namespace {

// Largest imaginary-axis stability radius of classical RK4 is 2 sqrt 2.
constexpr double kRk4ImagRadius = 2.0 * std::numbers::sqrt2;

std::size_t band_cutoff(const Grid1D& g, double fraction) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(g.size() / 2)));
}

double band_wavenumber(const Grid1D& g, double fraction) {
  return g.wavenumber(band_cutoff(g, fraction) - 1);
}

}  // namespace

void SolverConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(dt_initial)) throw std::invalid_argument("SolverConfig: dt_initial must be positive");
  if (dt_max && !positive(*dt_max)) throw std::invalid_argument("SolverConfig: dt_max must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    throw std::invalid_argument("SolverConfig: cfl_safety must lie in (0, 1]");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw std::invalid_argument("SolverConfig: dealias_fraction must lie in (0, 1]");
  if (!positive(t_max)) throw std::invalid_argument("SolverConfig: t_max must be positive");
  if (!positive(h1_blowup_threshold))
    throw std::invalid_argument("SolverConfig: h1_blowup_threshold must be positive");
  if (!(sponge_strength >= 0.0) || !std::isfinite(sponge_strength))
    throw std::invalid_argument("SolverConfig: sponge_strength must be nonnegative");
  if (!(sponge_fraction > 0.0 && sponge_fraction < 0.5))
    throw std::invalid_argument("SolverConfig: sponge_fraction must lie in (0, 0.5)");
  if (!std::isfinite(frame_velocity))
    throw std::invalid_argument("SolverConfig: frame_velocity must be finite");
}

FlowState make_flow_state(double t, GridField u) {
  FlowState s{t, std::move(u)};
  const GridField ux = derivative(s.u, 1);
  const double grad2 = inner(ux, ux);
  s.mass = inner(s.u, s.u);
  double u6 = 0.0;
  std::size_t jmax = 0;
  for (std::size_t j = 0; j < s.u.size(); ++j) {
    const double v = s.u[j];
    const double v2 = v * v;
    u6 += v2 * v2 * v2;
    if (std::abs(v) > std::abs(s.u[jmax])) jmax = j;
  }
  s.energy = 0.5 * grad2 - u6 * s.u.grid().spacing() / 6.0;
  s.grad_norm = std::sqrt(grad2);
  s.h1_norm = std::sqrt(s.mass + grad2);
  s.max_u = s.u[jmax];
  s.argmax_x = s.u.grid().x(jmax);
  return s;
}

Integrator::Integrator(GridField u0, const SolverConfig& cfg, double t0)
    : grid_(u0.grid()), cfg_(cfg), t_(t0) {
  cfg_.validate();
  if (!u0.all_finite()) throw std::invalid_argument("Integrator: initial field is not finite");
  const std::size_t nh = grid_.size() / 2 + 1;
  kcut_ = band_cutoff(grid_, cfg_.dealias_fraction);
  k_.resize(nh);
  for (std::size_t k = 0; k < nh; ++k) k_[k] = grid_.wavenumber(k);

  // sigma = strength * sin^2(pi (x - x_left) / width) on the left layer.
  sigma_.assign(grid_.size(), 0.0);
  const double width = cfg_.sponge_fraction * grid_.length();
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double d = grid_.x(j) - grid_.left();
    if (d < width) {
      const double s = std::sin(std::numbers::pi * d / width);
      sigma_[j] = cfg_.sponge_strength * s * s;
    }
  }
  work_.resize(grid_.size());
  spec_work_.resize(nh);
  reset(u0, t0);
}

void Integrator::reset(const GridField& u, double t) {
  if (!(u.grid() == grid_)) throw std::invalid_argument("Integrator::reset: grid mismatch");
  uh_ = spectrum(u);
  for (std::size_t k = kcut_; k < uh_.size(); ++k) uh_[k] = 0.0;
  t_ = t;
  frame_offset_ = 0.0;
}

void Integrator::set_frame_velocity(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("Integrator: frame velocity must be finite");
  cfg_.frame_velocity = c;
}

namespace {

// phi_1..phi_3 with phi_j(z) = sum_m z^m / (m + j)!; Taylor series near 0,
// recurrence phi_{j+1} = (phi_j - 1/j!) / z elsewhere.
void phi_functions(Complex z, Complex& p1, Complex& p2, Complex& p3) {
  if (std::abs(z) < 1.0) {
    p1 = p2 = p3 = 0.0;
    Complex term = 1.0;  // z^m
    double f1 = 1.0, f2 = 0.5, f3 = 1.0 / 6.0;  // 1/(m+1)!, 1/(m+2)!, 1/(m+3)!
    for (int m = 0; m < 24; ++m) {
      p1 += term * f1;
      p2 += term * f2;
      p3 += term * f3;
      term *= z;
      f1 /= m + 2;
      f2 /= m + 3;
      f3 /= m + 4;
    }
    return;
  }
  p1 = (std::exp(z) - 1.0) / z;
  p2 = (p1 - 1.0) / z;
  p3 = (p2 - 0.5) / z;
}

}  // namespace

const Integrator::Coefficients& Integrator::coefficients(double dt) {
  for (auto& c : coeff_cache_)
    if (c.dt == dt && c.frame_velocity == cfg_.frame_velocity) return c;
  Coefficients c;
  c.dt = dt;
  c.frame_velocity = cfg_.frame_velocity;
  const std::size_t nh = k_.size();
  c.E.assign(nh, 0.0);
  c.E2.assign(nh, 0.0);
  c.Q.assign(nh, 0.0);
  c.f1.assign(nh, 0.0);
  c.f2.assign(nh, 0.0);
  c.f3.assign(nh, 0.0);
  for (std::size_t k = 0; k < kcut_; ++k) {
    const double w = k_[k] * k_[k] * k_[k] + cfg_.frame_velocity * k_[k];
    const Complex z{0.0, w * dt};
    Complex p1, p2, p3, h1, h2, h3;
    phi_functions(z, p1, p2, p3);
    phi_functions(0.5 * z, h1, h2, h3);
    c.E[k] = std::exp(z);
    c.E2[k] = std::exp(0.5 * z);
    c.Q[k] = 0.5 * dt * h1;
    c.f1[k] = dt * (p1 - 3.0 * p2 + 4.0 * p3);
    c.f2[k] = dt * (p2 - 2.0 * p3);
    c.f3[k] = dt * (4.0 * p3 - p2);
  }
  if (coeff_cache_.size() >= 6) coeff_cache_.erase(coeff_cache_.begin());
  coeff_cache_.push_back(std::move(c));
  return coeff_cache_.back();
}

// out = -i k F[(F^{-1} uh)^5] restricted to the band.
void Integrator::nonlinear(const std::vector<Complex>& uh, std::vector<Complex>& out) const {
  const auto& fft = real_fft(grid_.size());
  fft.inverse(uh, work_);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (double& v : work_) {
    const double u = v * scale;
    const double u2 = u * u;
    v = u2 * u2 * u;
  }
  fft.forward(work_, spec_work_);
  out.assign(uh.size(), 0.0);
  for (std::size_t k = 0; k < kcut_; ++k) out[k] = Complex{0.0, -k_[k]} * spec_work_[k];
}

void Integrator::step(double dt) {
  if (!std::isfinite(dt) || std::abs(dt) < 1e-14)
    throw NumericalError(NumericalErrorKind::StepCollapse, "time step collapse", state());
  const Coefficients& c = coefficients(dt);
  const std::size_t nh = uh_.size();

  // Cox-Matthews ETDRK4.
  std::vector<Complex> nu, na, nb, nc, a(nh), b(nh), cc(nh);
  nonlinear(uh_, nu);
  for (std::size_t k = 0; k < nh; ++k) a[k] = c.E2[k] * uh_[k] + c.Q[k] * nu[k];
  nonlinear(a, na);
  for (std::size_t k = 0; k < nh; ++k) b[k] = c.E2[k] * uh_[k] + c.Q[k] * na[k];
  nonlinear(b, nb);
  for (std::size_t k = 0; k < nh; ++k) cc[k] = c.E2[k] * a[k] + c.Q[k] * (2.0 * nb[k] - nu[k]);
  nonlinear(cc, nc);

  std::vector<Complex> next(nh);
  bool finite = true;
  for (std::size_t k = 0; k < nh; ++k) {
    next[k] = c.E[k] * uh_[k] + c.f1[k] * nu[k] + 2.0 * c.f2[k] * (na[k] + nb[k]) + c.f3[k] * nc[k];
    finite = finite && std::isfinite(next[k].real()) && std::isfinite(next[k].imag());
  }
  if (!finite) {
    std::ostringstream msg;
    msg << "numerical blow-up/instability at t = " << t_ << " (dt = " << dt << ")";
    throw NumericalError(NumericalErrorKind::Instability, msg.str(), state());
  }
  uh_.swap(next);
  t_ += dt;
  frame_offset_ += cfg_.frame_velocity * dt;
  if (cfg_.sponge_strength > 0.0) apply_sponge(dt);
}

void Integrator::apply_sponge(double dt) {
  const auto& fft = real_fft(grid_.size());
  fft.inverse(uh_, work_);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  double loss = 0.0;
  const double adt = std::abs(dt);
  // Exact decay over the step; stable for any sigma dt.
  for (std::size_t j = 0; j < work_.size(); ++j) {
    const double u = work_[j] * scale;
    const double damped = u * std::exp(-sigma_[j] * adt);
    loss += u * u - damped * damped;
    work_[j] = damped;
  }
  sponge_loss_ += loss * grid_.spacing();
  fft.forward(work_, uh_);
  for (std::size_t k = kcut_; k < uh_.size(); ++k) uh_[k] = 0.0;
}

GridField Integrator::field() const { return from_spectrum(grid_, uh_); }

FlowState Integrator::state() const { return make_flow_state(t_, field()); }

double Integrator::mass() const {
  // Parseval on the band; the Nyquist mode is never retained.
  double s = std::norm(uh_[0]);
  for (std::size_t k = 1; k < kcut_; ++k) s += 2.0 * std::norm(uh_[k]);
  const double n = static_cast<double>(grid_.size());
  return s * grid_.spacing() / n;
}

double Integrator::grad_norm() const {
  double s = 0.0;
  for (std::size_t k = 1; k < kcut_; ++k) s += 2.0 * k_[k] * k_[k] * std::norm(uh_[k]);
  const double n = static_cast<double>(grid_.size());
  return std::sqrt(s * grid_.spacing() / n);
}

FlowState step(const FlowState& state, const SolverConfig& cfg, double dt) {
  Integrator it(state.u, cfg, state.t);
  it.step(dt);
  return it.state();
}

double adapt_dt(const FlowState& state, const SolverConfig& cfg, std::optional<double> lambda) {
  cfg.validate();
  const Grid1D& g = state.u.grid();
  const double umax = state.u.max_abs();
  double dt;
  if (lambda) {
    if (!(*lambda > 0.0)) throw std::invalid_argument("adapt_dt: lambda must be positive");
    dt = std::min(cfg.effective_dt_max(), cfg.dt_initial * std::pow(*lambda, 3));
  } else {
    dt = cfg.dt_initial;
    if (umax > 0.0) dt = std::min(dt, cfg.cfl_safety * g.spacing() / (4.0 * umax * umax));
  }
  const double u4 = umax * umax * umax * umax;
  if (u4 > 0.0) {
    const double kb = band_wavenumber(g, cfg.dealias_fraction);
    dt = std::min(dt, cfg.cfl_safety * 2.0 * kRk4ImagRadius / (5.0 * kb * u4));
  }
  return dt;
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::BlowupDetected: return "BlowupDetected";
    case RunStatus::Unstable: return "Unstable";
    case RunStatus::Stopped: return "Stopped";
  }
  return "?";
}

std::optional<double> extrapolate_blowup_time(const std::vector<double>& t,
                                              const std::vector<double>& grad_norm) {
  const std::size_t m = std::min(t.size(), grad_norm.size());
  if (m < 2) return std::nullopt;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double y = 1.0 / grad_norm[i];
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  const double md = static_cast<double>(m);
  const double den = md * stt - st * st;
  if (den == 0.0) return std::nullopt;
  const double slope = (md * sty - st * sy) / den;
  const double icpt = (sy - slope * st) / md;
  if (!(slope < 0.0)) return std::nullopt;
  return -icpt / slope;
}

RunOutcome run(const GridField& u0, const SolverConfig& cfg, const Observer& observer) {
  cfg.validate();
  Integrator it(u0, cfg);
  std::deque<double> ts, gs;
  auto record = [&](const FlowState& s) {
    ts.push_back(s.t);
    gs.push_back(s.grad_norm);
    if (ts.size() > 20) {
      ts.pop_front();
      gs.pop_front();
    }
  };

  FlowState current = it.state();
  record(current);
  ObserverReply reply;
  if (observer) reply = observer(current);
  RunStatus status = RunStatus::Completed;
  std::optional<double> T_est;
  std::size_t steps = 0;
  std::string message;
  while (true) {
    if (reply.stop) {
      status = RunStatus::Stopped;
      break;
    }
    if (current.h1_norm > cfg.h1_blowup_threshold) {
      status = RunStatus::BlowupDetected;
      T_est = extrapolate_blowup_time({ts.begin(), ts.end()}, {gs.begin(), gs.end()});
      break;
    }
    if (current.t >= cfg.t_max * (1.0 - 1e-14)) break;
    if (reply.frame_velocity) it.set_frame_velocity(*reply.frame_velocity);
    double dt = adapt_dt(current, cfg, reply.lambda);
    dt = std::min(dt, cfg.t_max - current.t);
    try {
      it.step(dt);
    } catch (const NumericalError& e) {
      status = RunStatus::Unstable;
      message = e.what();
      break;
    }
    ++steps;
    current = it.state();
    record(current);
    reply = observer ? observer(current) : ObserverReply{};
  }
  return RunOutcome{status, std::move(current), T_est, steps, it.sponge_mass_loss(), message};
}

}  // namespace gkdv
