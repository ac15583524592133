#include "gkdv/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace gkdv {

Grid1D::Grid1D(double length, std::size_t n_points) : length_(length), n_(n_points) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("Grid1D: length must be positive and finite");
  if (n_points < 256 || !std::has_single_bit(n_points))
    throw std::invalid_argument("Grid1D: n_points must be a power of two >= 256");
}

double Grid1D::wavenumber(std::size_t k) const {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / length_;
}

std::vector<double> Grid1D::coordinates() const {
  std::vector<double> xs(n_);
  for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
  return xs;
}

GridField::GridField(const Grid1D& grid) : grid_(grid), values_(grid.size(), 0.0) {}

GridField::GridField(const Grid1D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw std::invalid_argument("GridField: value count does not match the grid");
  if (!all_finite()) throw std::invalid_argument("GridField: non-finite value");
}

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool GridField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_grid(const GridField& a, const GridField& b, const char* what) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

GridField& GridField::operator+=(const GridField& o) {
  require_same_grid(*this, o, "operator+=");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += o.values_[j];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  require_same_grid(*this, o, "operator-=");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= o.values_[j];
  return *this;
}

GridField& GridField::operator*=(const GridField& o) {
  require_same_grid(*this, o, "operator*=");
  for (std::size_t j = 0; j < values_.size(); ++j) values_[j] *= o.values_[j];
  return *this;
}

GridField& GridField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(GridField a, const GridField& b) { return a *= b; }
GridField operator*(double a, GridField f) { return f *= a; }
GridField operator*(GridField f, double a) { return f *= a; }

std::vector<Complex> spectrum(const GridField& f) {
  const auto& fft = real_fft(f.size());
  std::vector<Complex> c(fft.spectrum_size());
  fft.forward(f.values(), c);
  return c;
}

GridField from_spectrum(const Grid1D& grid, std::span<const Complex> coefficients) {
  const auto& fft = real_fft(grid.size());
  std::vector<double> v(grid.size());
  fft.inverse(coefficients, v);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (double& x : v) x *= scale;
  return GridField(grid, std::move(v));
}

GridField derivative(const GridField& f, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("derivative: order must be in 1..4");
  const Grid1D& g = f.grid();
  auto c = spectrum(f);
  const std::size_t nyquist = g.size() / 2;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double kk = g.wavenumber(k);
    Complex factor{1.0, 0.0};
    for (int p = 0; p < order; ++p) factor *= Complex{0.0, kk};
    c[k] *= factor;
  }
  if (order % 2 == 1) c[nyquist] = 0.0;
  return from_spectrum(g, c);
}

double integrate(const GridField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().spacing();
}

double inner(const GridField& f, const GridField& g) {
  require_same_grid(f, g, "inner");
  double s = 0.0;
  auto a = f.values();
  auto b = g.values();
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s * f.grid().spacing();
}

double l2_norm(const GridField& f) { return std::sqrt(inner(f, f)); }

GridField band_limit(const GridField& f, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("band_limit: fraction must be in (0, 1]");
  auto c = spectrum(f);
  const double kmax = fraction * static_cast<double>(f.size() / 2);
  for (std::size_t k = 0; k < c.size(); ++k)
    if (static_cast<double>(k) > kmax) c[k] = 0.0;
  return from_spectrum(f.grid(), c);
}

GridField periodic_antiderivative(const GridField& f) {
  const Grid1D& g = f.grid();
  auto c = spectrum(f);
  const double mean = c[0].real() / static_cast<double>(g.size());
  if (std::abs(mean) * g.length() > 1e-9 * std::max(1.0, f.max_abs() * g.length()))
    throw std::invalid_argument("periodic_antiderivative: field has nonzero mean");
  c[0] = 0.0;
  c[g.size() / 2] = 0.0;
  for (std::size_t k = 1; k < c.size() - 1; ++k) c[k] /= Complex{0.0, g.wavenumber(k)};
  GridField a = from_spectrum(g, c);
  const double a0 = a[0];
  for (double& v : a.values()) v -= a0;
  return a;
}

namespace {

constexpr long double kTwoPi = 6.283185307179586476925286766559L;

// exp(2 pi i * cycles), with the integer part of cycles removed in extended
// precision before the trig call.
Complex unit_phase(long double cycles) {
  const long double frac = cycles - std::floor(cycles);
  const double angle = static_cast<double>(kTwoPi * frac);
  return {std::cos(angle), std::sin(angle)};
}

// Half-spectrum weights turning sum_k over [-n/2, n/2) into Re sum_{k=0}^{n/2}.
std::vector<Complex> one_sided(const GridField& f) {
  auto c = spectrum(f);
  for (std::size_t k = 1; k + 1 < c.size(); ++k) c[k] *= 2.0;
  return c;
}

}  // namespace

GridField resample_onto(const GridField& f, const Grid1D& target, double lambda, double shift) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("resample: lambda must be positive");
  const Grid1D& src = f.grid();
  const auto g = one_sided(f);
  const std::size_t K = g.size();
  const std::size_t M = target.size();

  // Nodes z_j = z0 + j * dz; theta_j = 2 pi (z_j - x0) / L.
  const long double L = src.length();
  const long double z0 = static_cast<long double>(lambda) * target.left() + shift;
  const long double offset = (z0 - static_cast<long double>(src.left())) / L;  // cycles per k
  const long double rate = static_cast<long double>(lambda) * target.spacing() / L;

  // Bluestein: jk = (j^2 + k^2 - (j-k)^2) / 2.
  const std::size_t N = std::bit_ceil(K + M - 1);
  std::vector<Complex> a(N, 0.0), b(N, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const long double kk = static_cast<long double>(k);
    a[k] = g[k] * unit_phase(offset * kk + 0.5L * rate * kk * kk);
  }
  for (std::size_t m = 0; m < M; ++m) {
    const long double mm = static_cast<long double>(m);
    b[m] = unit_phase(-0.5L * rate * mm * mm);
  }
  for (std::size_t m = 1; m < K; ++m) {
    const long double mm = static_cast<long double>(m);
    b[N - m] = unit_phase(-0.5L * rate * mm * mm);
  }
  const auto& fft = complex_fft(N);
  std::vector<Complex> fa(N), fb(N);
  fft.forward(a, fa);
  fft.forward(b, fb);
  for (std::size_t i = 0; i < N; ++i) fa[i] *= fb[i];
  fft.inverse(fa, a);

  std::vector<double> out(M);
  const double scale = 1.0 / (static_cast<double>(N) * static_cast<double>(src.size()));
  for (std::size_t j = 0; j < M; ++j) {
    const long double jj = static_cast<long double>(j);
    out[j] = (unit_phase(0.5L * rate * jj * jj) * a[j]).real() * scale;
  }
  return GridField(target, std::move(out));
}

GridField resample(const GridField& f, double lambda, double shift) {
  return resample_onto(f, f.grid(), lambda, shift);
}

std::vector<double> evaluate_at(const GridField& f, std::span<const double> points) {
  const Grid1D& src = f.grid();
  const auto g = one_sided(f);
  std::vector<double> out(points.size());
  const long double L = src.length();
  for (std::size_t p = 0; p < points.size(); ++p) {
    const long double cycles = (static_cast<long double>(points[p]) - src.left()) / L;
    double acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      acc += (g[k] * unit_phase(cycles * static_cast<long double>(k))).real();
    out[p] = acc / static_cast<double>(src.size());
  }
  return out;
}

}  // namespace gkdv
