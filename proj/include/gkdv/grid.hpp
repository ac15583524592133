#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gkdv/fft.hpp"

namespace gkdv {

// Uniform periodic grid on [-L/2, L/2) with n_points samples.
class Grid1D {
 public:
  Grid1D(double length, std::size_t n_points);

  double length() const { return length_; }
  std::size_t size() const { return n_; }
  double spacing() const { return length_ / static_cast<double>(n_); }
  double left() const { return -0.5 * length_; }
  double x(std::size_t j) const { return left() + static_cast<double>(j) * spacing(); }
  // Angular wavenumber of half-complex index k (0 <= k <= n/2).
  double wavenumber(std::size_t k) const;
  std::vector<double> coordinates() const;

  bool operator==(const Grid1D& other) const {
    return length_ == other.length_ && n_ == other.n_;
  }

 private:
  double length_;
  std::size_t n_;
};

// Real samples of a function on a Grid1D. Value semantics; values are finite.
class GridField {
 public:
  explicit GridField(const Grid1D& grid);
  GridField(const Grid1D& grid, std::vector<double> values);

  template <class F>
  static GridField sample(const Grid1D& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.x(j));
    return GridField(grid, std::move(v));
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double& operator[](std::size_t j) { return values_[j]; }

  double max_abs() const;
  bool all_finite() const;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(const GridField& o);
  GridField& operator*=(double a);

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(GridField a, const GridField& b);
GridField operator*(double a, GridField f);
GridField operator*(GridField f, double a);

void require_same_grid(const GridField& a, const GridField& b, const char* what);

// Fourier-diagonal derivative of order 1..4.
GridField derivative(const GridField& f, int order);

// Rectangle rule h * sum(values); spectrally accurate for periodic integrands.
double integrate(const GridField& f);
double inner(const GridField& f, const GridField& g);
double l2_norm(const GridField& f);

// g(y) = f(lambda * y + shift) on f's own grid, by band-limited interpolation;
// points outside the box read f periodically.
GridField resample(const GridField& f, double lambda, double shift);
// Same map, evaluated on the nodes of another grid.
GridField resample_onto(const GridField& f, const Grid1D& target, double lambda, double shift);
// Band-limited interpolant at arbitrary points (direct sum, O(n * points)).
std::vector<double> evaluate_at(const GridField& f, std::span<const double> points);

// Zeroes every mode with |k| > fraction * (n/2).
GridField band_limit(const GridField& f, double fraction);
// Periodic antiderivative of a zero-mean field, normalized to vanish at the
// left node. Throws if the mean is not negligible.
GridField periodic_antiderivative(const GridField& f);
// Spectral coefficients (unnormalized r2c output).
std::vector<Complex> spectrum(const GridField& f);
GridField from_spectrum(const Grid1D& grid, std::span<const Complex> coefficients);

// Binary checkpoint: little-endian header (length as double, n as uint64),
// then n doubles.
void write_checkpoint(const std::filesystem::path& path, const GridField& f);
GridField read_checkpoint(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const GridField& f);

}  // namespace gkdv
