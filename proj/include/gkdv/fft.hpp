#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace gkdv {

using Complex = std::complex<double>;

// Real <-> half-complex transform pair for one size. Plans are created once
// under a lock and shared; execution uses the new-array interface and is
// reentrant.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<Complex> out) const;
  // Unnormalized: inverse(forward(f)) == n * f.
  void inverse(std::span<const Complex> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::size_t size() const { return n_; }
  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  void inverse(std::span<const Complex> in, std::span<Complex> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

const RealFft& real_fft(std::size_t n);
const ComplexFft& complex_fft(std::size_t n);

}  // namespace gkdv
