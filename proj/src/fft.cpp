#include "gkdv/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace gkdv {
namespace {

// FFTW's planner is not thread safe; everything that creates or destroys a
// plan goes through this lock.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// FFTW_ESTIMATE keeps plan selection deterministic, so identical runs are
// bit-identical.
constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFft: size must be positive");
  std::vector<double> real(n);
  std::vector<Complex> spec(n / 2 + 1);
  const int ni = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_1d(ni, real.data(), as_fftw(spec.data()), kPlanFlags);
  inverse_plan_ = fftw_plan_dft_c2r_1d(ni, as_fftw(spec.data()), real.data(), kPlanFlags);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("RealFft: FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::forward(std::span<const double> in, std::span<Complex> out) const {
  if (in.size() != n_ || out.size() != spectrum_size())
    throw std::invalid_argument("RealFft::forward: size mismatch");
  // r2c does not modify its input, the const_cast only satisfies the C API.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       as_fftw(out.data()));
}

void RealFft::inverse(std::span<const Complex> in, std::span<double> out) const {
  if (in.size() != spectrum_size() || out.size() != n_)
    throw std::invalid_argument("RealFft::inverse: size mismatch");
  // c2r destroys its input.
  thread_local std::vector<Complex> scratch;
  scratch.assign(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), as_fftw(scratch.data()),
                       out.data());
}

ComplexFft::ComplexFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("ComplexFft: size must be positive");
  std::vector<Complex> a(n), b(n);
  const int ni = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  forward_plan_ =
      fftw_plan_dft_1d(ni, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, kPlanFlags);
  inverse_plan_ =
      fftw_plan_dft_1d(ni, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, kPlanFlags);
  if (!forward_plan_ || !inverse_plan_) throw std::runtime_error("ComplexFft: FFTW planning failed");
}

ComplexFft::~ComplexFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void ComplexFft::forward(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("ComplexFft: size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_),
                   as_fftw(const_cast<Complex*>(in.data())), as_fftw(out.data()));
}

void ComplexFft::inverse(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != n_ || out.size() != n_) throw std::invalid_argument("ComplexFft: size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_),
                   as_fftw(const_cast<Complex*>(in.data())), as_fftw(out.data()));
}

namespace {

template <class Fft>
const Fft& cached(std::size_t n) {
  static std::mutex m;
  static std::map<std::size_t, std::unique_ptr<Fft>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

}  // namespace

const RealFft& real_fft(std::size_t n) { return cached<RealFft>(n); }
const ComplexFft& complex_fft(std::size_t n) { return cached<ComplexFft>(n); }

}  // namespace gkdv
