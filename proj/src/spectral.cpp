#include "solitonscope/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <numbers>

#include "solitonscope/error.hpp"

namespace solitonscope {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

// Plans are executed on caller-owned arrays, so they must not assume the
// alignment of the planning buffer.
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;
}  // namespace

struct Fft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<cplx> scratch;
};

Fft::Fft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw InvalidArgument("fft: zero length");
  plans_->scratch.resize(n);
  std::lock_guard lock(planner_mutex());
  auto* buf = as_fftw(plans_->scratch.data());
  const int len = static_cast<int>(n);
  plans_->fwd = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, kFlags);
  plans_->bwd = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, kFlags);
}

Fft::~Fft() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::span<cplx> data) {
  if (data.size() != n_) throw InvalidArgument("fft: length mismatch");
  fftw_execute_dft(plans_->fwd, as_fftw(data.data()), as_fftw(data.data()));
}

void Fft::backward(std::span<cplx> data) {
  if (data.size() != n_) throw InvalidArgument("fft: length mismatch");
  fftw_execute_dft(plans_->bwd, as_fftw(data.data()), as_fftw(data.data()));
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

std::vector<double> wavenumbers(std::size_t n, double spacing) {
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * spacing);
  for (std::size_t m = 0; m < n; ++m) {
    const auto signed_m = (m <= n / 2) ? static_cast<double>(m)
                                       : static_cast<double>(m) - static_cast<double>(n);
    k[m] = base * signed_m;
  }
  return k;
}

std::vector<cplx> spectral_derivative(std::span<const cplx> f, double spacing) {
  const std::size_t n = f.size();
  Fft fft(n);
  const auto k = wavenumbers(n, spacing);
  // Real and imaginary parts are differentiated separately so that a real
  // (or purely imaginary) input gives an exactly real (imaginary) output.
  std::vector<cplx> re(n), im(n);
  for (std::size_t m = 0; m < n; ++m) {
    re[m] = f[m].real();
    im[m] = f[m].imag();
  }
  for (auto* buf : {&re, &im}) {
    fft.forward(*buf);
    for (std::size_t m = 0; m < n; ++m) (*buf)[m] *= cplx(0.0, k[m]);
    if (n % 2 == 0) (*buf)[n / 2] = 0.0;
    fft.backward(*buf);
  }
  std::vector<cplx> out(n);
  for (std::size_t m = 0; m < n; ++m) out[m] = cplx(re[m].real(), im[m].real());
  return out;
}

}  // namespace solitonscope
