#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace solitonscope {

using cplx = std::complex<double>;

/// One-dimensional complex FFT of fixed length, backed by FFTW.
///
/// Plans are created with FFTW_ESTIMATE so results are bit-reproducible from
/// run to run. Plan creation and destruction are serialized through a
/// process-wide mutex; execute() on distinct objects is thread-safe.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return n_; }

  /// Unnormalized forward transform, in place.
  void forward(std::span<cplx> data);
  /// Inverse transform including the 1/n normalization, in place.
  void backward(std::span<cplx> data);

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

/// Angular wavenumbers 2 pi m / (n h) in FFT order.
std::vector<double> wavenumbers(std::size_t n, double spacing);

/// Spectral first derivative of periodic samples, Nyquist mode dropped.
/// The derivative of a real signal is exactly real.
std::vector<cplx> spectral_derivative(std::span<const cplx> f, double spacing);

}  // namespace solitonscope
