#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace binloc {

using Complex = std::complex<double>;

// Real-input FFT of a fixed size, backed by FFTW. Plans are created once per
// size and shared process-wide; transforms are safe to run concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t size);

  std::size_t size() const { return size_; }
  std::size_t num_bins() const { return size_ / 2 + 1; }

  // Unnormalized forward transform: out[k] = sum_n in[n] e^{-j 2 pi k n / N}.
  void forward(std::span<const double> in, std::span<Complex> out) const;
  std::vector<Complex> forward(std::span<const double> in) const;

  // Inverse including the 1/N factor, so inverse(forward(x)) == x.
  void inverse(std::span<const Complex> in, std::span<double> out) const;

 private:
  std::size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

std::size_t next_pow2(std::size_t n);

// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b);

}  // namespace binloc
