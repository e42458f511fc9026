#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "binloc/fft.hpp"

namespace binloc {

using Signal = std::vector<double>;
// Channel-major multichannel audio; every channel has the same length.
using MultiSignal = std::vector<Signal>;

enum class WindowKind { kHann };

struct StftConfig {
  double sample_rate = 16000.0;
  std::size_t window_len = 512;  // 32 ms
  std::size_t hop = 256;         // 16 ms
  WindowKind window = WindowKind::kHann;
  // Inclusive bin range of the localization band. 1..128 covers
  // 31.25 Hz .. 4 kHz at the defaults; DC is left out.
  std::size_t band_lo = 1;
  std::size_t band_hi = 128;

  std::size_t num_bins() const { return window_len / 2 + 1; }
  std::size_t band_size() const { return band_hi - band_lo + 1; }
  double bin_hz(std::size_t full_bin) const {
    return static_cast<double>(full_bin) * sample_rate /
           static_cast<double>(window_len);
  }
  // Frequency of the k-th bin of a band-selected spectrogram.
  double band_hz(std::size_t k) const { return bin_hz(band_lo + k); }
  std::size_t num_frames(std::size_t samples) const;

  // Throws ErrorKind::kValidation if any invariant is broken.
  void validate() const;
};

// Periodic analysis window of length window_len.
std::vector<double> analysis_window(const StftConfig& config);
// WOLA dual of the analysis window: w[n] / sum_k w[n - k*hop]^2, so that the
// shifted products analysis*synthesis sum to exactly one.
std::vector<double> synthesis_window(const StftConfig& config);

class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::size_t channels, std::size_t frames, std::size_t bins,
              const StftConfig& config, bool band_selected);

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  bool band_selected() const { return band_selected_; }
  const StftConfig& config() const { return config_; }

  Complex& at(std::size_t c, std::size_t n, std::size_t f) {
    return data_[(c * frames_ + n) * bins_ + f];
  }
  const Complex& at(std::size_t c, std::size_t n, std::size_t f) const {
    return data_[(c * frames_ + n) * bins_ + f];
  }
  std::span<Complex> frame(std::size_t c, std::size_t n) {
    return {data_.data() + (c * frames_ + n) * bins_, bins_};
  }
  std::span<const Complex> frame(std::size_t c, std::size_t n) const {
    return {data_.data() + (c * frames_ + n) * bins_, bins_};
  }
  // Flat channel-major, frame-major, frequency-minor storage.
  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  bool band_selected_ = false;
  StftConfig config_;
  std::vector<Complex> data_;
};

// Frames are taken without edge padding; trailing samples that do not fill a
// whole window are dropped.
Spectrogram stft_forward(const MultiSignal& audio, const StftConfig& config);
Spectrogram stft_forward(std::span<const double> mono, const StftConfig& config);

// Weighted overlap-add resynthesis of a full-band spectrogram. Output length
// is (frames - 1) * hop + window_len per channel.
MultiSignal stft_inverse(const Spectrogram& spec);

// Keeps bins band_lo..band_hi. Retained values are copied unchanged.
Spectrogram select_band(const Spectrogram& spec);

}  // namespace binloc
