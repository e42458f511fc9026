#include "binloc/signals.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "binloc/error.hpp"

namespace binloc {

std::size_t StftConfig::num_frames(std::size_t samples) const {
  if (samples < window_len) return 0;
  return (samples - window_len) / hop + 1;
}

void StftConfig::validate() const {
  require(sample_rate > 0.0, ErrorKind::kValidation, "sample_rate must be > 0");
  require(window_len >= 2 && hop >= 1, ErrorKind::kValidation,
          "window_len and hop must be positive");
  require(window_len % hop == 0 && window_len / hop >= 2,
          ErrorKind::kValidation,
          "hop must divide window_len with at least 50% overlap");
  require(band_lo <= band_hi && band_hi < num_bins(), ErrorKind::kValidation,
          "band [" + std::to_string(band_lo) + ", " + std::to_string(band_hi) +
              "] outside the " + std::to_string(num_bins()) + "-bin spectrum");
}

std::vector<double> analysis_window(const StftConfig& config) {
  const std::size_t n = config.window_len;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

std::vector<double> synthesis_window(const StftConfig& config) {
  const auto w = analysis_window(config);
  const std::size_t n = config.window_len;
  const std::size_t hop = config.hop;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t j = i % hop; j < n; j += hop) denom += w[j] * w[j];
    s[i] = w[i] / denom;
  }
  return s;
}

Spectrogram::Spectrogram(std::size_t channels, std::size_t frames,
                         std::size_t bins, const StftConfig& config,
                         bool band_selected)
    : channels_(channels),
      frames_(frames),
      bins_(bins),
      band_selected_(band_selected),
      config_(config),
      data_(channels * frames * bins) {}

Spectrogram stft_forward(const MultiSignal& audio, const StftConfig& config) {
  config.validate();
  require(!audio.empty(), ErrorKind::kShape, "audio has no channels");
  const std::size_t len = audio.front().size();
  for (const auto& ch : audio)
    require(ch.size() == len, ErrorKind::kShape, "channel lengths differ");
  require(len >= config.window_len, ErrorKind::kLength,
          "audio of " + std::to_string(len) + " samples is shorter than one " +
              std::to_string(config.window_len) + "-sample window");

  const std::size_t frames = config.num_frames(len);
  Spectrogram spec(audio.size(), frames, config.num_bins(), config, false);
  const auto window = analysis_window(config);
  RealFft fft(config.window_len);
  std::vector<double> buf(config.window_len);
  for (std::size_t c = 0; c < audio.size(); ++c) {
    for (std::size_t n = 0; n < frames; ++n) {
      const double* src = audio[c].data() + n * config.hop;
      for (std::size_t i = 0; i < buf.size(); ++i) {
        require(std::isfinite(src[i]), ErrorKind::kValidation,
                "non-finite audio sample");
        buf[i] = src[i] * window[i];
      }
      fft.forward(buf, spec.frame(c, n));
    }
  }
  return spec;
}

Spectrogram stft_forward(std::span<const double> mono, const StftConfig& config) {
  return stft_forward(MultiSignal{Signal(mono.begin(), mono.end())}, config);
}

MultiSignal stft_inverse(const Spectrogram& spec) {
  require(!spec.band_selected(), ErrorKind::kShape,
          "cannot resynthesize a band-selected spectrogram");
  const StftConfig& config = spec.config();
  require(spec.bins() == config.num_bins(), ErrorKind::kShape,
          "spectrogram bin count does not match its config");
  require(spec.frames() >= 1, ErrorKind::kLength, "spectrogram has no frames");

  const std::size_t len = (spec.frames() - 1) * config.hop + config.window_len;
  const auto synth = synthesis_window(config);
  RealFft fft(config.window_len);
  std::vector<double> buf(config.window_len);
  MultiSignal out(spec.channels(), Signal(len, 0.0));
  for (std::size_t c = 0; c < spec.channels(); ++c) {
    for (std::size_t n = 0; n < spec.frames(); ++n) {
      fft.inverse(spec.frame(c, n), buf);
      double* dst = out[c].data() + n * config.hop;
      for (std::size_t i = 0; i < buf.size(); ++i) dst[i] += buf[i] * synth[i];
    }
  }
  return out;
}

Spectrogram select_band(const Spectrogram& spec) {
  require(!spec.band_selected(), ErrorKind::kValidation,
          "spectrogram is already band-selected");
  const StftConfig& config = spec.config();
  config.validate();
  require(spec.bins() == config.num_bins(), ErrorKind::kShape,
          "spectrogram bin count does not match its config");
  const std::size_t width = config.band_size();
  Spectrogram out(spec.channels(), spec.frames(), width, config, true);
  for (std::size_t c = 0; c < spec.channels(); ++c)
    for (std::size_t n = 0; n < spec.frames(); ++n) {
      auto src = spec.frame(c, n);
      auto dst = out.frame(c, n);
      for (std::size_t k = 0; k < width; ++k) dst[k] = src[config.band_lo + k];
    }
  return out;
}

}  // namespace binloc
