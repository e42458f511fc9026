#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "binloc/dprtf.hpp"
#include "binloc/signals.hpp"

namespace binloc {

// Binary time-frequency mask, frame-major.
struct TfMask {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::uint8_t> active;

  bool at(std::size_t n, std::size_t f) const { return active[n * bins + f] != 0; }
  std::size_t count() const;
};

inline constexpr double kDefaultVadThresholdDb = 40.0;

// Active where the channel-averaged log-magnitude is within threshold_db of the
// spectrogram's peak. An all-zero spectrogram gives an all-inactive mask.
TfMask vad_mask(const Spectrogram& spec,
                double threshold_db = kDefaultVadThresholdDb);

struct DpRtfEstimate {
  DpRtfVec vec;
  // False where no active frame fed the bin; those bins are encoded from a
  // neutral ratio of 1.
  std::vector<bool> reliable;
};

// Masked cross-PSD ratio sum_n X2 X1* / sum_n |X1|^2 per bin, then encoded.
DpRtfEstimate estimate_dprtf_cpsd(const Spectrogram& spec,
                                  const TfMask* mask = nullptr,
                                  double max_iid_db = kDefaultMaxIidDb);

struct GccPhatResult {
  double tdoa_s = 0.0;
  long lag = 0;                // samples; positive when x2 lags x1
  std::vector<double> curve;   // lags -max_lag..max_lag
};

GccPhatResult gcc_phat(std::span<const double> x1, std::span<const double> x2,
                       std::size_t max_lag, double sample_rate = 16000.0);

struct DpRtfErrors {
  double iid = 0.0;  // MSE of the IID components on active bins
  double ipd = 0.0;  // MSE over the sin and cos components on active bins
};

DpRtfErrors dprtf_errors(const DpRtfVec& pred, const DpRtfVec& truth,
                         const std::vector<bool>& active_bins);

}  // namespace binloc
