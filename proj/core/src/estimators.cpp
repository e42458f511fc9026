#include "binloc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "binloc/error.hpp"
#include "binloc/fft.hpp"

namespace binloc {

std::size_t TfMask::count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
}

TfMask vad_mask(const Spectrogram& spec, double threshold_db) {
  TfMask mask{spec.frames(), spec.bins(),
              std::vector<std::uint8_t>(spec.frames() * spec.bins(), 0)};
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> level(mask.active.size(), 0.0);
  double peak = neg_inf;
  for (std::size_t n = 0; n < spec.frames(); ++n)
    for (std::size_t f = 0; f < spec.bins(); ++f) {
      double acc = 0.0;
      for (std::size_t c = 0; c < spec.channels(); ++c) {
        const double mag = std::abs(spec.at(c, n, f));
        acc += mag > 0.0 ? 20.0 * std::log10(mag) : neg_inf;
      }
      const double v = acc / static_cast<double>(spec.channels());
      level[n * spec.bins() + f] = v;
      peak = std::max(peak, v);
    }
  if (peak == neg_inf) return mask;
  const double floor = peak - threshold_db;
  for (std::size_t i = 0; i < level.size(); ++i)
    mask.active[i] = level[i] >= floor ? 1 : 0;
  return mask;
}

DpRtfEstimate estimate_dprtf_cpsd(const Spectrogram& spec, const TfMask* mask,
                                  double max_iid_db) {
  require(spec.channels() >= 2, ErrorKind::kShape,
          "DP-RTF estimation needs two channels");
  if (mask)
    require(mask->frames == spec.frames() && mask->bins == spec.bins(),
            ErrorKind::kShape, "mask shape differs from the spectrogram");
  const std::size_t F = spec.bins();
  std::vector<Complex> ratio(F, Complex(1.0, 0.0));
  std::vector<bool> reliable(F, false);
  for (std::size_t f = 0; f < F; ++f) {
    Complex cross{0.0, 0.0};
    double auto1 = 0.0;
    for (std::size_t n = 0; n < spec.frames(); ++n) {
      if (mask && !mask->at(n, f)) continue;
      const Complex x1 = spec.at(0, n, f);
      const Complex x2 = spec.at(1, n, f);
      cross += x2 * std::conj(x1);
      auto1 += std::norm(x1);
    }
    if (auto1 > 0.0 && std::abs(cross) > 0.0) {
      ratio[f] = cross / auto1;
      reliable[f] = true;
    }
  }
  return {encode_real(ratio, max_iid_db), std::move(reliable)};
}

GccPhatResult gcc_phat(std::span<const double> x1, std::span<const double> x2,
                       std::size_t max_lag, double sample_rate) {
  require(x1.size() == x2.size(), ErrorKind::kShape, "GCC inputs differ in length");
  require(x1.size() >= 2 * max_lag && !x1.empty(), ErrorKind::kLength,
          "GCC inputs shorter than twice the maximum lag");
  auto energy = [](std::span<const double> x) {
    double e = 0.0;
    for (double v : x) e += v * v;
    return e;
  };
  require(energy(x1) > 0.0 && energy(x2) > 0.0, ErrorKind::kDegenerate,
          "GCC input is all zero");

  const std::size_t n = next_pow2(2 * x1.size());
  RealFft fft(n);
  std::vector<double> p1(n, 0.0), p2(n, 0.0);
  std::copy(x1.begin(), x1.end(), p1.begin());
  std::copy(x2.begin(), x2.end(), p2.begin());
  const auto s1 = fft.forward(p1);
  const auto s2 = fft.forward(p2);
  std::vector<Complex> g(s1.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Complex c = s2[k] * std::conj(s1[k]);
    const double mag = std::abs(c);
    g[k] = mag > 1e-20 ? c / mag : Complex{0.0, 0.0};
  }
  std::vector<double> r(n);
  fft.inverse(g, r);

  GccPhatResult out;
  out.curve.resize(2 * max_lag + 1);
  const long m = static_cast<long>(max_lag);
  double best = -std::numeric_limits<double>::infinity();
  for (long lag = -m; lag <= m; ++lag) {
    const std::size_t idx =
        lag >= 0 ? static_cast<std::size_t>(lag) : n - static_cast<std::size_t>(-lag);
    const double v = r[idx];
    out.curve[static_cast<std::size_t>(lag + m)] = v;
    // Ties go to the most negative lag.
    if (v > best) {
      best = v;
      out.lag = lag;
    }
  }
  out.tdoa_s = static_cast<double>(out.lag) / sample_rate;
  return out;
}

DpRtfErrors dprtf_errors(const DpRtfVec& pred, const DpRtfVec& truth,
                         const std::vector<bool>& active_bins) {
  require(pred.size() == truth.size(), ErrorKind::kShape,
          "prediction and truth differ in length");
  const std::size_t F = truth.num_freqs();
  require(active_bins.size() == F, ErrorKind::kShape,
          "active-bin mask does not match F");
  double iid = 0.0, ipd = 0.0;
  std::size_t used = 0;
  for (std::size_t f = 0; f < F; ++f) {
    if (!active_bins[f]) continue;
    const double di = pred.iid(f) - truth.iid(f);
    const double ds = pred.sin_ipd(f) - truth.sin_ipd(f);
    const double dc = pred.cos_ipd(f) - truth.cos_ipd(f);
    iid += di * di;
    ipd += ds * ds + dc * dc;
    ++used;
  }
  require(used > 0, ErrorKind::kValidation, "no active bins to score");
  return {iid / static_cast<double>(used), ipd / (2.0 * static_cast<double>(used))};
}

}  // namespace binloc
