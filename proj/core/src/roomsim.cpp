#include "binloc/roomsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "binloc/error.hpp"
#include "binloc/fft.hpp"
#include "binloc/rng.hpp"

namespace binloc {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSabine = 0.161;

double deg2rad(double d) { return d * kPi / 180.0; }

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

void check_same_shape(const MultiSignal& a, const MultiSignal& b) {
  require(a.size() == b.size() && !a.empty(), ErrorKind::kShape,
          "channel counts differ");
  for (std::size_t c = 0; c < a.size(); ++c)
    require(a[c].size() == b[c].size() && a[c].size() == a[0].size(),
            ErrorKind::kShape, "signal lengths differ");
}

MultiSignal render_with(const std::array<Signal, 2>& taps,
                        std::span<const double> source) {
  require(!source.empty(), ErrorKind::kLength, "source is empty");
  MultiSignal out(2);
  for (std::size_t ch = 0; ch < 2; ++ch) {
    out[ch] = fft_convolve(taps[ch], source);
    out[ch].resize(source.size());
  }
  return out;
}

// Allen-Berkley image-method high-pass, in place.
void highpass(Signal& x, double cutoff_hz, double sample_rate) {
  const double w = 2.0 * kPi * cutoff_hz / sample_rate;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double y0 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    y2 = y1;
    y1 = y0;
    y0 = b1 * y1 + b2 * y2 + v;
    v = y0 + a1 * y1 + r1 * y2;
  }
}

}  // namespace

double RoomConfig::volume() const {
  return dimensions[0] * dimensions[1] * dimensions[2];
}

double RoomConfig::surface() const {
  const auto& d = dimensions;
  return 2.0 * (d[0] * d[1] + d[1] * d[2] + d[0] * d[2]);
}

void RoomConfig::validate() const {
  for (int i = 0; i < 3; ++i) {
    require(dimensions[i] > 0.0, ErrorKind::kValidation,
            "room dimensions must be > 0");
    require(array_center[i] > 0.0 && array_center[i] < dimensions[i],
            ErrorKind::kValidation, "array center lies outside the room");
  }
  require(rt60 >= 0.0 && std::isfinite(rt60), ErrorKind::kValidation,
          "rt60 must be finite and >= 0");
  require(sound_speed > 0.0, ErrorKind::kValidation, "sound speed must be > 0");
}

Reflectivity rt60_to_reflectivity(const RoomConfig& room) {
  room.validate();
  if (room.rt60 == 0.0) return {};
  const double alpha = kSabine * room.volume() / (room.surface() * room.rt60);
  require(alpha < 1.0, ErrorKind::kInfeasible,
          "RT60 " + std::to_string(room.rt60) +
              " s is too short for this room (Sabine absorption " +
              std::to_string(alpha) + " >= 1)");
  return {alpha, std::sqrt(1.0 - alpha), false};
}

std::array<double, 3> source_position(const RoomConfig& room, double source_az_deg,
                                      double distance_m) {
  const double phi = deg2rad(room.array_yaw_deg - source_az_deg);
  return {room.array_center[0] + distance_m * std::cos(phi),
          room.array_center[1] + distance_m * std::sin(phi),
          room.array_center[2]};
}

Brir simulate_brir(const RoomConfig& room, double source_az_deg,
                   double distance_m, const HrirSet& hrir,
                   const BrirOptions& options) {
  const Reflectivity refl = rt60_to_reflectivity(room);
  require(hrir.num_directions() > 0, ErrorKind::kValidation, "HRIR grid is empty");
  require(distance_m > 0.0, ErrorKind::kValidation, "source distance must be > 0");
  require(options.highpass_hz >= 0.0 && options.highpass_hz < hrir.sample_rate() / 2.0,
          ErrorKind::kValidation, "high-pass cutoff must lie in [0, fs/2)");
  const auto src = source_position(room, source_az_deg, distance_m);
  for (int i = 0; i < 3; ++i)
    require(src[i] > 0.0 && src[i] < room.dimensions[i], ErrorKind::kValidation,
            "source lies outside the room");

  const double fs = hrir.sample_rate();
  const double c = room.sound_speed;
  const double direct_delay = distance_m / c * fs;
  const double horizon =
      refl.anechoic ? 0.0 : (options.horizon_s >= 0.0 ? options.horizon_s : room.rt60);
  const int max_order =
      refl.anechoic ? 0 : (options.max_order >= 0 ? options.max_order
                                                  : std::numeric_limits<int>::max());
  const double max_path = distance_m + horizon * c;
  const auto echo_len =
      static_cast<std::size_t>(std::ceil(max_path / c * fs)) + 34;

  // One echogram per HRIR direction that receives at least one image.
  std::vector<Signal> echo(hrir.num_directions());
  auto echogram = [&](std::size_t dir) -> Signal& {
    if (echo[dir].empty()) echo[dir].assign(echo_len, 0.0);
    return echo[dir];
  };

  Signal direct_echo(echo_len, 0.0);
  const std::size_t direct_dir = hrir.nearest(source_az_deg);
  add_fractional_impulse(direct_echo, direct_delay, 1.0 / distance_m);

  if (!refl.anechoic && max_order > 0) {
    const auto& L = room.dimensions;
    const auto& m = room.array_center;
    std::array<int, 3> span{};
    for (int i = 0; i < 3; ++i)
      span[i] = static_cast<int>(std::ceil(max_path / (2.0 * L[i]))) + 1;
    const double log_beta = std::log(refl.beta);
    for (int u = 0; u < 2; ++u)
      for (int v = 0; v < 2; ++v)
        for (int w = 0; w < 2; ++w)
          for (int l = -span[0]; l <= span[0]; ++l)
            for (int p = -span[1]; p <= span[1]; ++p)
              for (int q = -span[2]; q <= span[2]; ++q) {
                const int order = std::abs(l - u) + std::abs(l) + std::abs(p - v) +
                                  std::abs(p) + std::abs(q - w) + std::abs(q);
                if (order == 0 || order > max_order) continue;
                const double dx = (1 - 2 * u) * src[0] + 2 * l * L[0] - m[0];
                const double dy = (1 - 2 * v) * src[1] + 2 * p * L[1] - m[1];
                const double dz = (1 - 2 * w) * src[2] + 2 * q * L[2] - m[2];
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (r > max_path) continue;
                const double gain = std::exp(order * log_beta) / r;
                const double az =
                    wrap_degrees(room.array_yaw_deg - std::atan2(dy, dx) * 180.0 / kPi);
                add_fractional_impulse(echogram(hrir.nearest(az)), r / c * fs, gain);
              }
  }

  const std::size_t L = hrir.length();
  const std::size_t out_len = echo_len + L - 1;
  const std::size_t n = next_pow2(out_len);
  RealFft fft(n);
  std::array<std::vector<Complex>, 2> acc{std::vector<Complex>(fft.num_bins()),
                                          std::vector<Complex>(fft.num_bins())};
  std::vector<double> pad(n);
  auto accumulate = [&](const Signal& e, std::size_t dir,
                        std::array<std::vector<Complex>, 2>& into) {
    std::fill(pad.begin(), pad.end(), 0.0);
    std::copy(e.begin(), e.end(), pad.begin());
    const auto E = fft.forward(pad);
    for (std::size_t ch = 0; ch < 2; ++ch) {
      std::fill(pad.begin(), pad.end(), 0.0);
      const auto h = hrir.taps(dir, ch);
      std::copy(h.begin(), h.end(), pad.begin());
      const auto H = fft.forward(pad);
      for (std::size_t k = 0; k < H.size(); ++k) into[ch][k] += E[k] * H[k];
    }
  };
  auto to_time = [&](const std::vector<Complex>& spec, std::size_t len) {
    Signal t(n);
    fft.inverse(spec, t);
    t.resize(len);
    return t;
  };

  std::array<std::vector<Complex>, 2> direct_spec{std::vector<Complex>(fft.num_bins()),
                                                  std::vector<Complex>(fft.num_bins())};
  accumulate(direct_echo, direct_dir, direct_spec);
  for (std::size_t dir = 0; dir < echo.size(); ++dir)
    if (!echo[dir].empty()) accumulate(echo[dir], dir, acc);

  const auto direct_len = static_cast<std::size_t>(std::ceil(direct_delay)) +
                          33 + L;  // sinc tail + HRIR
  Brir brir;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    Signal reflections = to_time(acc[ch], out_len);
    if (options.highpass_hz > 0.0) highpass(reflections, options.highpass_hz, fs);
    brir.taps[ch] = to_time(direct_spec[ch], out_len);
    for (std::size_t i = 0; i < out_len; ++i) brir.taps[ch][i] += reflections[i];
    brir.direct[ch] = to_time(direct_spec[ch], std::min(direct_len, out_len));
  }
  return brir;
}

MultiSignal render_source(const Brir& brir, std::span<const double> source) {
  return render_with(brir.taps, source);
}

MultiSignal render_direct(const Brir& brir, std::span<const double> source) {
  return render_with(brir.direct, source);
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kBabble: return "babble-proxy";
    case NoiseKind::kFactory: return "factory-proxy";
  }
  return "white";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  if (name == "white") return NoiseKind::kWhite;
  if (name == "babble" || name == "babble-proxy") return NoiseKind::kBabble;
  if (name == "factory" || name == "factory-proxy") return NoiseKind::kFactory;
  fail(ErrorKind::kValidation, "unknown noise kind '" + std::string(name) + "'");
}

double noise_shape(NoiseKind kind, double f) {
  switch (kind) {
    case NoiseKind::kWhite:
      return 1.0;
    case NoiseKind::kBabble: {
      // Speech-band hump: high-pass at 150 Hz, -6 dB/oct above 500 Hz.
      const double hp = (f / 150.0) / std::sqrt(1.0 + (f / 150.0) * (f / 150.0));
      const double lp = 1.0 / std::sqrt(1.0 + (f / 500.0) * (f / 500.0));
      return hp * lp;
    }
    case NoiseKind::kFactory: {
      // Pink floor plus machinery resonances.
      double g = 1.0 / std::sqrt(std::max(f, 100.0) / 100.0);
      for (double fk : {500.0, 1500.0, 3000.0}) {
        const double x = (f - fk) / 40.0;
        g *= 1.0 + 3.0 * std::exp(-x * x);
      }
      return g;
    }
  }
  return 1.0;
}

namespace {

MultiSignal mix_coherent(std::span<const double> base1, std::span<const double> base2,
                         double mic_distance_m, double sample_rate,
                         double sound_speed, NoiseKind kind) {
  require(mic_distance_m >= 0.0, ErrorKind::kValidation,
          "mic distance must be >= 0");
  require(base1.size() == base2.size() && !base1.empty(), ErrorKind::kShape,
          "noise bases must be non-empty and of equal length");
  const std::size_t n = base1.size();
  RealFft fft(n);
  const auto n1 = fft.forward(base1);
  const auto n2 = fft.forward(base2);
  std::vector<Complex> y1(n1.size()), y2(n1.size());
  for (std::size_t k = 0; k < n1.size(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n);
    const double gamma = sinc(2.0 * kPi * f * mic_distance_m / sound_speed);
    // Symmetric square root of [[1, g], [g, 1]].
    const double sp = std::sqrt(std::max(0.0, 1.0 + gamma));
    const double sm = std::sqrt(std::max(0.0, 1.0 - gamma));
    const double a = 0.5 * (sp + sm);
    const double b = 0.5 * (sp - sm);
    const double g = noise_shape(kind, f);
    y1[k] = g * (a * n1[k] + b * n2[k]);
    y2[k] = g * (b * n1[k] + a * n2[k]);
  }
  MultiSignal out(2, Signal(n));
  fft.inverse(y1, out[0]);
  fft.inverse(y2, out[1]);
  for (auto& ch : out) {
    double p = 0.0;
    for (double v : ch) p += v * v;
    p /= static_cast<double>(n);
    if (p > 0.0) {
      const double s = 1.0 / std::sqrt(p);
      for (double& v : ch) v *= s;
    }
  }
  return out;
}

}  // namespace

MultiSignal generate_diffuse_noise(std::size_t length, double mic_distance_m,
                                   const NoiseSource& source,
                                   const StftConfig& config, double sound_speed) {
  require(length >= 1, ErrorKind::kLength, "noise length must be >= 1");
  Rng rng(source.seed);
  Signal b1(length), b2(length);
  for (double& v : b1) v = rng.gaussian();
  for (double& v : b2) v = rng.gaussian();
  return mix_coherent(b1, b2, mic_distance_m, config.sample_rate, sound_speed,
                      source.kind);
}

MultiSignal generate_diffuse_noise(std::span<const double> base1,
                                   std::span<const double> base2,
                                   double mic_distance_m, double sample_rate,
                                   double sound_speed) {
  return mix_coherent(base1, base2, mic_distance_m, sample_rate, sound_speed,
                      NoiseKind::kWhite);
}

double mean_power(const MultiSignal& x) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& ch : x) {
    for (double v : ch) acc += v * v;
    count += ch.size();
  }
  return count ? acc / static_cast<double>(count) : 0.0;
}

double snr_noise_scale(const MultiSignal& speech, const MultiSignal& noise,
                       double snr_db) {
  check_same_shape(speech, noise);
  const double ps = mean_power(speech);
  require(ps > 0.0, ErrorKind::kDegenerate, "speech is all zero");
  if (snr_db == kInfiniteSnr) return 0.0;
  require(std::isfinite(snr_db), ErrorKind::kValidation, "SNR must be finite or +inf");
  const double pn = mean_power(noise);
  require(pn > 0.0, ErrorKind::kDegenerate,
          "noise is all zero but a finite SNR was requested");
  return std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
}

MultiSignal mix_at_snr(const MultiSignal& speech, const MultiSignal& noise,
                       double snr_db) {
  const double k = snr_noise_scale(speech, noise, snr_db);
  MultiSignal out = speech;
  if (k == 0.0) return out;
  for (std::size_t c = 0; c < out.size(); ++c)
    for (std::size_t i = 0; i < out[c].size(); ++i) out[c][i] += k * noise[c][i];
  return out;
}

}  // namespace binloc
