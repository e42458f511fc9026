#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "binloc/hrir.hpp"
#include "binloc/signals.hpp"

namespace binloc {

// Shoebox room with its origin at one corner. The array sits at array_center
// looking along array_yaw_deg (counterclockwise from +x); source azimuths are
// measured clockwise from that look direction.
struct RoomConfig {
  std::array<double, 3> dimensions{5.0, 7.0, 3.0};
  std::array<double, 3> array_center{2.5, 3.0, 1.5};
  double array_yaw_deg = 0.0;
  double rt60 = 0.0;
  double sound_speed = 343.0;

  double volume() const;
  double surface() const;
  void validate() const;
};

struct Reflectivity {
  double alpha = 1.0;  // uniform absorption of all six surfaces
  double beta = 0.0;   // pressure reflection coefficient sqrt(1 - alpha)
  bool anechoic = true;
};

// Sabine inversion. rt60 == 0 yields the anechoic flag.
Reflectivity rt60_to_reflectivity(const RoomConfig& room);

struct Brir {
  std::array<Signal, 2> taps;    // full response, both ears
  std::array<Signal, 2> direct;  // order-0 image only
  std::size_t direct_len() const { return direct[0].size(); }
  std::size_t length() const { return taps[0].size(); }
};

struct BrirOptions {
  // Highest reflection order; negative means bounded only by the time horizon.
  int max_order = -1;
  // Images arriving later than this many seconds after the direct path are
  // dropped. Negative means "use the room's RT60", i.e. the -60 dB point of
  // the decay.
  double horizon_s = -1.0;
  // Cutoff of the second-order high-pass applied to the reflections, which
  // removes the low-frequency build-up of equal-sign images. 0 disables it.
  double highpass_hz = 100.0;
};

// World position of a source at (azimuth, distance) from the array center.
std::array<double, 3> source_position(const RoomConfig& room, double source_az_deg,
                                      double distance_m);

Brir simulate_brir(const RoomConfig& room, double source_az_deg,
                   double distance_m, const HrirSet& hrir,
                   const BrirOptions& options = {});

// Per-ear linear convolution, truncated to the source length.
MultiSignal render_source(const Brir& brir, std::span<const double> source);
MultiSignal render_direct(const Brir& brir, std::span<const double> source);

enum class NoiseKind { kWhite, kBabble, kFactory };
std::string_view to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view name);

struct NoiseSource {
  NoiseKind kind = NoiseKind::kWhite;
  std::uint64_t seed = 0;
};

// Magnitude response used to color the noise of a given kind.
double noise_shape(NoiseKind kind, double freq_hz);

// Binaural noise whose inter-channel coherence follows sin(x)/x with
// x = 2 pi f d / c. Each channel has unit average power.
MultiSignal generate_diffuse_noise(std::size_t length, double mic_distance_m,
                                   const NoiseSource& source,
                                   const StftConfig& config,
                                   double sound_speed = 343.0);
// Same field built from two caller-supplied, mutually independent noise
// signals (e.g. two segments of a recording).
MultiSignal generate_diffuse_noise(std::span<const double> base1,
                                   std::span<const double> base2,
                                   double mic_distance_m, double sample_rate,
                                   double sound_speed = 343.0);

// Power averaged over all channels and samples.
double mean_power(const MultiSignal& x);

// Sentinel for "no noise".
inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

// speech + k * noise with k chosen so that the channel-averaged power ratio
// equals snr_db.
MultiSignal mix_at_snr(const MultiSignal& speech, const MultiSignal& noise,
                       double snr_db);
double snr_noise_scale(const MultiSignal& speech, const MultiSignal& noise,
                       double snr_db);

}  // namespace binloc
