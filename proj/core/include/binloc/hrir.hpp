#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "binloc/fft.hpp"
#include "binloc/signals.hpp"

namespace binloc {

// Azimuth convention throughout: degrees in [-180, 180), 0 = straight ahead,
// positive toward the right ear (channel 2).
struct Direction {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  bool operator==(const Direction&) const = default;
};

// Candidate source directions in the horizontal plane.
class DoaGrid {
 public:
  DoaGrid() = default;
  explicit DoaGrid(std::vector<double> azimuths_deg);  // strictly increasing

  // -80, -65, -55, -45:5:45, 55, 65, 80 (25 directions).
  static DoaGrid standard();
  // Full circle at a fixed step starting from -180.
  static DoaGrid full_circle(double step_deg);

  const std::vector<double>& azimuths() const { return azimuths_; }
  std::size_t size() const { return azimuths_.size(); }
  bool empty() const { return azimuths_.empty(); }
  bool contains(double az) const;
  bool operator==(const DoaGrid&) const = default;

 private:
  std::vector<double> azimuths_;
};

// Wraps to [-180, 180).
double wrap_degrees(double deg);

class HrirSet {
 public:
  HrirSet() = default;
  // taps: directions x 2 x length, direction-major, channel-major, time-minor.
  HrirSet(double sample_rate, std::vector<Direction> grid, std::size_t length,
          std::vector<float> taps, std::string head_id);

  double sample_rate() const { return sample_rate_; }
  const std::vector<Direction>& grid() const { return grid_; }
  std::size_t num_directions() const { return grid_.size(); }
  std::size_t length() const { return length_; }
  const std::string& head_id() const { return head_id_; }
  std::span<const float> taps() const { return taps_; }
  std::span<const float> taps(std::size_t dir, std::size_t channel) const {
    return {taps_.data() + (dir * 2 + channel) * length_, length_};
  }

  // Exact azimuth match at zero elevation.
  std::optional<std::size_t> find(double azimuth_deg) const;
  // Closest grid direction by wrapped azimuth distance; ties go to the lower
  // index.
  std::size_t nearest(double azimuth_deg) const;

 private:
  double sample_rate_ = 0.0;
  std::vector<Direction> grid_;
  std::size_t length_ = 0;
  std::vector<float> taps_;
  std::string head_id_;
};

void save_hrir_set(const std::filesystem::path& path, const HrirSet& set);
HrirSet load_hrir_set(const std::filesystem::path& path);

struct SphericalHeadParams {
  double radius_m = 0.0875;
  std::array<double, 2> ear_azimuths_deg{-90.0, 90.0};
  double sample_rate = 16000.0;
  std::size_t length = 200;
  double max_ild_db = 6.0;
  double sound_speed = 343.0;
  std::string head_id;  // derived from the radius when empty
};

// Woodworth delay of one ear relative to the head center, in seconds.
// Negative means the wavefront reaches the ear before the center.
double woodworth_delay(double radius_m, double sound_speed,
                       double source_az_deg, double ear_az_deg);
// Per-ear level in dB: max_ild_db * sin(theta_rel) * min(1, f / 4 kHz).
double spherical_ild_db(double max_ild_db, double source_az_deg,
                        double ear_az_deg, double freq_hz);

// Fractional-delay impulse + parametric level difference per ear. The delay
// impulse of each ear is normalized to unit energy before the level filter.
HrirSet synth_spherical_head(const SphericalHeadParams& params,
                             const DoaGrid& grid);

// Band-selected DFT of the direct-path HRIR of both ears at one grid azimuth.
std::array<std::vector<Complex>, 2> direct_path_tf(const HrirSet& set,
                                                   double azimuth_deg,
                                                   const StftConfig& config);

// Adds gain * (64-tap Hann-windowed sinc delayed by `delay` samples) into
// `out`. Integer delays collapse to a single tap. Taps outside `out` are
// dropped.
void add_fractional_impulse(std::span<double> out, double delay, double gain);

}  // namespace binloc
