#include "binloc/hrir.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <utility>

#include "binloc/error.hpp"
#include "bytes.hpp"

namespace binloc {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSincHalfWidth = 32;  // 64-tap kernel
constexpr std::size_t kIldHalfLen = 16;
constexpr std::size_t kIldLen = 2 * kIldHalfLen + 1;
constexpr std::uint8_t kHrsMagic[4] = {0x48, 0x52, 0x53, 0x31};  // "HRS1"

double deg2rad(double d) { return d * kPi / 180.0; }

// Signed elevation of the source above the ear's "horizon": +90 when the
// source sits on the ear axis, -90 when directly opposite.
double relative_angle_deg(double source_az_deg, double ear_az_deg) {
  const double gamma = std::abs(wrap_degrees(source_az_deg - ear_az_deg));
  return 90.0 - gamma;
}

// Linear-phase FIR whose magnitude response passes through the per-ear level
// curve at kIldLen equally spaced frequencies.
std::vector<double> ild_filter(const SphericalHeadParams& p, double source_az,
                               double ear_az) {
  std::vector<double> h(kIldLen, 0.0);
  if (relative_angle_deg(source_az, ear_az) == 0.0) {
    h[kIldHalfLen] = 1.0;
    return h;
  }
  const double n = static_cast<double>(kIldLen);
  std::vector<double> gain(kIldHalfLen + 1);
  for (std::size_t k = 0; k <= kIldHalfLen; ++k) {
    const double f = static_cast<double>(k) * p.sample_rate / n;
    gain[k] = std::pow(10.0, spherical_ild_db(p.max_ild_db, source_az, ear_az, f) / 20.0);
  }
  for (std::size_t i = 0; i < kIldLen; ++i) {
    const double m = static_cast<double>(i) - static_cast<double>(kIldHalfLen);
    double acc = gain[0];
    for (std::size_t k = 1; k <= kIldHalfLen; ++k)
      acc += 2.0 * gain[k] * std::cos(2.0 * kPi * static_cast<double>(k) * m / n);
    h[i] = acc / n;
  }
  return h;
}

std::string radius_head_id(double radius_m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sphere-r%.4f", radius_m);
  return buf;
}

}  // namespace

double wrap_degrees(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

DoaGrid::DoaGrid(std::vector<double> azimuths_deg)
    : azimuths_(std::move(azimuths_deg)) {
  for (std::size_t i = 0; i < azimuths_.size(); ++i) {
    require(std::isfinite(azimuths_[i]) && azimuths_[i] >= -180.0 &&
                azimuths_[i] < 180.0,
            ErrorKind::kValidation, "grid azimuth outside [-180, 180)");
    if (i > 0)
      require(azimuths_[i] > azimuths_[i - 1], ErrorKind::kValidation,
              "grid azimuths must be strictly increasing");
  }
}

DoaGrid DoaGrid::standard() {
  std::vector<double> az{-80.0, -65.0, -55.0};
  for (int a = -45; a <= 45; a += 5) az.push_back(a);
  az.insert(az.end(), {55.0, 65.0, 80.0});
  return DoaGrid(std::move(az));
}

DoaGrid DoaGrid::full_circle(double step_deg) {
  require(step_deg > 0.0, ErrorKind::kValidation, "grid step must be > 0");
  std::vector<double> az;
  for (int i = 0;; ++i) {
    const double a = -180.0 + i * step_deg;
    if (a >= 180.0) break;
    az.push_back(a);
  }
  return DoaGrid(std::move(az));
}

bool DoaGrid::contains(double az) const {
  return std::find(azimuths_.begin(), azimuths_.end(), az) != azimuths_.end();
}

HrirSet::HrirSet(double sample_rate, std::vector<Direction> grid,
                 std::size_t length, std::vector<float> taps,
                 std::string head_id)
    : sample_rate_(sample_rate),
      grid_(std::move(grid)),
      length_(length),
      taps_(std::move(taps)),
      head_id_(std::move(head_id)) {
  require(sample_rate_ > 0.0, ErrorKind::kValidation, "sample rate must be > 0");
  require(!grid_.empty(), ErrorKind::kValidation, "HRIR grid is empty");
  require(length_ >= 1, ErrorKind::kValidation, "HRIR length must be >= 1");
  require(taps_.size() == grid_.size() * 2 * length_, ErrorKind::kShape,
          "HRIR tap count does not match directions x 2 x length");
  std::set<std::pair<double, double>> seen;
  for (const auto& d : grid_) {
    require(d.azimuth_deg >= -180.0 && d.azimuth_deg < 180.0,
            ErrorKind::kValidation, "HRIR azimuth outside [-180, 180)");
    require(seen.emplace(d.azimuth_deg, d.elevation_deg).second,
            ErrorKind::kValidation, "duplicate HRIR grid direction");
  }
  for (float t : taps_)
    require(std::isfinite(t), ErrorKind::kValidation, "non-finite HRIR tap");
}

std::optional<std::size_t> HrirSet::find(double azimuth_deg) const {
  for (std::size_t i = 0; i < grid_.size(); ++i)
    if (grid_[i].azimuth_deg == azimuth_deg && grid_[i].elevation_deg == 0.0)
      return i;
  return std::nullopt;
}

std::size_t HrirSet::nearest(double azimuth_deg) const {
  std::size_t best = 0;
  double best_dist = 1e300;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double d = std::abs(wrap_degrees(azimuth_deg - grid_[i].azimuth_deg));
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return best;
}

void save_hrir_set(const std::filesystem::path& path, const HrirSet& set) {
  detail::ByteWriter w;
  w.raw(kHrsMagic, 4);
  w.u32(static_cast<std::uint32_t>(set.sample_rate()));
  w.u32(static_cast<std::uint32_t>(set.num_directions()));
  w.u32(static_cast<std::uint32_t>(set.length()));
  for (const auto& d : set.grid()) {
    w.f32(static_cast<float>(d.azimuth_deg));
    w.f32(static_cast<float>(d.elevation_deg));
  }
  for (float t : set.taps()) w.f32(t);
  require(set.head_id().size() <= 0xFFFF, ErrorKind::kValidation,
          "head id too long");
  w.u16(static_cast<std::uint16_t>(set.head_id().size()));
  w.raw(set.head_id().data(), set.head_id().size());
  detail::write_file(path, w.bytes());
}

HrirSet load_hrir_set(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path));
  std::uint8_t magic[4];
  r.take(magic, 4);
  require(std::equal(magic, magic + 4, kHrsMagic), ErrorKind::kFormat,
          "bad magic in " + path.string() + " (expected HRS1)");
  const double fs = r.u32();
  const std::uint32_t dirs = r.u32();
  const std::uint32_t len = r.u32();
  const std::uint64_t payload = std::uint64_t{dirs} * 8 + std::uint64_t{dirs} * 2 * len * 4;
  require(r.remaining() >= payload + 2, ErrorKind::kLength,
          "payload-length: header declares " + std::to_string(dirs) +
              " directions x " + std::to_string(len) +
              " taps but the file is shorter");
  std::vector<Direction> grid(dirs);
  for (auto& d : grid) {
    d.azimuth_deg = r.f32();
    d.elevation_deg = r.f32();
  }
  std::vector<float> taps(std::size_t{dirs} * 2 * len);
  for (float& t : taps) t = r.f32();
  std::string id(r.u16(), '\0');
  r.take(id.data(), id.size());
  require(r.remaining() == 0, ErrorKind::kLength,
          "payload-length: trailing bytes after head id");
  return HrirSet(fs, std::move(grid), len, std::move(taps), std::move(id));
}

double woodworth_delay(double radius_m, double sound_speed,
                       double source_az_deg, double ear_az_deg) {
  const double rel = relative_angle_deg(source_az_deg, ear_az_deg);
  const double scale = radius_m / sound_speed;
  // Lit ear: plane-wave projection; shadowed ear: arc around the sphere.
  if (rel >= 0.0) return -scale * std::sin(deg2rad(rel));
  return -scale * deg2rad(rel);
}

double spherical_ild_db(double max_ild_db, double source_az_deg,
                        double ear_az_deg, double freq_hz) {
  const double rel = relative_angle_deg(source_az_deg, ear_az_deg);
  return max_ild_db * std::sin(deg2rad(rel)) * std::min(1.0, freq_hz / 4000.0);
}

void add_fractional_impulse(std::span<double> out, double delay, double gain) {
  const double base = std::floor(delay);
  const double frac = delay - base;
  const auto center = static_cast<long long>(base);
  const auto size = static_cast<long long>(out.size());
  if (frac == 0.0) {
    if (center >= 0 && center < size) out[static_cast<std::size_t>(center)] += gain;
    return;
  }
  // With x = m - frac for integer m: sin(pi x) = -(-1)^m sin(pi frac), and the
  // window cosine splits by the angle-sum identity, so only two sin/cos pairs
  // are evaluated per impulse.
  struct Table {
    double c[2 * kSincHalfWidth];
    double s[2 * kSincHalfWidth];
    Table() {
      for (int i = 0; i < 2 * kSincHalfWidth; ++i) {
        const int m = i - kSincHalfWidth + 1;
        c[i] = std::cos(kPi * m / kSincHalfWidth);
        s[i] = std::sin(kPi * m / kSincHalfWidth);
      }
    }
  };
  static const Table table;
  // 1 - frac is exact for frac >= 0.5, which keeps sin(pi frac) accurate
  // when the delay sits just below an integer.
  const double sin_pf = frac > 0.5 ? std::sin(kPi * (1.0 - frac)) : std::sin(kPi * frac);
  const double cos_wf = std::cos(kPi * frac / kSincHalfWidth);
  const double sin_wf = std::sin(kPi * frac / kSincHalfWidth);
  for (int i = 0; i < 2 * kSincHalfWidth; ++i) {
    const int m = i - kSincHalfWidth + 1;
    const long long n = center + m;
    if (n < 0 || n >= size) continue;
    const double x = m - frac;
    const double sign = (m % 2 == 0) ? -1.0 : 1.0;
    const double sinc = sign * sin_pf / (kPi * x);
    const double win = 0.5 * (1.0 + table.c[i] * cos_wf + table.s[i] * sin_wf);
    out[static_cast<std::size_t>(n)] += gain * sinc * win;
  }
}

HrirSet synth_spherical_head(const SphericalHeadParams& p, const DoaGrid& grid) {
  require(p.radius_m > 0.0, ErrorKind::kValidation, "head radius must be > 0");
  require(p.sample_rate > 0.0 && p.sound_speed > 0.0, ErrorKind::kValidation,
          "sample rate and sound speed must be > 0");
  require(!grid.empty(), ErrorKind::kValidation, "grid is empty");

  const double lead = p.radius_m / p.sound_speed * p.sample_rate;  // max advance
  const double lag = lead * kPi / 2.0;                              // max shadow delay
  const double base = kSincHalfWidth + std::ceil(lead) + 1.0;
  const double reach = base + lag + kSincHalfWidth + 2.0 * kIldHalfLen + 1.0;
  require(reach <= static_cast<double>(p.length), ErrorKind::kLength,
          "HRIR length " + std::to_string(p.length) + " cannot hold the " +
              std::to_string(static_cast<int>(std::ceil(reach))) +
              "-sample delayed response");

  const std::size_t len = p.length;
  std::vector<Direction> dirs;
  std::vector<float> taps;
  taps.reserve(grid.size() * 2 * len);
  for (double az : grid.azimuths()) {
    dirs.push_back({az, 0.0});
    for (double ear : p.ear_azimuths_deg) {
      std::vector<double> impulse(len, 0.0);
      const double delay =
          base + woodworth_delay(p.radius_m, p.sound_speed, az, ear) * p.sample_rate;
      add_fractional_impulse(impulse, delay, 1.0);
      double energy = 0.0;
      for (double v : impulse) energy += v * v;
      const double norm = 1.0 / std::sqrt(energy);
      const auto shaped = fft_convolve(impulse, ild_filter(p, az, ear));
      for (std::size_t i = 0; i < len; ++i)
        taps.push_back(static_cast<float>(shaped[i] * norm));
    }
  }
  return HrirSet(p.sample_rate, std::move(dirs), len, std::move(taps),
                 p.head_id.empty() ? radius_head_id(p.radius_m) : p.head_id);
}

std::array<std::vector<Complex>, 2> direct_path_tf(const HrirSet& set,
                                                   double azimuth_deg,
                                                   const StftConfig& config) {
  config.validate();
  require(set.sample_rate() == config.sample_rate, ErrorKind::kShape,
          "HRIR sample rate differs from the STFT config");
  const auto idx = set.find(azimuth_deg);
  if (!idx) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "azimuth %g deg is not on the HRIR grid of %s",
                  azimuth_deg, set.head_id().c_str());
    fail(ErrorKind::kLookup, buf);
  }
  std::array<std::vector<Complex>, 2> out;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    const auto h = set.taps(*idx, ch);
    auto& tf = out[ch];
    tf.resize(config.band_size());
    for (std::size_t k = 0; k < tf.size(); ++k) {
      const double w = 2.0 * kPi * config.band_hz(k) / config.sample_rate;
      double re = 0.0, im = 0.0;
      for (std::size_t n = 0; n < h.size(); ++n) {
        const double ph = w * static_cast<double>(n);
        re += h[n] * std::cos(ph);
        im -= h[n] * std::sin(ph);
      }
      tf[k] = {re, im};
    }
  }
  return out;
}

}  // namespace binloc
