#include "binloc/metrics.hpp"

#include <cmath>
#include <limits>

#include "binloc/error.hpp"
#include "binloc/hrir.hpp"

namespace binloc {
namespace {

void check_pair(std::span<const double> est, std::span<const double> truth) {
  require(est.size() == truth.size(), ErrorKind::kShape,
          "estimate and truth lists differ in length");
  require(!est.empty(), ErrorKind::kValidation, "no instances to score");
}

}  // namespace

double accuracy(std::span<const double> est, std::span<const double> truth) {
  check_pair(est, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < est.size(); ++i) hits += est[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(est.size());
}

double mae(std::span<const double> est, std::span<const double> truth) {
  check_pair(est, truth);
  double acc = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) acc += std::abs(est[i] - truth[i]);
  return acc / static_cast<double>(est.size());
}

DetectionScores pd_far(std::span<const std::optional<double>> est_track,
                       std::span<const double> truth_track,
                       const std::vector<bool>& voice_active,
                       double tolerance_deg, double frame_rate_hz) {
  require(est_track.size() == truth_track.size() &&
              voice_active.size() == truth_track.size(),
          ErrorKind::kShape, "track lengths differ");
  require(frame_rate_hz > 0.0 && tolerance_deg >= 0.0, ErrorKind::kValidation,
          "frame rate must be > 0 and tolerance >= 0");
  std::size_t active = 0, detected = 0, false_alarms = 0;
  for (std::size_t i = 0; i < truth_track.size(); ++i) {
    if (!voice_active[i]) continue;
    ++active;
    if (!est_track[i]) continue;
    const double err = std::abs(wrap_degrees(*est_track[i] - truth_track[i]));
    if (err <= tolerance_deg)
      ++detected;
    else
      ++false_alarms;
  }
  require(active > 0, ErrorKind::kValidation, "no voice-active frames");
  const double duration_s = static_cast<double>(active) / frame_rate_hz;
  return {static_cast<double>(detected) / static_cast<double>(active),
          static_cast<double>(false_alarms) / duration_s};
}

double sdr(std::span<const double> est, std::span<const double> ref) {
  require(est.size() == ref.size() && !ref.empty(), ErrorKind::kShape,
          "SDR inputs differ in length");
  double ref_energy = 0.0, est_energy = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref_energy += ref[i] * ref[i];
    est_energy += est[i] * est[i];
    dot += est[i] * ref[i];
  }
  require(ref_energy > 0.0, ErrorKind::kDegenerate, "SDR reference has zero energy");
  require(est_energy > 0.0, ErrorKind::kDegenerate, "SDR estimate has zero energy");
  const double scale = dot / ref_energy;
  double target = 0.0, distortion = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = scale * ref[i];
    const double e = est[i] - t;
    target += t * t;
    distortion += e * e;
  }
  if (distortion == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(target / distortion);
}

nlohmann::ordered_json MetricsReport::to_json() const {
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["acc"] = opt(acc);
  j["mae_deg"] = opt(mae_deg);
  j["pd"] = opt(pd);
  j["far_per_s"] = opt(far_per_s);
  j["n_instances"] = n_instances;
  j["condition"] = condition;
  return j;
}

}  // namespace binloc
