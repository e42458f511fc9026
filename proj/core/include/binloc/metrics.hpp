#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace binloc {

// Fraction of instances whose estimate equals the truth exactly (grid values).
double accuracy(std::span<const double> est, std::span<const double> truth);
// Mean |est - truth| in degrees over all instances.
double mae(std::span<const double> est, std::span<const double> truth);

struct DetectionScores {
  double pd = 0.0;         // fraction of voice-active frames detected in tolerance
  double far_per_s = 0.0;  // out-of-tolerance estimates per voice-active second
};

// Track scoring over voice-active frames only. A frame without an estimate is
// a miss but not a false alarm. Angular error is wrapped to [-180, 180).
DetectionScores pd_far(std::span<const std::optional<double>> est_track,
                       std::span<const double> truth_track,
                       const std::vector<bool>& voice_active,
                       double tolerance_deg, double frame_rate_hz);

// Signal-to-distortion ratio in dB after projecting est onto ref. Returns
// +infinity when est is an exact scaled copy of ref.
double sdr(std::span<const double> est, std::span<const double> ref);

struct MetricsReport {
  std::optional<double> acc;
  std::optional<double> mae_deg;
  std::optional<double> pd;
  std::optional<double> far_per_s;
  std::size_t n_instances = 0;
  nlohmann::ordered_json condition = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const;
};

}  // namespace binloc
