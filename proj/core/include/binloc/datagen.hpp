#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "binloc/dprtf.hpp"
#include "binloc/estimators.hpp"
#include "binloc/hrir.hpp"
#include "binloc/metrics.hpp"
#include "binloc/roomsim.hpp"
#include "binloc/signals.hpp"

namespace binloc {

// A head is either loaded from an HRS1 file or synthesized as a sphere.
struct HeadSpec {
  std::string id;
  std::optional<std::filesystem::path> hrir_path;
  double radius_m = 0.0875;
  std::array<double, 2> ear_azimuths_deg{-90.0, 90.0};
  // Used for the diffuse-noise coherence. Defaults to the ear chord for
  // spherical heads and 0.157 m for loaded heads.
  std::optional<double> mic_distance_m;
};

struct RoomCondition {
  std::vector<double> rt60_s;
  std::vector<double> snr_db;
};

struct RoomSpec {
  std::string id;
  std::array<double, 3> dimensions{};
  std::array<double, 3> array_center{};
  // Picked automatically (first of 0/90/180/270 that keeps every source
  // inside the room) when unset.
  std::optional<double> array_yaw_deg;
  std::vector<double> distances_m;
  std::vector<RoomCondition> conditions;
};

struct SplitSpec {
  std::size_t count = 0;
  std::vector<HeadSpec> heads;
  std::vector<RoomSpec> rooms;
};

struct GenConfig {
  std::uint64_t master_seed = 0;
  StftConfig stft;
  double duration_s = 0.5;
  double max_iid_db = kDefaultMaxIidDb;
  double sound_speed = 343.0;
  DoaGrid grid = DoaGrid::standard();
  std::vector<NoiseKind> noise_kinds{NoiseKind::kWhite, NoiseKind::kBabble,
                                     NoiseKind::kFactory};
  std::size_t hrir_length = 200;
  double hrir_grid_step_deg = 5.0;  // full-circle grid of synthesized heads
  std::optional<std::filesystem::path> source_wav_dir;
  std::optional<std::filesystem::path> noise_wav_dir;
  // Keys among "train", "val", "test"; generated in that order.
  std::vector<std::pair<std::string, SplitSpec>> splits;

  // floor(duration * fs / hop) frames; 0.5 s at 16 kHz gives 31.
  std::size_t frames_per_instance() const;
  // Shortest signal that yields frames_per_instance() frames.
  std::size_t samples_per_instance() const;
  std::size_t total_count() const;
  // Throws ErrorKind::kValidation or kInfeasible.
  void validate() const;
};

// Parses the JSON config. Relative paths resolve against base_dir.
GenConfig gen_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});
GenConfig load_gen_config(const std::filesystem::path& path);
// Fifteen shoebox rooms (ten train, two val, three test) with spherical
// heads of distinct radii per split.
GenConfig default_gen_config();
// Chooses the array yaw for a room spec (explicit or automatic).
double resolve_array_yaw(const RoomSpec& room, const DoaGrid& grid);

struct InstanceRecord {
  std::string id;
  std::string split;
  double theta_deg = 0.0;
  double rt60_s = 0.0;
  double snr_db = 0.0;
  std::string room_id;
  std::string head_id;
  double distance_m = 0.0;
  std::string noise_kind;
  // Relative to the dataset root.
  std::string mixture_path;
  std::string direct_path;
  std::string target_path;

  nlohmann::ordered_json to_json() const;
  static InstanceRecord from_json(const nlohmann::json& j);
};

struct Manifest {
  std::filesystem::path root;
  std::vector<InstanceRecord> records;
};

// Speech-like excitation: colored noise (-6 dB/oct above 500 Hz) gated by
// syllable-length on/off envelopes.
Signal synth_speech_like(std::size_t length, double sample_rate, std::uint64_t seed);

// Mono PCM16 or float32 WAV, first channel only.
Signal read_wav(const std::filesystem::path& path, double* sample_rate = nullptr);
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               double sample_rate);

// Builds every instance of every split under out_dir: per-instance tensors
// under <split>/, per-head HRS1 and dictionary files, and manifest.jsonl.
// Output bytes depend only on cfg, never on `jobs`.
Manifest generate_dataset(const GenConfig& cfg, const std::filesystem::path& out_dir,
                          unsigned jobs = 1);

Manifest read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const std::filesystem::path& manifest_path,
                    const std::vector<InstanceRecord>& records);

struct Prediction {
  std::string id;
  std::vector<double> dprtf;
};

std::vector<Prediction> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path,
                       const std::vector<Prediction>& predictions);

// Unprocessed baseline: VAD-masked cross-PSD DP-RTF of every mixture (or
// only those of `split` when non-empty).
std::vector<Prediction> baseline_predictions(const Manifest& manifest,
                                             const StftConfig& config,
                                             const std::string& split = {},
                                             double vad_threshold_db = kDefaultVadThresholdDb,
                                             double max_iid_db = kDefaultMaxIidDb);

struct Evaluation {
  MetricsReport overall;
  // One report per (rt60, snr, distance) cell, sorted by that key.
  std::vector<MetricsReport> strata;

  nlohmann::ordered_json to_json() const;
};

Evaluation evaluate_predictions(const Manifest& manifest,
                                const std::vector<Prediction>& predictions,
                                const Dictionary& dict);

}  // namespace binloc
