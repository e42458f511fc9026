#include "binloc/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>
#include <tuple>

#include "binloc/error.hpp"
#include "binloc/estimators.hpp"
#include "binloc/rng.hpp"
#include "binloc/tensor_io.hpp"

namespace binloc {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kWallMargin = 0.05;  // m
constexpr double kDefaultLoadedMicDistance = 0.157;

double round_to(double v, double step) { return std::round(v / step) * step; }

double round9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

// Either an explicit list or {"start", "step", "end"} (inclusive).
std::vector<double> parse_value_set(const json& j, const std::string& what) {
  // null and "inf" stand for +infinity (the no-noise SNR).
  auto scalar = [&](const json& v) {
    if (v.is_null() || (v.is_string() && v.get<std::string>() == "inf")) return kInfiniteSnr;
    require(v.is_number(), ErrorKind::kValidation, what + ": expected numbers");
    return v.get<double>();
  };
  if (j.is_number() || j.is_null() || j.is_string()) return {scalar(j)};
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& e : j) v.push_back(scalar(e));
    return v;
  }
  if (j.is_object()) {
    const double start = j.at("start").get<double>();
    const double step = j.at("step").get<double>();
    const double end = j.at("end").get<double>();
    require(step > 0.0 && end >= start, ErrorKind::kValidation,
            what + ": range needs step > 0 and end >= start");
    std::vector<double> v;
    for (int i = 0;; ++i) {
      const double x = start + i * step;
      if (x > end + 1e-9) break;
      v.push_back(round_to(x, 1e-6));
    }
    return v;
  }
  fail(ErrorKind::kValidation, what + ": expected a number, list or range");
}

std::array<double, 3> parse_triple(const json& j, const std::string& what) {
  auto v = j.get<std::vector<double>>();
  require(v.size() == 3, ErrorKind::kValidation, what + " must have 3 entries");
  return {v[0], v[1], v[2]};
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

double head_mic_distance(const HeadSpec& h) {
  if (h.mic_distance_m) return *h.mic_distance_m;
  if (h.hrir_path) return kDefaultLoadedMicDistance;
  const double half = std::abs(h.ear_azimuths_deg[1] - h.ear_azimuths_deg[0]) / 2.0;
  return 2.0 * h.radius_m * std::sin(half * std::numbers::pi / 180.0);
}

bool sources_fit(const RoomSpec& room, double yaw, const DoaGrid& grid) {
  RoomConfig rc;
  rc.dimensions = room.dimensions;
  rc.array_center = room.array_center;
  rc.array_yaw_deg = yaw;
  for (double d : room.distances_m)
    for (double az : grid.azimuths()) {
      const auto p = source_position(rc, az, d);
      for (int i = 0; i < 2; ++i)
        if (p[i] < kWallMargin || p[i] > room.dimensions[i] - kWallMargin) return false;
    }
  return true;
}

std::vector<fs::path> list_wavs(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path());
  if (ec) fail(ErrorKind::kIo, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  require(!out.empty(), ErrorKind::kValidation, "no .wav files in " + dir.string());
  return out;
}

// Random segment of one WAV from `files`, at least `length` samples long.
Signal wav_segment(const std::vector<fs::path>& files, std::size_t length,
                   double sample_rate, Rng& rng) {
  const auto& path = files[rng.index(files.size())];
  double rate = 0.0;
  Signal all = read_wav(path, &rate);
  require(rate == sample_rate, ErrorKind::kValidation,
          path.string() + " is not sampled at the configured rate");
  require(all.size() >= length, ErrorKind::kLength,
          path.string() + " is shorter than one instance");
  const std::size_t off = rng.index(all.size() - length + 1);
  return Signal(all.begin() + static_cast<long>(off),
                all.begin() + static_cast<long>(off + length));
}

struct HeadAssets {
  HrirSet hrir;
  Dictionary dict;
  double mic_distance = 0.0;
};

}  // namespace

std::size_t GenConfig::frames_per_instance() const {
  return static_cast<std::size_t>(std::floor(duration_s * stft.sample_rate / stft.hop + 1e-9));
}

std::size_t GenConfig::samples_per_instance() const {
  const std::size_t n = frames_per_instance();
  return n == 0 ? 0 : (n - 1) * stft.hop + stft.window_len;
}

std::size_t GenConfig::total_count() const {
  std::size_t n = 0;
  for (const auto& [name, s] : splits) n += s.count;
  return n;
}

double resolve_array_yaw(const RoomSpec& room, const DoaGrid& grid) {
  if (room.array_yaw_deg) {
    require(sources_fit(room, *room.array_yaw_deg, grid), ErrorKind::kValidation,
            "room " + room.id + ": some sources fall outside the room");
    return *room.array_yaw_deg;
  }
  for (double yaw : {0.0, 90.0, 180.0, 270.0})
    if (sources_fit(room, yaw, grid)) return yaw;
  fail(ErrorKind::kValidation,
       "room " + room.id + ": no array orientation keeps every source inside");
}

void GenConfig::validate() const {
  stft.validate();
  require(frames_per_instance() >= 1, ErrorKind::kValidation,
          "instance duration is shorter than one STFT window");
  require(!grid.empty(), ErrorKind::kValidation, "DOA grid is empty");
  require(!noise_kinds.empty(), ErrorKind::kValidation, "no noise kinds");
  require(!splits.empty(), ErrorKind::kValidation, "no splits configured");
  std::map<std::string, std::string> head_owner;
  std::set<std::string> split_names;
  for (const auto& [name, split] : splits) {
    require(name == "train" || name == "val" || name == "test",
            ErrorKind::kValidation, "unknown split '" + name + "'");
    require(split_names.insert(name).second, ErrorKind::kValidation,
            "split '" + name + "' listed twice");
    require(split.count >= 1, ErrorKind::kValidation,
            "split '" + name + "' needs count >= 1");
    require(!split.heads.empty() && !split.rooms.empty(), ErrorKind::kValidation,
            "split '" + name + "' needs at least one head and one room");
    for (const auto& h : split.heads) {
      require(!h.id.empty(), ErrorKind::kValidation, "head without id");
      auto [it, fresh] = head_owner.emplace(h.id, name);
      require(fresh || it->second == name, ErrorKind::kValidation,
              "head '" + h.id + "' appears in both '" + it->second + "' and '" +
                  name + "'; heads must be disjoint across splits");
      require(h.hrir_path || h.radius_m > 0.0, ErrorKind::kValidation,
              "head '" + h.id + "' needs a radius or an HRIR file");
    }
    for (const auto& room : split.rooms) {
      RoomConfig rc;
      rc.dimensions = room.dimensions;
      rc.array_center = room.array_center;
      rc.sound_speed = sound_speed;
      rc.validate();
      require(!room.distances_m.empty() && !room.conditions.empty(),
              ErrorKind::kValidation,
              "room " + room.id + " needs distances and conditions");
      for (double d : room.distances_m)
        require(d > 0.0, ErrorKind::kValidation, "distances must be > 0");
      resolve_array_yaw(room, grid);
      for (const auto& cond : room.conditions) {
        require(!cond.rt60_s.empty() && !cond.snr_db.empty(), ErrorKind::kValidation,
                "room " + room.id + " has an empty RT60 or SNR set");
        for (double rt : cond.rt60_s) {
          rc.rt60 = rt;
          rt60_to_reflectivity(rc);
        }
        for (double snr : cond.snr_db)
          require(std::isfinite(snr) || snr == kInfiniteSnr, ErrorKind::kValidation,
                  "SNR must be finite or +inf");
      }
    }
  }
}

GenConfig gen_config_from_json(const json& j, const fs::path& base_dir) {
  try {
    GenConfig cfg;
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    cfg.stft.sample_rate = j.value("sample_rate", cfg.stft.sample_rate);
    cfg.duration_s = j.value("duration_s", cfg.duration_s);
    cfg.max_iid_db = j.value("delta_i_max", cfg.max_iid_db);
    cfg.sound_speed = j.value("sound_speed", cfg.sound_speed);
    cfg.hrir_length = j.value("hrir_length", cfg.hrir_length);
    cfg.hrir_grid_step_deg = j.value("hrir_grid_step_deg", cfg.hrir_grid_step_deg);
    if (j.contains("grid_deg")) cfg.grid = DoaGrid(j.at("grid_deg").get<std::vector<double>>());
    if (j.contains("noise_kinds")) {
      cfg.noise_kinds.clear();
      for (const auto& k : j.at("noise_kinds"))
        cfg.noise_kinds.push_back(noise_kind_from_string(k.get<std::string>()));
    }
    if (j.contains("source_wav_dir"))
      cfg.source_wav_dir = resolve(base_dir, j.at("source_wav_dir").get<std::string>());
    if (j.contains("noise_wav_dir"))
      cfg.noise_wav_dir = resolve(base_dir, j.at("noise_wav_dir").get<std::string>());

    // Fallback condition for rooms that do not list their own.
    std::optional<RoomCondition> default_cond;
    if (j.contains("rt60_s") && j.contains("snr_db"))
      default_cond = RoomCondition{parse_value_set(j.at("rt60_s"), "rt60_s"),
                                   parse_value_set(j.at("snr_db"), "snr_db")};

    for (const char* name : {"train", "val", "test"}) {
      if (!j.contains("splits") || !j.at("splits").contains(name)) continue;
      const auto& js = j.at("splits").at(name);
      SplitSpec split;
      split.count = js.at("count").get<std::size_t>();
      for (const auto& jh : js.at("heads")) {
        HeadSpec h;
        h.id = jh.at("id").get<std::string>();
        if (jh.contains("hrir")) h.hrir_path = resolve(base_dir, jh.at("hrir").get<std::string>());
        h.radius_m = jh.value("radius_m", h.radius_m);
        if (jh.contains("ear_azimuths_deg")) {
          auto e = jh.at("ear_azimuths_deg").get<std::vector<double>>();
          require(e.size() == 2, ErrorKind::kValidation, "ear_azimuths_deg needs 2 values");
          h.ear_azimuths_deg = {e[0], e[1]};
        }
        if (jh.contains("mic_distance_m")) h.mic_distance_m = jh.at("mic_distance_m").get<double>();
        split.heads.push_back(std::move(h));
      }
      for (const auto& jr : js.at("rooms")) {
        RoomSpec r;
        r.id = jr.at("id").get<std::string>();
        r.dimensions = parse_triple(jr.at("dimensions"), "dimensions");
        r.array_center = parse_triple(jr.at("array_center"), "array_center");
        if (jr.contains("array_yaw_deg")) r.array_yaw_deg = jr.at("array_yaw_deg").get<double>();
        r.distances_m = parse_value_set(jr.at("distances_m"), "distances_m");
        if (jr.contains("conditions")) {
          for (const auto& jc : jr.at("conditions"))
            r.conditions.push_back({parse_value_set(jc.at("rt60_s"), "rt60_s"),
                                    parse_value_set(jc.at("snr_db"), "snr_db")});
        } else if (jr.contains("rt60_s") && jr.contains("snr_db")) {
          r.conditions.push_back({parse_value_set(jr.at("rt60_s"), "rt60_s"),
                                  parse_value_set(jr.at("snr_db"), "snr_db")});
        } else if (default_cond) {
          r.conditions.push_back(*default_cond);
        }
        split.rooms.push_back(std::move(r));
      }
      cfg.splits.emplace_back(name, std::move(split));
    }
    return cfg;
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string("config: ") + e.what());
  }
}

GenConfig load_gen_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  return gen_config_from_json(j, path.parent_path());
}

GenConfig default_gen_config() {
  GenConfig cfg;
  const std::vector<double> snr_all{-5, 0, 5, 10, 15, 20};
  auto steps = [](double step, double end) {
    std::vector<double> v;
    for (int i = 0; i * step <= end + 1e-9; ++i) v.push_back(round_to(i * step, 1e-6));
    return v;
  };
  auto room = [](std::string id, std::array<double, 3> dims, std::array<double, 3> center,
                 std::vector<double> dist, std::vector<RoomCondition> conds) {
    RoomSpec r;
    r.id = std::move(id);
    r.dimensions = dims;
    r.array_center = center;
    r.distances_m = std::move(dist);
    r.conditions = std::move(conds);
    return r;
  };
  auto sphere = [](const char* id, double radius) {
    HeadSpec h;
    h.id = id;
    h.radius_m = radius;
    return h;
  };

  SplitSpec train;
  train.count = 1000;
  train.heads = {sphere("sphere-a", 0.0800), sphere("sphere-b", 0.0830),
                 sphere("sphere-c", 0.0860), sphere("sphere-d", 0.0890),
                 sphere("sphere-e", 0.0920), sphere("sphere-f", 0.0950)};
  train.rooms = {
      room("train-01", {6.7, 9.0, 4.6}, {2.5, 4.0, 1.8}, {3.0, 3.6}, {{steps(0.28, 0.84), snr_all}}),
      // 0.17 s is below the Sabine floor of this room and is left out.
      room("train-02", {7.0, 8.0, 5.0}, {3.0, 3.5, 1.7}, {1.5, 2.0, 2.5, 3.0, 3.4},
           {{{0.0, 0.34, 0.51, 0.68, 0.85}, snr_all}}),
      room("train-03", {8.0, 6.5, 3.6}, {4.0, 3.3, 1.75}, {1.5, 2.9}, {{steps(0.27, 0.81), snr_all}}),
      room("train-04", {7.0, 7.0, 4.0}, {3.5, 3.0, 1.6}, {1.0, 2.0, 3.0}, {{steps(0.18, 0.90), snr_all}}),
      room("train-05", {5.3, 8.0, 3.8}, {2.5, 1.4, 1.3}, {1.8, 2.4}, {{steps(0.23, 0.92), snr_all}}),
      room("train-06", {5.0, 6.0, 2.8}, {2.0, 3.1, 1.45}, {0.5, 1.5, 2.5}, {{steps(0.21, 0.84), snr_all}}),
      room("train-07", {4.5, 6.0, 3.1}, {2.0, 3.0, 1.67}, {0.8, 2.2}, {{steps(0.26, 0.78), snr_all}}),
      room("train-08", {4.0, 5.5, 3.0}, {2.5, 2.5, 1.4}, {0.5, 1.0}, {{steps(0.25, 0.75), snr_all}}),
      room("train-09", {5.0, 3.2, 2.9}, {2.0, 1.5, 1.2}, {0.6, 1.2}, {{steps(0.19, 0.95), snr_all}}),
      room("train-10", {3.8, 3.0, 2.5}, {1.2, 1.45, 1.55}, {0.75, 1.25}, {{steps(0.30, 0.90), snr_all}}),
  };

  SplitSpec val;
  val.count = 200;
  val.heads = {sphere("sphere-g", 0.0845), sphere("sphere-h", 0.0905)};
  val.rooms = {
      room("val-01", {6.0, 6.0, 3.5}, {3.5, 3.0, 1.65}, {1.75, 2.25}, {{steps(0.22, 0.88), snr_all}}),
      room("val-02", {4.0, 6.0, 3.2}, {2.0, 3.5, 1.35}, {0.75, 1.25}, {{steps(0.24, 0.72), snr_all}}),
  };

  const std::vector<RoomCondition> test_conds{{{0.2, 0.4, 0.6, 0.8}, {5.0}},
                                              {{0.6}, {-5, 0, 5, 10, 15}}};
  SplitSpec test;
  test.count = 300;
  test.heads = {sphere("sphere-i", 0.0815), sphere("sphere-j", 0.0875),
                sphere("sphere-k", 0.0935)};
  test.rooms = {
      room("test-large", {6.0, 8.0, 3.8}, {2.0, 4.0, 1.65}, {0.6, 1.5, 2.4, 3.3}, test_conds),
      room("test-medium", {5.0, 7.0, 3.0}, {2.5, 3.0, 1.5}, {0.7, 1.4, 2.1}, test_conds),
      room("test-small", {4.0, 4.0, 2.7}, {1.8, 1.7, 1.6}, {0.8, 1.3}, test_conds),
  };

  cfg.splits = {{"train", std::move(train)}, {"val", std::move(val)}, {"test", std::move(test)}};
  return cfg;
}

nlohmann::ordered_json InstanceRecord::to_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["split"] = split;
  j["theta_deg"] = theta_deg;
  j["rt60_s"] = rt60_s;
  if (std::isinf(snr_db))
    j["snr_db"] = nullptr;
  else
    j["snr_db"] = snr_db;
  j["room_id"] = room_id;
  j["head_id"] = head_id;
  j["distance_m"] = distance_m;
  j["noise_kind"] = noise_kind;
  j["mixture"] = mixture_path;
  j["direct"] = direct_path;
  j["target"] = target_path;
  return j;
}

InstanceRecord InstanceRecord::from_json(const json& j) {
  InstanceRecord r;
  r.id = j.at("id").get<std::string>();
  r.split = j.at("split").get<std::string>();
  r.theta_deg = j.at("theta_deg").get<double>();
  r.rt60_s = j.at("rt60_s").get<double>();
  r.snr_db = j.at("snr_db").is_null() ? kInfiniteSnr : j.at("snr_db").get<double>();
  r.room_id = j.at("room_id").get<std::string>();
  r.head_id = j.at("head_id").get<std::string>();
  r.distance_m = j.at("distance_m").get<double>();
  r.noise_kind = j.at("noise_kind").get<std::string>();
  r.mixture_path = j.at("mixture").get<std::string>();
  r.direct_path = j.at("direct").get<std::string>();
  r.target_path = j.at("target").get<std::string>();
  return r;
}

Signal synth_speech_like(std::size_t length, double sample_rate, std::uint64_t seed) {
  require(length >= 2, ErrorKind::kLength, "source length must be >= 2");
  Rng rng(seed);
  Signal white(length);
  for (double& v : white) v = rng.gaussian();
  RealFft fft(length);
  auto spec = fft.forward(white);
  spec[0] = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * sample_rate / static_cast<double>(length);
    spec[k] /= std::sqrt(1.0 + (f / 500.0) * (f / 500.0));
  }
  Signal out(length);
  fft.inverse(spec, out);

  // Alternating syllable/pause envelope with 10 ms raised-cosine ramps.
  const auto ramp = static_cast<std::size_t>(0.01 * sample_rate);
  Signal env(length, 0.0);
  std::size_t pos = 0;
  bool on = true;
  while (pos < length) {
    const double dur = on ? rng.uniform(0.08, 0.25) : rng.uniform(0.03, 0.12);
    const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(dur * sample_rate));
    for (std::size_t i = 0; i < n && pos + i < length; ++i) {
      double g = 0.02;
      if (on) {
        const std::size_t from_edge = std::min(i, n - 1 - i);
        g = from_edge >= ramp
                ? 1.0
                : 0.02 + 0.98 * 0.5 *
                             (1.0 - std::cos(std::numbers::pi * static_cast<double>(from_edge) /
                                             static_cast<double>(ramp)));
      }
      env[pos + i] = g;
    }
    pos += n;
    on = !on;
  }
  double power = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    out[i] *= env[i];
    power += out[i] * out[i];
  }
  const double s = 1.0 / std::sqrt(power / static_cast<double>(length));
  for (double& v : out) v *= s;
  return out;
}

Manifest generate_dataset(const GenConfig& cfg, const fs::path& out_dir, unsigned jobs) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "heads", ec);
  fs::create_directories(out_dir / "dictionaries", ec);
  for (const auto& [name, split] : cfg.splits) fs::create_directories(out_dir / name, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  // Heads and their dictionaries are built once and shared read-only.
  std::map<std::string, HeadAssets> heads;
  for (const auto& [name, split] : cfg.splits)
    for (const auto& h : split.heads) {
      HrirSet set;
      if (h.hrir_path) {
        set = load_hrir_set(*h.hrir_path);
      } else {
        SphericalHeadParams p;
        p.radius_m = h.radius_m;
        p.ear_azimuths_deg = h.ear_azimuths_deg;
        p.sample_rate = cfg.stft.sample_rate;
        p.length = cfg.hrir_length;
        p.sound_speed = cfg.sound_speed;
        p.head_id = h.id;
        set = synth_spherical_head(p, DoaGrid::full_circle(cfg.hrir_grid_step_deg));
      }
      require(set.sample_rate() == cfg.stft.sample_rate, ErrorKind::kValidation,
              "head '" + h.id + "' is not sampled at the configured rate");
      Dictionary dict = build_dictionary(set, cfg.grid, cfg.stft, cfg.max_iid_db);
      dict.head_id = h.id;
      save_hrir_set(out_dir / "heads" / (h.id + ".hrs"), set);
      save_dictionary(out_dir / "dictionaries" / (h.id + ".json"), dict);
      heads.emplace(h.id, HeadAssets{std::move(set), std::move(dict), head_mic_distance(h)});
    }

  std::vector<fs::path> source_wavs, noise_wavs;
  if (cfg.source_wav_dir) source_wavs = list_wavs(*cfg.source_wav_dir);
  if (cfg.noise_wav_dir) noise_wavs = list_wavs(*cfg.noise_wav_dir);

  struct Job {
    const std::string* split_name;
    const SplitSpec* split;
    std::size_t index;
  };
  std::vector<Job> plan;
  for (const auto& [name, split] : cfg.splits)
    for (std::size_t i = 0; i < split.count; ++i) plan.push_back({&name, &split, i});

  std::vector<std::map<std::string, double>> yaw_cache(cfg.splits.size());
  std::map<const RoomSpec*, double> yaws;
  for (const auto& [name, split] : cfg.splits)
    for (const auto& room : split.rooms) yaws[&room] = resolve_array_yaw(room, cfg.grid);

  const std::size_t len = cfg.samples_per_instance();
  std::vector<InstanceRecord> records(plan.size());

  auto run_one = [&](const Job& job) {
    const std::string& sname = *job.split_name;
    const SplitSpec& split = *job.split;
    Rng rng(derive_seed(cfg.master_seed, sname, job.index));
    const RoomSpec& room = split.rooms[rng.index(split.rooms.size())];
    const HeadSpec& head = split.heads[rng.index(split.heads.size())];
    const double theta = cfg.grid.azimuths()[rng.index(cfg.grid.size())];
    const double distance = room.distances_m[rng.index(room.distances_m.size())];
    const RoomCondition& cond = room.conditions[rng.index(room.conditions.size())];
    const double rt60 = cond.rt60_s[rng.index(cond.rt60_s.size())];
    const double snr = cond.snr_db[rng.index(cond.snr_db.size())];
    const NoiseKind kind = cfg.noise_kinds[rng.index(cfg.noise_kinds.size())];
    const std::uint64_t source_seed = rng.next();
    const std::uint64_t noise_seed = rng.next();

    const HeadAssets& assets = heads.at(head.id);
    RoomConfig rc;
    rc.dimensions = room.dimensions;
    rc.array_center = room.array_center;
    rc.array_yaw_deg = yaws.at(&room);
    rc.rt60 = rt60;
    rc.sound_speed = cfg.sound_speed;
    const Brir brir = simulate_brir(rc, theta, distance, assets.hrir);

    Signal source;
    if (source_wavs.empty()) {
      source = synth_speech_like(len, cfg.stft.sample_rate, source_seed);
    } else {
      Rng wav_rng(source_seed);
      source = wav_segment(source_wavs, len, cfg.stft.sample_rate, wav_rng);
    }
    const MultiSignal reverberant = render_source(brir, source);
    const MultiSignal direct = render_direct(brir, source);

    MultiSignal noise;
    if (noise_wavs.empty()) {
      noise = generate_diffuse_noise(len, assets.mic_distance, {kind, noise_seed},
                                     cfg.stft, cfg.sound_speed);
    } else {
      Rng wav_rng(noise_seed);
      const Signal both = wav_segment(noise_wavs, 2 * len, cfg.stft.sample_rate, wav_rng);
      noise = generate_diffuse_noise(std::span(both).first(len), std::span(both).last(len),
                                     assets.mic_distance, cfg.stft.sample_rate,
                                     cfg.sound_speed);
    }
    const MultiSignal mixture = mix_at_snr(reverberant, noise, snr);

    const Spectrogram mix_spec = select_band(stft_forward(mixture, cfg.stft));
    const Spectrogram direct_spec = select_band(stft_forward(direct, cfg.stft));
    const DpRtfVec& target = assets.dict.entry(theta);

    char id[64];
    std::snprintf(id, sizeof id, "%s-%06zu", sname.c_str(), job.index);
    InstanceRecord rec;
    rec.id = id;
    rec.split = sname;
    rec.theta_deg = theta;
    rec.rt60_s = rt60;
    rec.snr_db = snr;
    rec.room_id = room.id;
    rec.head_id = head.id;
    rec.distance_m = distance;
    rec.noise_kind = noise_wavs.empty() ? std::string(to_string(kind)) : "wav";
    rec.mixture_path = sname + "/" + rec.id + ".mix.dpt";
    rec.direct_path = sname + "/" + rec.id + ".direct.dpt";
    rec.target_path = sname + "/" + rec.id + ".target.dpt";

    write_tensor(out_dir / rec.mixture_path, spectrogram_to_tensor(mix_spec));
    write_tensor(out_dir / rec.direct_path, spectrogram_to_tensor(direct_spec));
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(target.size())};
    for (double v : target.values()) t.data.push_back(static_cast<float>(v));
    write_tensor(out_dir / rec.target_path, t);
    return rec;
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      try {
        records[i] = run_one(plan[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = plan.size();
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(plan.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  write_manifest(out_dir / "manifest.jsonl", records);
  return {out_dir, std::move(records)};
}

void write_manifest(const fs::path& path, const std::vector<InstanceRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  for (const auto& r : records) out << r.to_json().dump() << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  Manifest m;
  m.root = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      m.records.push_back(InstanceRecord::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      fail(ErrorKind::kFormat,
           path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return m;
}

std::vector<Prediction> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("dprtf").get<std::vector<double>>()});
    } catch (const json::exception& e) {
      fail(ErrorKind::kFormat,
           path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_predictions(const fs::path& path, const std::vector<Prediction>& predictions) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    std::vector<double> v;
    v.reserve(p.dprtf.size());
    for (double x : p.dprtf) v.push_back(round9(x));
    j["dprtf"] = std::move(v);
    out << j.dump() << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

std::vector<Prediction> baseline_predictions(const Manifest& manifest,
                                             const StftConfig& config,
                                             const std::string& split,
                                             double vad_threshold_db,
                                             double max_iid_db) {
  std::vector<Prediction> out;
  for (const auto& rec : manifest.records) {
    if (!split.empty() && rec.split != split) continue;
    const Spectrogram spec = tensor_to_spectrogram(
        read_tensor(manifest.root / rec.mixture_path), config, true);
    const TfMask mask = vad_mask(spec, vad_threshold_db);
    const auto est = estimate_dprtf_cpsd(spec, &mask, max_iid_db);
    const auto v = est.vec.values();
    out.push_back({rec.id, std::vector<double>(v.begin(), v.end())});
  }
  return out;
}

nlohmann::ordered_json Evaluation::to_json() const {
  nlohmann::ordered_json j = overall.to_json();
  nlohmann::ordered_json s = nlohmann::ordered_json::array();
  for (const auto& r : strata) s.push_back(r.to_json());
  j["strata"] = std::move(s);
  return j;
}

Evaluation evaluate_predictions(const Manifest& manifest,
                                const std::vector<Prediction>& predictions,
                                const Dictionary& dict) {
  require(!predictions.empty(), ErrorKind::kValidation, "predictions file is empty");
  dict.validate();
  std::map<std::string, const InstanceRecord*> by_id;
  for (const auto& r : manifest.records) by_id.emplace(r.id, &r);

  using Key = std::tuple<double, double, double>;  // rt60, snr, distance
  std::map<Key, std::pair<std::vector<double>, std::vector<double>>> cells;
  std::vector<double> est_all, truth_all;
  std::set<std::string> seen;
  for (const auto& p : predictions) {
    auto it = by_id.find(p.id);
    require(it != by_id.end(), ErrorKind::kLookup,
            "prediction id '" + p.id + "' is not in the manifest");
    require(seen.insert(p.id).second, ErrorKind::kValidation,
            "duplicate prediction for '" + p.id + "'");
    require(p.dprtf.size() == 3 * dict.num_freqs, ErrorKind::kShape,
            "prediction '" + p.id + "' has " + std::to_string(p.dprtf.size()) +
                " values, expected " + std::to_string(3 * dict.num_freqs));
    const double est = match_doa(DpRtfVec(p.dprtf), dict);
    const InstanceRecord& rec = *it->second;
    est_all.push_back(est);
    truth_all.push_back(rec.theta_deg);
    auto& cell = cells[{rec.rt60_s, rec.snr_db, rec.distance_m}];
    cell.first.push_back(est);
    cell.second.push_back(rec.theta_deg);
  }

  Evaluation ev;
  ev.overall.acc = accuracy(est_all, truth_all);
  ev.overall.mae_deg = mae(est_all, truth_all);
  ev.overall.n_instances = est_all.size();
  ev.overall.condition["dictionary"] = dict.head_id;
  for (const auto& [key, cell] : cells) {
    MetricsReport r;
    r.acc = accuracy(cell.first, cell.second);
    r.mae_deg = mae(cell.first, cell.second);
    r.n_instances = cell.first.size();
    r.condition["rt60_s"] = std::get<0>(key);
    r.condition["snr_db"] = std::isfinite(std::get<1>(key))
                                ? nlohmann::ordered_json(std::get<1>(key))
                                : nlohmann::ordered_json(nullptr);
    r.condition["distance_m"] = std::get<2>(key);
    ev.strata.push_back(std::move(r));
  }
  return ev;
}

}  // namespace binloc
