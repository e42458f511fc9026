#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "binloc/datagen.hpp"
#include "binloc/error.hpp"
#include "binloc/rng.hpp"
#include "binloc/tensor_io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace binloc;
namespace fs = std::filesystem;

namespace {

template <class F>
ErrorKind kind_of(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no binloc::Error thrown";
  return ErrorKind::kIo;
}

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put_bytes(const fs::path& p, const std::vector<char>& b) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

class TempDir {
 public:
  TempDir() : path_(oracle::temp_dir("datagen")) {}
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TEST(TensorFile, RoundTripIsBitExact) {
  TempDir dir;
  Rng rng(1);
  Tensor t;
  t.dims = {2, 31, 128, 2};
  t.data.resize(t.element_count());
  for (float& v : t.data) v = static_cast<float>(rng.gaussian());
  write_tensor(dir.path() / "t.dpt", t);
  EXPECT_EQ(read_tensor(dir.path() / "t.dpt"), t);
  const auto bytes = file_bytes(dir.path() / "t.dpt");
  ASSERT_EQ(bytes.size(), 4u + 1 + 1 + 4 * 4 + t.data.size() * 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DPT1");
  EXPECT_EQ(bytes[4], 0);
  EXPECT_EQ(bytes[5], 4);
  EXPECT_EQ(static_cast<unsigned char>(bytes[10]), 31u);  // dims[1] little-endian
}

TEST(TensorFile, CorruptFilesAreRejected) {
  TempDir dir;
  Tensor t{{3, 2}, {1, 2, 3, 4, 5, 6}};
  write_tensor(dir.path() / "t.dpt", t);
  auto bytes = file_bytes(dir.path() / "t.dpt");

  auto magic = bytes;
  magic[3] = '2';
  put_bytes(dir.path() / "m.dpt", magic);
  EXPECT_EQ(kind_of([&] { read_tensor(dir.path() / "m.dpt"); }), ErrorKind::kFormat);

  auto dims = bytes;
  dims[6] = 4;  // 4 x 2 declared, 6 floats present
  put_bytes(dir.path() / "d.dpt", dims);
  EXPECT_EQ(kind_of([&] { read_tensor(dir.path() / "d.dpt"); }), ErrorKind::kLength);

  auto dtype = bytes;
  dtype[4] = 7;
  put_bytes(dir.path() / "x.dpt", dtype);
  EXPECT_EQ(kind_of([&] { read_tensor(dir.path() / "x.dpt"); }), ErrorKind::kFormat);

  EXPECT_EQ(kind_of([&] { read_tensor(dir.path() / "none.dpt"); }), ErrorKind::kIo);
  Tensor bad{{4}, {1, 2, 3}};
  EXPECT_EQ(kind_of([&] { write_tensor(dir.path() / "b.dpt", bad); }), ErrorKind::kShape);
}

TEST(TensorFile, SpectrogramLayout) {
  Spectrogram s(2, 3, 128, StftConfig{}, true);
  s.at(1, 2, 5) = Complex(0.25, -0.5);
  const auto t = spectrogram_to_tensor(s);
  EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{2, 3, 128, 2}));
  const std::size_t idx = (((1 * 3) + 2) * 128 + 5) * 2;
  EXPECT_EQ(t.data[idx], 0.25f);
  EXPECT_EQ(t.data[idx + 1], -0.5f);
  const auto back = tensor_to_spectrogram(t, StftConfig{}, true);
  EXPECT_EQ(back.at(1, 2, 5), Complex(0.25, -0.5));
  EXPECT_EQ(kind_of([&] { tensor_to_spectrogram(t, StftConfig{}, false); }), ErrorKind::kShape);
}

TEST(GenConfig, DefaultConfigIsValid) {
  const auto cfg = default_gen_config();
  EXPECT_NO_THROW(cfg.validate());
  std::size_t rooms = 0;
  for (const auto& [name, split] : cfg.splits) rooms += split.rooms.size();
  EXPECT_EQ(rooms, 15u);
  EXPECT_EQ(cfg.frames_per_instance(), 31u);
  EXPECT_EQ(cfg.samples_per_instance(), 8192u);
  for (const auto& [name, split] : cfg.splits)
    for (const auto& room : split.rooms)
      for (const auto& c : room.conditions)
        for (double s : c.snr_db) EXPECT_TRUE(s >= -5.0 && s <= 20.0);
}

TEST(GenConfig, OverlappingHeadsAreRejected) {
  auto cfg = fixture::small_config(2, 1, 1, {0.0}, {20.0});
  cfg.splits[2].second.heads[0].id = "head-a";
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kValidation);
}

TEST(GenConfig, OtherValidationErrors) {
  auto cfg = fixture::small_config(0, 0, 1, {0.0}, {20.0});
  cfg.splits[0].second.count = 0;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kValidation);
  cfg = fixture::small_config(0, 0, 1, {0.01}, {20.0});
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kInfeasible);
  cfg = fixture::small_config(0, 0, 1, {0.3}, {20.0});
  cfg.splits[0].second.rooms[0].distances_m = {10.0};
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kValidation);
}

TEST(GenConfig, AutoYawKeepsSourcesInside) {
  RoomSpec r;
  r.id = "narrow";
  r.dimensions = {4.0, 8.0, 3.0};
  r.array_center = {3.0, 4.0, 1.5};
  r.distances_m = {1.5};
  // Frontal sources pass the x = 4 wall when looking along +x, lateral ones
  // when looking along +y; looking along -x keeps everything inside.
  EXPECT_EQ(resolve_array_yaw(r, DoaGrid::standard()), 180.0);
  r.array_yaw_deg = 0.0;
  EXPECT_EQ(kind_of([&] { resolve_array_yaw(r, DoaGrid::standard()); }),
            ErrorKind::kValidation);
}

TEST(GenConfig, JsonParsingWithRanges) {
  const auto j = nlohmann::json::parse(R"({
    "master_seed": 5, "duration_s": 1.0, "noise_kinds": ["white"],
    "splits": {"test": {"count": 3, "heads": [{"id": "h", "radius_m": 0.09}],
      "rooms": [{"id": "r", "dimensions": [5,7,3], "array_center": [2.5,3.5,1.5],
                 "distances_m": [1.0],
                 "conditions": [{"rt60_s": {"start": 0.2, "step": 0.2, "end": 0.8},
                                 "snr_db": [null, "inf", 5]}]}]}}})");
  const auto cfg = gen_config_from_json(j);
  EXPECT_EQ(cfg.master_seed, 5u);
  EXPECT_EQ(cfg.frames_per_instance(), 62u);
  ASSERT_EQ(cfg.splits.size(), 1u);
  const auto& cond = cfg.splits[0].second.rooms[0].conditions[0];
  ASSERT_EQ(cond.rt60_s.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(cond.rt60_s[i], 0.2 * (i + 1), 1e-9);
  EXPECT_TRUE(std::isinf(cond.snr_db[0]));
  EXPECT_TRUE(std::isinf(cond.snr_db[1]));
  EXPECT_EQ(cond.snr_db[2], 5.0);
  EXPECT_EQ(kind_of([] { gen_config_from_json(nlohmann::json::parse(R"({"splits": {"test": {}}})")); }),
            ErrorKind::kValidation);
}

TEST(SpeechLike, UnitPowerDeterministicAndGated) {
  const auto a = synth_speech_like(8000, 16000, 3);
  const auto b = synth_speech_like(8000, 16000, 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, synth_speech_like(8000, 16000, 4));
  double p = 0.0;
  for (double v : a) p += v * v;
  EXPECT_NEAR(p / 8000, 1.0, 1e-9);
  // Envelope produces quiet 10 ms blocks far below the loud ones.
  double lo = INFINITY, hi = 0.0;
  for (std::size_t blk = 0; blk + 160 <= a.size(); blk += 160) {
    double e = 0.0;
    for (std::size_t i = blk; i < blk + 160; ++i) e += a[i] * a[i];
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  EXPECT_LT(lo, hi * 1e-2);
}

TEST(Wav, RoundTrip) {
  TempDir dir;
  const auto x = synth_speech_like(1000, 16000, 1);
  write_wav(dir.path() / "a.wav", x, 16000);
  double fs = 0;
  const auto y = read_wav(dir.path() / "a.wav", &fs);
  EXPECT_EQ(fs, 16000);
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(y[i], static_cast<float>(x[i]));
  put_bytes(dir.path() / "b.wav", {'R', 'I', 'F', 'X'});
  EXPECT_EQ(kind_of([&] { read_wav(dir.path() / "b.wav"); }), ErrorKind::kFormat);
}

TEST(GenerateDataset, ManifestCountsSplitsAndTargets) {
  TempDir dir;
  const auto cfg = fixture::small_config(8, 2, 4, {0.0, 0.3}, {5.0, 20.0});
  const auto m = generate_dataset(cfg, dir.path(), 2);
  ASSERT_EQ(m.records.size(), 14u);
  const auto back = read_manifest(dir.path() / "manifest.jsonl");
  ASSERT_EQ(back.records.size(), 14u);
  std::map<std::string, int> per_split;
  for (const auto& r : back.records) {
    ++per_split[r.split];
    EXPECT_EQ(r.id.rfind(r.split + "-", 0), 0u);
    EXPECT_TRUE(DoaGrid::standard().contains(r.theta_deg));
    EXPECT_TRUE(r.snr_db == 5.0 || r.snr_db == 20.0);
    const auto mix = read_tensor(dir.path() / r.mixture_path);
    EXPECT_EQ(mix.dims, (std::vector<std::uint32_t>{2, 31, 128, 2}));
    EXPECT_EQ(read_tensor(dir.path() / r.direct_path).dims, mix.dims);
    const auto target = read_tensor(dir.path() / r.target_path);
    ASSERT_EQ(target.dims, (std::vector<std::uint32_t>{384}));
    for (std::size_t f = 0; f < 128; ++f) {
      EXPECT_LE(std::abs(target.data[f]), 1.0f);
      const double s = target.data[128 + f], c = target.data[256 + f];
      EXPECT_NEAR(s * s + c * c, 1.0, 1e-6);
    }
  }
  EXPECT_EQ(per_split["train"], 8);
  EXPECT_EQ(per_split["val"], 2);
  EXPECT_EQ(per_split["test"], 4);
  EXPECT_TRUE(fs::exists(dir.path() / "heads" / "head-c.hrs"));
  EXPECT_TRUE(fs::exists(dir.path() / "dictionaries" / "head-c.json"));
}

TEST(GenerateDataset, IdenticalBytesForAnyJobCount) {
  TempDir a, b;
  const auto cfg = fixture::small_config(3, 1, 2, {0.0, 0.4}, {0.0, 10.0});
  generate_dataset(cfg, a.path(), 1);
  generate_dataset(cfg, b.path(), 3);
  const auto ha = oracle::hash_tree(a.path()), hb = oracle::hash_tree(b.path());
  EXPECT_EQ(ha.size(), 3u + 3u + 6u * 3u + 1u);  // heads, dicts, tensors, manifest
  EXPECT_EQ(ha, hb);
}

TEST(GenerateDataset, SeedChangesTheData) {
  TempDir a, b;
  generate_dataset(fixture::small_config(0, 0, 2, {0.3}, {10.0}, 1), a.path(), 1);
  generate_dataset(fixture::small_config(0, 0, 2, {0.3}, {10.0}, 2), b.path(), 1);
  EXPECT_NE(oracle::sha256_file(a.path() / "test" / "test-000000.mix.dpt"),
            oracle::sha256_file(b.path() / "test" / "test-000000.mix.dpt"));
}

TEST(GenerateDataset, WavHooks) {
  TempDir dir;
  fs::create_directories(dir.path() / "src");
  fs::create_directories(dir.path() / "noise");
  write_wav(dir.path() / "src" / "a.wav", synth_speech_like(20000, 16000, 1), 16000);
  write_wav(dir.path() / "noise" / "n.wav", synth_speech_like(40000, 16000, 2), 16000);
  auto cfg = fixture::small_config(0, 0, 2, {0.2}, {10.0});
  cfg.source_wav_dir = dir.path() / "src";
  cfg.noise_wav_dir = dir.path() / "noise";
  const auto m = generate_dataset(cfg, dir.path() / "out", 1);
  EXPECT_EQ(m.records.size(), 2u);
  EXPECT_EQ(m.records[0].noise_kind, "wav");
}

TEST(Evaluate, GroundTruthGivesPerfectScores) {
  TempDir dir;
  const auto m = generate_dataset(fixture::small_config(0, 0, 6, {0.3, 0.6}, {0.0, 10.0}),
                                  dir.path(), 1);
  std::vector<Prediction> preds;
  for (const auto& r : m.records) {
    const auto t = read_tensor(dir.path() / r.target_path);
    preds.push_back({r.id, std::vector<double>(t.data.begin(), t.data.end())});
  }
  write_predictions(dir.path() / "p.jsonl", preds);
  const auto dict = load_dictionary(dir.path() / "dictionaries" / "head-c.json");
  const auto ev = evaluate_predictions(m, read_predictions(dir.path() / "p.jsonl"), dict);
  EXPECT_EQ(*ev.overall.acc, 1.0);
  EXPECT_EQ(*ev.overall.mae_deg, 0.0);
  EXPECT_EQ(ev.overall.n_instances, 6u);
  std::size_t total = 0;
  for (const auto& s : ev.strata) total += s.n_instances;
  EXPECT_EQ(total, 6u);
  const auto j = ev.to_json();
  EXPECT_EQ(j["acc"], 1.0);
  EXPECT_TRUE(j["strata"].is_array());
}

TEST(Evaluate, CleanBaselineIsPerfect) {
  TempDir dir;
  const auto m = generate_dataset(fixture::small_config(0, 0, 10, {0.0}, {kInfiniteSnr}),
                                  dir.path(), 1);
  const auto preds = baseline_predictions(m, StftConfig{});
  const auto dict = load_dictionary(dir.path() / "dictionaries" / "head-c.json");
  const auto ev = evaluate_predictions(m, preds, dict);
  EXPECT_EQ(*ev.overall.acc, 1.0);
  EXPECT_EQ(*ev.overall.mae_deg, 0.0);
}

TEST(Evaluate, Errors) {
  TempDir dir;
  const auto m = generate_dataset(fixture::small_config(0, 0, 2, {0.0}, {20.0}), dir.path(), 1);
  const auto dict = load_dictionary(dir.path() / "dictionaries" / "head-c.json");
  EXPECT_EQ(kind_of([&] { evaluate_predictions(m, {}, dict); }), ErrorKind::kValidation);
  const std::vector<double> ok(384, 0.0);
  EXPECT_EQ(kind_of([&] { evaluate_predictions(m, {{"nope", ok}}, dict); }), ErrorKind::kLookup);
  EXPECT_EQ(kind_of([&] {
              evaluate_predictions(m, {{m.records[0].id, std::vector<double>(383)}}, dict);
            }),
            ErrorKind::kShape);
  EXPECT_EQ(kind_of([&] {
              evaluate_predictions(m, {{m.records[0].id, ok}, {m.records[0].id, ok}}, dict);
            }),
            ErrorKind::kValidation);
  { std::ofstream(dir.path() / "empty.jsonl"); }
  EXPECT_EQ(kind_of([&] {
              evaluate_predictions(m, read_predictions(dir.path() / "empty.jsonl"), dict);
            }),
            ErrorKind::kValidation);
  { std::ofstream(dir.path() / "bad.jsonl") << "{\"id\": 3}\n"; }
  EXPECT_EQ(kind_of([&] { read_predictions(dir.path() / "bad.jsonl"); }), ErrorKind::kFormat);
}

TEST(Manifest, RecordJsonRoundTrip) {
  InstanceRecord r;
  r.id = "test-000001";
  r.split = "test";
  r.theta_deg = -55;
  r.rt60_s = 0.6;
  r.snr_db = kInfiniteSnr;
  r.room_id = "room";
  r.head_id = "h";
  r.distance_m = 1.5;
  r.noise_kind = "white";
  r.mixture_path = "test/a.mix.dpt";
  r.direct_path = "test/a.direct.dpt";
  r.target_path = "test/a.target.dpt";
  const auto j = r.to_json();
  EXPECT_TRUE(j["snr_db"].is_null());
  const auto back = InstanceRecord::from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.id, r.id);
  EXPECT_TRUE(std::isinf(back.snr_db));
  EXPECT_EQ(back.theta_deg, -55);
  EXPECT_EQ(back.target_path, r.target_path);
}
