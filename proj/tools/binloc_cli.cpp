#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "binloc/datagen.hpp"
#include "binloc/dprtf.hpp"
#include "binloc/error.hpp"
#include "binloc/hrir.hpp"
#include "binloc/roomsim.hpp"
#include "binloc/tensor_io.hpp"

namespace fs = std::filesystem;
using binloc::ErrorKind;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  const CLI::App* cmd = nullptr;  // the subcommand being run
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file");
  cmd->add_option("--seed", c.seed, "Master seed (u64)");
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) binloc::fail(ErrorKind::kIo, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    binloc::fail(ErrorKind::kFormat, path + ": " + e.what());
  }
}

// Config keys fill in settings the command line left unset.
template <class T>
void from_config(const Common& c, const nlohmann::json& j, const char* key, const char* flag,
                 T& value) {
  if (j.contains(key) && c.cmd->count(flag) == 0) value = j.at(key).get<T>();
}

fs::path ensure_out(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) binloc::fail(ErrorKind::kIo, "cannot create " + out + ": " + ec.message());
  return out;
}

void write_json_file(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) binloc::fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) binloc::fail(ErrorKind::kIo, "write failed for " + path.string());
}

// --- gen-hrir ---------------------------------------------------------------

struct GenHrirArgs {
  double radius = 0.0875;
  std::string head_id;
  double grid_step = 5.0;
  std::size_t length = 200;
  double max_ild = 6.0;
  double fs = 16000.0;
};

int run_gen_hrir(const Common& c, GenHrirArgs a) {
  if (!c.config.empty()) {
    const auto j = read_json(c.config);
    from_config(c, j, "radius_m", "--radius", a.radius);
    from_config(c, j, "head_id", "--head-id", a.head_id);
    from_config(c, j, "grid_step_deg", "--grid-step", a.grid_step);
    from_config(c, j, "length", "--length", a.length);
    from_config(c, j, "max_ild_db", "--max-ild", a.max_ild);
    from_config(c, j, "sample_rate", "--fs", a.fs);
  }
  binloc::SphericalHeadParams p;
  p.radius_m = a.radius;
  p.head_id = a.head_id;
  p.length = a.length;
  p.max_ild_db = a.max_ild;
  p.sample_rate = a.fs;
  const auto set = binloc::synth_spherical_head(p, binloc::DoaGrid::full_circle(a.grid_step));
  const fs::path path = ensure_out(c.out) / (set.head_id() + ".hrs");
  binloc::save_hrir_set(path, set);
  std::cout << path.string() << '\n';
  return kExitOk;
}

// --- gen-data ---------------------------------------------------------------

struct GenDataArgs {
  std::optional<std::size_t> train, val, test;
  std::optional<double> duration;
};

int run_gen_data(const Common& c, const GenDataArgs& a) {
  binloc::GenConfig cfg =
      c.config.empty() ? binloc::default_gen_config() : binloc::load_gen_config(c.config);
  if (c.seed) cfg.master_seed = *c.seed;
  if (a.duration) cfg.duration_s = *a.duration;
  for (auto& [name, split] : cfg.splits) {
    if (name == "train" && a.train) split.count = *a.train;
    if (name == "val" && a.val) split.count = *a.val;
    if (name == "test" && a.test) split.count = *a.test;
  }
  // A zero override drops the split.
  std::erase_if(cfg.splits, [](const auto& s) { return s.second.count == 0; });
  const auto manifest = binloc::generate_dataset(cfg, ensure_out(c.out), c.jobs);
  std::cout << manifest.records.size() << " instances written to "
            << (manifest.root / "manifest.jsonl").string() << '\n';
  return kExitOk;
}

// --- build-dict / avg-dict --------------------------------------------------

struct BuildDictArgs {
  std::string hrir;
  double max_iid = binloc::kDefaultMaxIidDb;
  std::vector<double> grid;
};

int run_build_dict(const Common& c, const BuildDictArgs& a) {
  const auto set = binloc::load_hrir_set(a.hrir);
  binloc::StftConfig stft;
  stft.sample_rate = set.sample_rate();
  const binloc::DoaGrid grid =
      a.grid.empty() ? binloc::DoaGrid::standard() : binloc::DoaGrid(a.grid);
  auto dict = binloc::build_dictionary(set, grid, stft, a.max_iid);
  const fs::path path = ensure_out(c.out) / (dict.head_id + ".json");
  binloc::save_dictionary(path, dict);
  std::cout << path.string() << '\n';
  return kExitOk;
}

struct AvgDictArgs {
  std::vector<std::string> dicts;
  std::string name = "average";
};

int run_avg_dict(const Common& c, const AvgDictArgs& a) {
  std::vector<binloc::Dictionary> dicts;
  for (const auto& p : a.dicts) dicts.push_back(binloc::load_dictionary(p));
  const auto avg = binloc::average_dictionary(dicts);
  const fs::path path = ensure_out(c.out) / (a.name + ".json");
  binloc::save_dictionary(path, avg);
  std::cout << path.string() << '\n';
  return kExitOk;
}

// --- baseline / evaluate ----------------------------------------------------

struct BaselineArgs {
  std::string manifest;
  std::string split;
  double vad_threshold = binloc::kDefaultVadThresholdDb;
  double max_iid = binloc::kDefaultMaxIidDb;
};

int run_baseline(const Common& c, const BaselineArgs& a) {
  const auto manifest = binloc::read_manifest(a.manifest);
  const auto preds = binloc::baseline_predictions(manifest, binloc::StftConfig{}, a.split,
                                                  a.vad_threshold, a.max_iid);
  const fs::path path = ensure_out(c.out) / "predictions.jsonl";
  binloc::write_predictions(path, preds);
  std::cout << preds.size() << " predictions written to " << path.string() << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string manifest;
  std::string predictions;
  std::string dict;
};

int run_evaluate(const Common& c, const EvaluateArgs& a) {
  const auto manifest = binloc::read_manifest(a.manifest);
  const auto preds = binloc::read_predictions(a.predictions);
  const auto dict = binloc::load_dictionary(a.dict);
  const auto report = binloc::evaluate_predictions(manifest, preds, dict).to_json();
  write_json_file(ensure_out(c.out) / "report.json", report);
  std::cout << report.dump(2) << '\n';
  return kExitOk;
}

// --- simulate-brir ----------------------------------------------------------

struct SimulateArgs {
  std::vector<double> room{5.0, 7.0, 3.0};
  std::vector<double> center{2.5, 3.0, 1.5};
  double yaw = 0.0;
  double rt60 = 0.5;
  double azimuth = 0.0;
  double distance = 1.5;
  std::string hrir;
  double radius = 0.0875;
  int max_order = -1;
};

std::array<double, 3> triple(const std::vector<double>& v, const char* what) {
  binloc::require(v.size() == 3, ErrorKind::kValidation, std::string(what) + " needs 3 values");
  return {v[0], v[1], v[2]};
}

binloc::Tensor pair_tensor(const std::array<binloc::Signal, 2>& sig) {
  binloc::Tensor t;
  t.dims = {2, static_cast<std::uint32_t>(sig[0].size())};
  for (const auto& ch : sig)
    for (double v : ch) t.data.push_back(static_cast<float>(v));
  return t;
}

int run_simulate(const Common& c, SimulateArgs a) {
  if (!c.config.empty()) {
    const auto j = read_json(c.config);
    from_config(c, j, "dimensions", "--room", a.room);
    from_config(c, j, "array_center", "--center", a.center);
    from_config(c, j, "array_yaw_deg", "--yaw", a.yaw);
    from_config(c, j, "rt60_s", "--rt60", a.rt60);
    from_config(c, j, "azimuth_deg", "--azimuth", a.azimuth);
    from_config(c, j, "distance_m", "--distance", a.distance);
    from_config(c, j, "radius_m", "--radius", a.radius);
    from_config(c, j, "max_order", "--max-order", a.max_order);
    if (j.contains("hrir") && c.cmd->count("--hrir") == 0)
      a.hrir = (fs::path(c.config).parent_path() / j.at("hrir").get<std::string>()).string();
  }
  binloc::RoomConfig room;
  room.dimensions = triple(a.room, "--room");
  room.array_center = triple(a.center, "--center");
  room.array_yaw_deg = a.yaw;
  room.rt60 = a.rt60;
  binloc::HrirSet set;
  if (!a.hrir.empty()) {
    set = binloc::load_hrir_set(a.hrir);
  } else {
    binloc::SphericalHeadParams p;
    p.radius_m = a.radius;
    set = binloc::synth_spherical_head(p, binloc::DoaGrid::full_circle(5.0));
  }
  binloc::BrirOptions opt;
  opt.max_order = a.max_order;
  const auto brir = binloc::simulate_brir(room, a.azimuth, a.distance, set, opt);
  const fs::path out = ensure_out(c.out);
  binloc::write_tensor(out / "brir.dpt", pair_tensor(brir.taps));
  binloc::write_tensor(out / "brir_direct.dpt", pair_tensor(brir.direct));
  const auto refl = binloc::rt60_to_reflectivity(room);
  nlohmann::ordered_json j;
  j["sample_rate"] = set.sample_rate();
  j["length"] = brir.length();
  j["direct_length"] = brir.direct_len();
  j["alpha"] = refl.alpha;
  j["beta"] = refl.beta;
  j["head_id"] = set.head_id();
  write_json_file(out / "brir.json", j);
  std::cout << (out / "brir.dpt").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binaural DOA dataset, dictionary and evaluation tool"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;

  GenHrirArgs hrir_args;
  auto* gen_hrir = app.add_subcommand("gen-hrir", "Synthesize a spherical-head HRIR set (HRS1)");
  add_common(gen_hrir, common);
  gen_hrir->add_option("--radius", hrir_args.radius, "Head radius in m");
  gen_hrir->add_option("--head-id", hrir_args.head_id, "Head identifier");
  gen_hrir->add_option("--grid-step", hrir_args.grid_step, "Azimuth step of the full-circle grid");
  gen_hrir->add_option("--length", hrir_args.length, "Taps per ear");
  gen_hrir->add_option("--max-ild", hrir_args.max_ild, "Peak level difference per ear in dB");
  gen_hrir->add_option("--fs", hrir_args.fs, "Sample rate in Hz");

  GenDataArgs data_args;
  auto* gen_data = app.add_subcommand("gen-data", "Generate a dataset and its manifest");
  add_common(gen_data, common);
  gen_data->add_option("--train", data_args.train, "Override train count (0 drops the split)");
  gen_data->add_option("--val", data_args.val, "Override val count");
  gen_data->add_option("--test", data_args.test, "Override test count");
  gen_data->add_option("--duration", data_args.duration, "Instance duration in s");

  BuildDictArgs dict_args;
  auto* build_dict = app.add_subcommand("build-dict", "Build a DP-RTF dictionary from an HRS1 file");
  add_common(build_dict, common);
  build_dict->add_option("--hrir", dict_args.hrir, "HRS1 file")->required();
  build_dict->add_option("--max-iid", dict_args.max_iid, "IID normalization in dB");
  build_dict->add_option("--grid", dict_args.grid, "Azimuths in degrees (default: 25-direction grid)");

  AvgDictArgs avg_args;
  auto* avg_dict = app.add_subcommand("avg-dict", "Average dictionaries of several heads");
  add_common(avg_dict, common);
  avg_dict->add_option("--dict", avg_args.dicts, "Dictionary JSON files")->required();
  avg_dict->add_option("--name", avg_args.name, "Output file stem");

  BaselineArgs base_args;
  auto* baseline = app.add_subcommand("baseline", "Cross-PSD DP-RTF predictions for a manifest");
  add_common(baseline, common);
  baseline->add_option("--manifest", base_args.manifest, "manifest.jsonl")->required();
  baseline->add_option("--split", base_args.split, "Restrict to one split");
  baseline->add_option("--vad-threshold", base_args.vad_threshold, "VAD range below the peak in dB");
  baseline->add_option("--max-iid", base_args.max_iid, "IID normalization in dB");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Score a predictions file against a manifest");
  add_common(evaluate, common);
  evaluate->add_option("--manifest", eval_args.manifest, "manifest.jsonl")->required();
  evaluate->add_option("--predictions", eval_args.predictions, "predictions.jsonl")->required();
  evaluate->add_option("--dict", eval_args.dict, "Dictionary JSON")->required();

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate-brir", "Simulate one binaural room impulse response");
  add_common(simulate, common);
  simulate->add_option("--room", sim_args.room, "Room dimensions L W H in m")->expected(3);
  simulate->add_option("--center", sim_args.center, "Array center x y z in m")->expected(3);
  simulate->add_option("--yaw", sim_args.yaw, "Array yaw in degrees");
  simulate->add_option("--rt60", sim_args.rt60, "Reverberation time in s (0 = anechoic)");
  simulate->add_option("--azimuth", sim_args.azimuth, "Source azimuth in degrees");
  simulate->add_option("--distance", sim_args.distance, "Source distance in m");
  simulate->add_option("--hrir", sim_args.hrir, "HRS1 file (default: spherical head)");
  simulate->add_option("--radius", sim_args.radius, "Spherical head radius in m");
  simulate->add_option("--max-order", sim_args.max_order, "Reflection order cap (-1 = none)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  common.cmd = app.get_subcommands().front();
  try {
    if (*gen_hrir) return run_gen_hrir(common, hrir_args);
    if (*gen_data) return run_gen_data(common, data_args);
    if (*build_dict) return run_build_dict(common, dict_args);
    if (*avg_dict) return run_avg_dict(common, avg_args);
    if (*baseline) return run_baseline(common, base_args);
    if (*evaluate) return run_evaluate(common, eval_args);
    if (*simulate) return run_simulate(common, sim_args);
  } catch (const binloc::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", binloc::to_string(e.kind()), e.what());
    return e.is_io() ? kExitIo : kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error (io): %s\n", e.what());
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error (validation): %s\n", e.what());
    return kExitValidation;
  }
  return kExitValidation;
}
