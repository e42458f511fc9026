#include "binloc/dprtf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "binloc/error.hpp"

namespace binloc {
namespace {

constexpr double kMinTfMagnitude = 1e-12;

// Round to 9 significant digits; the JSON writer then emits the shortest form.
double round9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

DpRtfVec::DpRtfVec(std::vector<double> values) : values_(std::move(values)) {
  require(values_.size() % 3 == 0, ErrorKind::kShape,
          "DP-RTF vector length " + std::to_string(values_.size()) +
              " is not a multiple of 3");
}

double DpRtfVec::squared_distance(const DpRtfVec& other) const {
  require(size() == other.size(), ErrorKind::kShape,
          "DP-RTF vector lengths differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double d = values_[i] - other.values_[i];
    acc += d * d;
  }
  return acc;
}

const DpRtfVec& Dictionary::entry(double azimuth_deg) const {
  const auto& az = grid.azimuths();
  auto it = std::find(az.begin(), az.end(), azimuth_deg);
  if (it == az.end())
    fail(ErrorKind::kLookup,
         "azimuth " + azimuth_key(azimuth_deg) + " not in dictionary");
  return entries[static_cast<std::size_t>(it - az.begin())];
}

void Dictionary::validate() const {
  require(entries.size() == grid.size(), ErrorKind::kValidation,
          "dictionary needs exactly one entry per grid direction");
  for (const auto& e : entries)
    require(e.num_freqs() == num_freqs, ErrorKind::kShape,
            "dictionary entries disagree on F");
}

std::vector<Complex> dprtf_complex(std::span<const Complex> h1,
                                   std::span<const Complex> h2) {
  require(h1.size() == h2.size(), ErrorKind::kShape,
          "transfer functions differ in length");
  std::vector<Complex> r(h1.size());
  for (std::size_t f = 0; f < h1.size(); ++f) {
    require(std::abs(h1[f]) >= kMinTfMagnitude, ErrorKind::kDegenerate,
            "reference transfer function vanishes at bin " + std::to_string(f));
    r[f] = h2[f] / h1[f];
  }
  return r;
}

DpRtfVec encode_real(std::span<const Complex> rtf, double max_iid_db) {
  require(max_iid_db > 0.0, ErrorKind::kValidation, "max IID must be > 0");
  const std::size_t F = rtf.size();
  std::vector<double> v(3 * F);
  for (std::size_t f = 0; f < F; ++f) {
    const double mag = std::abs(rtf[f]);
    require(std::isfinite(mag), ErrorKind::kValidation, "non-finite DP-RTF");
    require(mag > 0.0, ErrorKind::kDegenerate,
            "zero DP-RTF at bin " + std::to_string(f));
    v[f] = std::clamp(20.0 * std::log10(mag) / max_iid_db, -1.0, 1.0);
    // sin/cos of the argument without an explicit atan2 round trip.
    v[F + f] = rtf[f].imag() / mag;
    v[2 * F + f] = rtf[f].real() / mag;
  }
  return DpRtfVec(std::move(v));
}

Dictionary build_dictionary(const HrirSet& hrir, const DoaGrid& grid,
                            const StftConfig& config, double max_iid_db) {
  require(!grid.empty(), ErrorKind::kValidation, "grid is empty");
  Dictionary d;
  d.grid = grid;
  d.num_freqs = config.band_size();
  d.sample_rate = config.sample_rate;
  d.max_iid_db = max_iid_db;
  d.head_id = hrir.head_id();
  d.entries.reserve(grid.size());
  for (double az : grid.azimuths()) {
    const auto tf = direct_path_tf(hrir, az, config);
    d.entries.push_back(encode_real(dprtf_complex(tf[0], tf[1]), max_iid_db));
  }
  return d;
}

Dictionary average_dictionary(std::span<const Dictionary> dicts) {
  require(!dicts.empty(), ErrorKind::kValidation, "no dictionaries to average");
  Dictionary out = dicts.front();
  out.validate();
  std::string ids = dicts.front().head_id;
  for (std::size_t i = 1; i < dicts.size(); ++i) {
    const Dictionary& d = dicts[i];
    d.validate();
    require(d.grid == out.grid, ErrorKind::kValidation,
            "cannot average dictionaries over different grids");
    require(d.num_freqs == out.num_freqs, ErrorKind::kShape,
            "cannot average dictionaries with different F");
    for (std::size_t e = 0; e < out.entries.size(); ++e) {
      auto acc = out.entries[e].values();
      auto add = d.entries[e].values();
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += add[k];
    }
    ids += "+" + d.head_id;
  }
  const double n = static_cast<double>(dicts.size());
  if (dicts.size() > 1)
    for (auto& e : out.entries)
      for (double& v : e.values()) v /= n;
  out.head_id = ids;
  return out;
}

double match_doa(const DpRtfVec& pred, const Dictionary& dict) {
  require(!dict.entries.empty(), ErrorKind::kValidation, "dictionary is empty");
  require(pred.size() == 3 * dict.num_freqs, ErrorKind::kShape,
          "prediction has " + std::to_string(pred.size()) + " values, dictionary expects " +
              std::to_string(3 * dict.num_freqs));
  // Grid azimuths are strictly increasing, so keeping the first minimum is the
  // smaller-azimuth tie-break.
  std::size_t best = 0;
  double best_dist = pred.squared_distance(dict.entries[0]);
  for (std::size_t i = 1; i < dict.entries.size(); ++i) {
    const double d = pred.squared_distance(dict.entries[i]);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return dict.grid.azimuths()[best];
}

std::string azimuth_key(double azimuth_deg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", azimuth_deg);
  return buf;
}

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict) {
  dict.validate();
  nlohmann::ordered_json j;
  j["fs"] = dict.sample_rate;
  j["F"] = dict.num_freqs;
  j["delta_i_max"] = dict.max_iid_db;
  j["head_id"] = dict.head_id;
  j["grid_deg"] = dict.grid.azimuths();
  nlohmann::ordered_json entries = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < dict.grid.size(); ++i) {
    std::vector<double> v;
    v.reserve(dict.entries[i].size());
    for (double x : dict.entries[i].values()) v.push_back(round9(x));
    entries[azimuth_key(dict.grid.azimuths()[i])] = std::move(v);
  }
  j["entries"] = std::move(entries);
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << j.dump() << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    Dictionary d;
    d.sample_rate = j.at("fs").get<double>();
    d.num_freqs = j.at("F").get<std::size_t>();
    d.max_iid_db = j.at("delta_i_max").get<double>();
    d.head_id = j.at("head_id").get<std::string>();
    d.grid = DoaGrid(j.at("grid_deg").get<std::vector<double>>());
    const auto& entries = j.at("entries");
    for (double az : d.grid.azimuths()) {
      const std::string key = azimuth_key(az);
      require(entries.contains(key), ErrorKind::kFormat,
              "dictionary has no entry for azimuth " + key);
      auto v = entries.at(key).get<std::vector<double>>();
      require(v.size() == 3 * d.num_freqs, ErrorKind::kFormat,
              "dictionary entry " + key + " has wrong length");
      d.entries.emplace_back(std::move(v));
    }
    require(entries.size() == d.grid.size(), ErrorKind::kFormat,
            "dictionary has entries outside its grid");
    return d;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

}  // namespace binloc
