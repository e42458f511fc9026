#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "binloc/fft.hpp"
#include "binloc/hrir.hpp"
#include "binloc/signals.hpp"

namespace binloc {

inline constexpr double kDefaultMaxIidDb = 20.0;

// Real-valued direct-path RTF feature of length 3F, laid out as
// [IID(1..F), sin IPD(1..F), cos IPD(1..F)], IID normalized by the maximum
// IID and clipped to [-1, 1].
class DpRtfVec {
 public:
  DpRtfVec() = default;
  explicit DpRtfVec(std::vector<double> values);  // size must be a multiple of 3

  std::size_t num_freqs() const { return values_.size() / 3; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double iid(std::size_t f) const { return values_[f]; }
  double sin_ipd(std::size_t f) const { return values_[num_freqs() + f]; }
  double cos_ipd(std::size_t f) const { return values_[2 * num_freqs() + f]; }

  double squared_distance(const DpRtfVec& other) const;
  bool operator==(const DpRtfVec&) const = default;

 private:
  std::vector<double> values_;
};

struct Dictionary {
  DoaGrid grid;
  std::vector<DpRtfVec> entries;  // parallel to grid.azimuths()
  std::size_t num_freqs = 0;
  double sample_rate = 0.0;
  double max_iid_db = kDefaultMaxIidDb;
  std::string head_id;

  const DpRtfVec& entry(double azimuth_deg) const;
  // Checks one entry per direction and a common F.
  void validate() const;
};

// Elementwise h2 / h1.
std::vector<Complex> dprtf_complex(std::span<const Complex> h1,
                                   std::span<const Complex> h2);

DpRtfVec encode_real(std::span<const Complex> rtf,
                     double max_iid_db = kDefaultMaxIidDb);

Dictionary build_dictionary(const HrirSet& hrir, const DoaGrid& grid,
                            const StftConfig& config,
                            double max_iid_db = kDefaultMaxIidDb);

// Elementwise mean over dictionaries that share a grid and F; the head id of
// the result joins the inputs' ids with '+'.
Dictionary average_dictionary(std::span<const Dictionary> dicts);

// argmin over grid directions of the squared distance; ties resolve to the
// smaller azimuth.
double match_doa(const DpRtfVec& pred, const Dictionary& dict);

void save_dictionary(const std::filesystem::path& path, const Dictionary& dict);
Dictionary load_dictionary(const std::filesystem::path& path);

// Azimuth rendered the way dictionary keys are written ("30", "-7.5").
std::string azimuth_key(double azimuth_deg);

}  // namespace binloc
