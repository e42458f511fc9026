#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "binloc/signals.hpp"

namespace binloc {

// Dense row-major float32 tensor as stored in DPT1 files.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

// "DPT1" | u8 dtype (0 = f32le) | u8 ndim | ndim x u32le dims | f32le payload.
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& path);

// channels x frames x bins x 2 (re, im).
Tensor spectrogram_to_tensor(const Spectrogram& spec);
// Inverse of the above for band-selected spectrograms of the given config.
Spectrogram tensor_to_spectrogram(const Tensor& tensor, const StftConfig& config,
                                  bool band_selected);

}  // namespace binloc
