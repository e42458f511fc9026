#pragma once

#include <cstddef>
#include <vector>

#include "binloc/datagen.hpp"

namespace fixture {

// Three-split config in the 5 x 7 x 3 m room with one spherical head per
// split and a single distance.
binloc::GenConfig small_config(std::size_t train, std::size_t val, std::size_t test,
                               std::vector<double> rt60_s, std::vector<double> snr_db,
                               std::uint64_t seed = 1);

}  // namespace fixture
