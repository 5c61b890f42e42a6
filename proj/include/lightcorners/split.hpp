#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lightcorners/geometry.hpp"

namespace lightcorners {

struct SplitResult {
  std::vector<std::size_t> train;  // indices into the input, ascending
  std::vector<std::size_t> test;
  std::vector<std::string> warnings;
};

// Deterministic shuffle-and-split, stratified by light type. Per-type test
// counts are apportioned by largest remainder so the total test count is
// round((1 - train_fraction) * N) over the stratifiable types. A type with
// fewer than two records goes entirely to train, with a warning.
SplitResult split(const std::vector<LightAnnotation>& annotations, double train_fraction, std::uint64_t seed);

}  // namespace lightcorners
