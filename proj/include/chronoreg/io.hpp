#pragma once

#include "chronoreg/grid.hpp"

#include <filesystem>

namespace chronoreg {

// Binary container: the raw values in layout order (t, x_1..x_d, component),
// each value as two little-endian IEEE-754 float64 (re, im), no header.
// The sidecar `<stem>.json` next to the binary carries the grid metadata.

std::filesystem::path sidecar_path(const std::filesystem::path& bin_path);

void save_grid_function(const GridFunction& f, const std::filesystem::path& bin_path);
GridFunction load_grid_function(const std::filesystem::path& bin_path);

}  // namespace chronoreg
