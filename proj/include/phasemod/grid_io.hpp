#pragma once

#include <string>

#include "phasemod/experiments.hpp"

namespace phasemod {

// Writes the grid as CSV with '#'-prefixed key=value metadata lines, rows
// x,y,z at full double precision. The summary goes to a sibling
// "<stem>.summary.csv" with columns x,value,uncertainty,flag,analytic.
// An empty grid produces a header-only file.
void write_grid(const SweepGrid& grid, const std::string& path);

// Reads a grid written by write_grid (summary sibling included when present).
// Round-trips bit exactly.
SweepGrid read_grid(const std::string& path);

// FNV-1a 64-bit over a string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

} // namespace phasemod
