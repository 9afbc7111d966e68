#pragma once

#include <string>
#include <vector>

#include "hdtsim/sim_engine.hpp"

namespace hdt {

/// Writes the records as CSV (34 fixed columns, >= 9 significant digits,
/// deterministic bytes). Throws std::runtime_error on an unwritable path.
void emit_csv(const std::vector<SampleRecord>& records, const std::string& path);

/// The fixed CSV header line (without trailing newline).
std::string csv_header();

/// Reads a two-column `t,f` profile (header line optional, strictly
/// increasing t, f in [45, 55] Hz).
FrequencyProfile read_frequency_csv(const std::string& path);

}  // namespace hdt
