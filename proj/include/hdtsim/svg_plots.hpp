#pragma once

#include <string>
#include <vector>

#include "hdtsim/sim_engine.hpp"

namespace hdt {

/// Writes one SVG per diagnostic panel (load-voltage d axis vs reference,
/// power factor, grid current dq0, DC-link voltage, active power vs command,
/// frequency) as <prefix><panel>.svg. Returns the written paths.
std::vector<std::string> emit_plots(const std::vector<SampleRecord>& records,
                                    const std::string& prefix);

}  // namespace hdt
