#pragma once

// JSON encoding of operators: {"dim": d, "entries": [[[re, im], ...], ...]},
// and of pulse sequences as {"repeat": n, "events": [...]} where each event is
// {"type": "pulse" | "delay" | "zrot", "phase_deg", "flip_deg", "duration_us", "target"}.

#include <json.hpp>

#include "bellproj/pulse_engine.hpp"
#include "bellproj/quantum_core.hpp"

namespace bellproj {

using Json = nlohmann::ordered_json;

Json to_json(const Operator& op);
/// Throws Error(Config) naming the offending field path on malformed input.
Operator operator_from_json(const Json& j, const std::string& path = "");

/// Hard pulses omit "target"; selective pulses carry the spin index; zrot
/// uses "angle_deg" and target -1 for every spin.
Json to_json(const PulseSequence& seq);
PulseSequence sequence_from_json(const Json& j, const std::string& path = "");

}  // namespace bellproj
