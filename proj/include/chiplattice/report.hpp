#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

#include "chiplattice/analysis.hpp"
#include "chiplattice/dynamics.hpp"

namespace chiplattice {

using json = nlohmann::json;

inline constexpr std::string_view kToolVersion = "1.0.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t v);

/// {tool, version, command, config_hash, config, timestamp, payload}.
/// The timestamp is CHIPLATTICE_TIMESTAMP when set, else the current UTC time; it is the only
/// field that may differ between identical runs.
json make_envelope(std::string_view command, const json& config, json payload);

std::string utc_timestamp();

json vec_json(const Vec3& v);

json to_json(const LatticeReport& r, double lambda);
json to_json(const StabilityReport& r, double lambda, bool include_trials);
json to_json(const MisalignmentReport& r, double lambda, bool include_profile);
json to_json(const HeatingScan& s);

/// %.17g, the shortest format that round-trips every double through text.
std::string format_number(double v);

}  // namespace chiplattice
