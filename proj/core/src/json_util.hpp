#pragma once

// Internal JSON helpers shared by the serialization, analysis and HTTP code.

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"
#include "readtrace/error.hpp"
#include "readtrace/metrics.hpp"
#include "readtrace/trial.hpp"

namespace readtrace::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parse_json(std::string_view text, std::string_view what);

const json& field(const json& object, std::string_view key, std::string_view what);
std::string string_field(const json& object, std::string_view key, std::string_view what);
std::int64_t int_field(const json& object, std::string_view key, std::string_view what);
std::uint64_t uint_field(const json& object, std::string_view key, std::string_view what);

HoverEvent event_from_json(const json& object);
ordered_json event_to_json(const HoverEvent& event);

ordered_json trial_to_json(const TrialRecord& trial);
TrialRecord trial_from_json(const json& object);

ordered_json metrics_to_json(const TrialMetrics& metrics);

// Dumps with a fixed format so outputs are byte-stable.
inline std::string dump(const ordered_json& value) { return value.dump(); }
inline std::string dump_pretty(const ordered_json& value) { return value.dump(2) + "\n"; }

}  // namespace readtrace::detail
