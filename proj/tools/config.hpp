#pragma once

#include <filesystem>
#include <optional>

#include "readtrace/analysis.hpp"
#include "readtrace/study.hpp"

namespace readtrace::cli {

struct ToolConfig {
  AnalysisConfig analysis;
  StudyConfig study;
};

// Reads {"analysis": {...}, "study": {...}}. Unknown keys are rejected so that
// a typo cannot silently fall back to a default.
ToolConfig load_config(const std::optional<std::filesystem::path>& path);

}  // namespace readtrace::cli
