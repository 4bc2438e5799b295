#include "config.hpp"

#include "json.hpp"
#include "readtrace/error.hpp"
#include "readtrace/serialization.hpp"

namespace readtrace::cli {

namespace {

using nlohmann::json;

template <typename T>
T number(const json& value, const std::string& key) {
  if (!value.is_number()) throw ValidationError("config: '" + key + "' must be a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (!value.is_number_unsigned()) {
      throw ValidationError("config: '" + key + "' must be a non-negative integer");
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (!value.is_number_integer()) throw ValidationError("config: '" + key + "' must be an integer");
  }
  return value.get<T>();
}

void read_analysis(const json& j, AnalysisConfig& c) {
  for (const auto& [key, value] : j.items()) {
    if (key == "variance") {
      const std::string v = value.is_string() ? value.get<std::string>() : "";
      if (v == "pooled") {
        c.variance = stats::VarianceModel::Pooled;
      } else if (v == "welch") {
        c.variance = stats::VarianceModel::Welch;
      } else {
        throw ValidationError("config: 'variance' must be \"pooled\" or \"welch\"");
      }
    } else if (key == "significance") {
      c.significance = number<double>(value, key);
      if (!(c.significance > 0.0 && c.significance < 1.0)) {
        throw ValidationError("config: 'significance' must lie in (0, 1)");
      }
    } else if (key == "min_coverage") {
      c.min_coverage = number<double>(value, key);
    } else {
      throw ValidationError("config: unknown analysis key '" + key + "'");
    }
  }
}

void read_study(const json& j, StudyConfig& c) {
  for (const auto& [key, value] : j.items()) {
    if (key == "batch_size") {
      c.batch_size = number<std::size_t>(value, key);
    } else if (key == "annotations_per_stimulus") {
      c.annotations_per_stimulus = number<std::size_t>(value, key);
    } else if (key == "min_mean_words") {
      c.min_mean_words = number<double>(value, key);
    } else if (key == "max_mean_words") {
      c.max_mean_words = number<double>(value, key);
    } else if (key == "word_budget") {
      const std::string v = value.is_string() ? value.get<std::string>() : "";
      if (v == "per_batch") {
        c.word_budget = WordBudget::PerBatch;
      } else if (v == "running_mean") {
        c.word_budget = WordBudget::RunningMean;
      } else {
        throw ValidationError("config: 'word_budget' must be \"per_batch\" or \"running_mean\"");
      }
    } else if (key == "max_candidate_batches") {
      c.max_candidate_batches = number<std::size_t>(value, key);
    } else if (key == "reservation_ttl_ms") {
      c.reservation_ttl_ms = number<std::int64_t>(value, key);
    } else if (key == "seed") {
      c.seed = number<std::uint64_t>(value, key);
    } else {
      throw ValidationError("config: unknown study key '" + key + "'");
    }
  }
  if (c.batch_size == 0) throw ValidationError("config: 'batch_size' must be positive");
  if (c.min_mean_words > c.max_mean_words) {
    throw ValidationError("config: 'min_mean_words' exceeds 'max_mean_words'");
  }
}

}  // namespace

ToolConfig load_config(const std::optional<std::filesystem::path>& path) {
  ToolConfig config;
  if (!path) return config;
  json j;
  try {
    j = json::parse(read_file(*path));
  } catch (const json::exception& e) {
    throw ValidationError("config " + path->string() + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_object()) throw ValidationError("config: '" + key + "' must be an object");
    if (key == "analysis") {
      read_analysis(value, config.analysis);
    } else if (key == "study") {
      read_study(value, config.study);
    } else {
      throw ValidationError("config: unknown section '" + key + "'");
    }
  }
  return config;
}

}  // namespace readtrace::cli
