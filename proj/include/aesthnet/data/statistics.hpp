#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "aesthnet/core/error.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/data/schema.hpp"
#include "aesthnet/data/split.hpp"

namespace aesthnet {

struct TargetStats {
  std::string name;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double mean = 0.0;
};

/// Counts of negative / null / positive raw attribute levels.
struct LevelHistogram {
  std::string name;
  std::size_t negative = 0;
  std::size_t null = 0;
  std::size_t positive = 0;
};

struct DatasetStatistics {
  std::string schema_name;
  SplitSizes splits;
  std::size_t total = 0;
  std::vector<TargetStats> per_target;         // raw scale
  std::vector<LevelHistogram> attribute_levels;
};

inline DatasetStatistics compute_statistics(
    const std::vector<ImageRecord>& records, const AttributeSchema& schema) {
  if (records.empty()) throw ValidationError("no records for statistics");
  DatasetStatistics stats;
  stats.schema_name = schema.name();
  stats.total = records.size();
  stats.splits = count_splits(records);

  const std::size_t targets = schema.target_count();
  stats.per_target.resize(targets);
  for (std::size_t t = 0; t < targets; ++t)
    stats.per_target[t].name = schema.target_name(t);
  stats.attribute_levels.resize(schema.attribute_count());
  for (std::size_t a = 0; a < schema.attribute_count(); ++a)
    stats.attribute_levels[a].name = schema.attribute_names()[a];

  for (const auto& rec : records) {
    for (std::size_t t = 0; t < targets; ++t) {
      double v = rec.raw_targets[t];
      auto& ts = stats.per_target[t];
      ts.min = std::min(ts.min, v);
      ts.max = std::max(ts.max, v);
      ts.mean += v;
    }
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
      double v = rec.raw_targets[a + 1];
      auto& h = stats.attribute_levels[a];
      if (v < 0.0)
        ++h.negative;
      else if (v > 0.0)
        ++h.positive;
      else
        ++h.null;
    }
  }
  for (auto& ts : stats.per_target)
    ts.mean /= static_cast<double>(records.size());
  return stats;
}

inline nlohmann::ordered_json to_json(const DatasetStatistics& stats) {
  nlohmann::ordered_json j;
  j["schema"] = stats.schema_name;
  j["total_images"] = stats.total;
  j["splits"] = {{"train", stats.splits.train},
                 {"val", stats.splits.val},
                 {"test", stats.splits.test}};
  nlohmann::ordered_json targets = nlohmann::ordered_json::array();
  for (const auto& t : stats.per_target)
    targets.push_back({{"name", t.name},
                       {"min", t.min},
                       {"max", t.max},
                       {"mean", t.mean}});
  j["targets"] = targets;
  nlohmann::ordered_json levels = nlohmann::ordered_json::array();
  for (const auto& h : stats.attribute_levels)
    levels.push_back({{"name", h.name},
                      {"negative", h.negative},
                      {"null", h.null},
                      {"positive", h.positive}});
  j["attribute_levels"] = levels;
  return j;
}

}  // namespace aesthnet
