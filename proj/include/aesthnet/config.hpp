#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aesthnet/core/csv.hpp"
#include "aesthnet/core/error.hpp"
#include "aesthnet/data/image.hpp"
#include "aesthnet/data/schema.hpp"
#include "aesthnet/train/schedule.hpp"

namespace aesthnet {

/// Environment variable naming the default data root; relative dataset paths
/// resolve against it when set.
inline constexpr const char* kDataRootEnv = "AESTHNET_DATA_ROOT";

struct PipelineConfig {
  std::string dataset = "custom";  // aadb | eva | custom
  std::string schema_path;         // required for custom datasets
  std::string manifest_path;       // label manifest CSV
  std::string votes_path;          // raw per-rater votes (vote benchmarks)
  std::string image_root;          // prefix for relative image paths
  std::string backbone_weights;    // weight container; empty = seeded random
  std::string output_dir = "out";

  std::uint64_t seed = 42;
  std::uint64_t split_seed = 42;
  double dropout = -1.0;        // negative = benchmark default (0.35 / 0.25)
  std::size_t output_units = 0; // 0 = schema target count; 1 = single-task
  std::size_t resolution = 224;
  std::string preprocess = "vgg_caffe";
  bool deterministic = true;
  std::size_t min_votes = 30;
  std::size_t eval_batch = 64;
  std::vector<double> target_weights;  // empty = unweighted

  StageConfig stage1 = StageConfig::stage1_defaults();
  StageConfig stage2 = StageConfig::stage2_defaults();
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "' expects a boolean, got '" + v +
                    "'");
}

inline double parse_double_cfg(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v +
                      "'");
  }
}

inline std::uint64_t parse_u64_cfg(const std::string& v,
                                   const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key +
                      "' expects a nonnegative integer, got '" + v + "'");
  }
}

inline std::vector<double> parse_double_list(const std::string& v,
                                             const std::string& key) {
  std::vector<double> out;
  for (const std::string& part : csv::split_line(v))
    out.push_back(parse_double_cfg(csv::trim(part), key));
  return out;
}

inline std::vector<std::string> parse_name_list(const std::string& v) {
  std::vector<std::string> out;
  for (const std::string& part : csv::split_line(v)) {
    std::string t = csv::trim(part);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

inline bool apply_stage_key(StageConfig& stage, const std::string& field,
                            const std::string& value, const std::string& key) {
  if (field == "lr0") stage.lr0 = parse_double_cfg(value, key);
  else if (field == "beta1") stage.beta1 = parse_double_cfg(value, key);
  else if (field == "beta2") stage.beta2 = parse_double_cfg(value, key);
  else if (field == "epsilon") stage.epsilon = parse_double_cfg(value, key);
  else if (field == "epochs")
    stage.epochs = static_cast<std::size_t>(parse_u64_cfg(value, key));
  else if (field == "batch_size")
    stage.batch_size = static_cast<std::size_t>(parse_u64_cfg(value, key));
  else if (field == "schedule") stage.schedule = parse_schedule_kind(value);
  else if (field == "decay_steps")
    stage.decay_steps = static_cast<std::size_t>(parse_u64_cfg(value, key));
  else if (field == "decay_base")
    stage.decay_base = parse_double_cfg(value, key);
  else if (field == "trainable") stage.trainable = parse_name_list(value);
  else return false;
  return true;
}

}  // namespace detail

/// Resolves a config-relative path: absolute paths pass through; relative
/// ones join the data-root environment variable when it is set.
inline std::string resolve_data_path(const std::string& path) {
  if (path.empty()) return path;
  namespace fs = std::filesystem;
  if (fs::path(path).is_absolute()) return path;
  const char* root = std::getenv(kDataRootEnv);
  if (root == nullptr || *root == '\0') return path;
  return (fs::path(root) / path).string();
}

inline void validate_config(const PipelineConfig& config) {
  if (config.dataset != "aadb" && config.dataset != "eva" &&
      config.dataset != "custom")
    throw ConfigError("dataset must be aadb, eva, or custom, got '" +
                      config.dataset + "'");
  if (config.dataset == "custom" && config.schema_path.empty())
    throw ConfigError("custom datasets require a schema file");
  if (config.manifest_path.empty() && config.votes_path.empty())
    throw ConfigError("config needs a manifest or a votes file");
  if (config.dropout >= 1.0)
    throw ConfigError("dropout must be below 1");
  if (config.resolution < 32)
    throw ConfigError("resolution must be at least 32 (five pooling halvings)");
  if (config.output_units != 0 && config.output_units != 1)
    throw ConfigError(
        "output_units may be 0 (schema-derived) or 1 (single-task)");
  parse_preprocess(config.preprocess);
  for (const StageConfig* s : {&config.stage1, &config.stage2}) {
    if (s->batch_size == 0) throw ConfigError("batch_size must be positive");
    if (s->epochs == 0) throw ConfigError("epochs must be positive");
    if (s->lr0 <= 0) throw ConfigError("lr0 must be positive");
    if (s->decay_steps == 0) throw ConfigError("decay_steps must be positive");
    if (s->trainable.empty())
      throw ConfigError("stage trainable set must not be empty");
  }
}

/// Per-benchmark dropout defaults when the config does not pin one.
inline double effective_dropout(const PipelineConfig& config,
                                BenchmarkId benchmark) {
  if (config.dropout >= 0.0) return config.dropout;
  return benchmark == BenchmarkId::kEva ? 0.25 : 0.35;
}

/// Flat `key = value` file; '#' starts a comment. Unknown keys are errors so
/// typos cannot silently change runs.
inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = csv::trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = csv::trim(t.substr(0, eq));
    const std::string value = csv::trim(t.substr(eq + 1));

    if (key == "dataset") config.dataset = value;
    else if (key == "schema") config.schema_path = value;
    else if (key == "manifest") config.manifest_path = value;
    else if (key == "votes") config.votes_path = value;
    else if (key == "image_root") config.image_root = value;
    else if (key == "backbone_weights") config.backbone_weights = value;
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "seed") config.seed = detail::parse_u64_cfg(value, key);
    else if (key == "split_seed")
      config.split_seed = detail::parse_u64_cfg(value, key);
    else if (key == "dropout")
      config.dropout = detail::parse_double_cfg(value, key);
    else if (key == "output_units")
      config.output_units =
          static_cast<std::size_t>(detail::parse_u64_cfg(value, key));
    else if (key == "resolution")
      config.resolution =
          static_cast<std::size_t>(detail::parse_u64_cfg(value, key));
    else if (key == "preprocess") config.preprocess = value;
    else if (key == "deterministic")
      config.deterministic = detail::parse_bool(value, key);
    else if (key == "min_votes")
      config.min_votes =
          static_cast<std::size_t>(detail::parse_u64_cfg(value, key));
    else if (key == "eval_batch")
      config.eval_batch =
          static_cast<std::size_t>(detail::parse_u64_cfg(value, key));
    else if (key == "target_weights")
      config.target_weights = detail::parse_double_list(value, key);
    else if (key.rfind("stage1.", 0) == 0) {
      if (!detail::apply_stage_key(config.stage1, key.substr(7), value, key))
        throw ConfigError("unknown config key '" + key + "'");
    } else if (key.rfind("stage2.", 0) == 0) {
      if (!detail::apply_stage_key(config.stage2, key.substr(7), value, key))
        throw ConfigError("unknown config key '" + key + "'");
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return config;
}

}  // namespace aesthnet
