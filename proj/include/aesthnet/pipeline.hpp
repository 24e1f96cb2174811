#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "aesthnet/config.hpp"
#include "aesthnet/data/loader.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/data/schema.hpp"
#include "aesthnet/data/split.hpp"
#include "aesthnet/data/votes.hpp"
#include "aesthnet/eval/plots.hpp"
#include "aesthnet/eval/report.hpp"
#include "aesthnet/nn/checkpoint.hpp"
#include "aesthnet/nn/network.hpp"
#include "aesthnet/train/log.hpp"
#include "aesthnet/train/trainer.hpp"

namespace aesthnet {

/// Schema selection: explicit file > builtin for the named benchmark.
inline AttributeSchema resolve_schema(const PipelineConfig& config) {
  if (!config.schema_path.empty())
    return AttributeSchema::load(resolve_data_path(config.schema_path));
  return AttributeSchema::builtin(config.dataset);
}

/// Loads and splits the dataset described by the config. Vote files take
/// precedence over manifests; warnings collect soft findings (short-voted
/// images, fallback splits).
inline std::vector<ImageRecord> load_dataset(const PipelineConfig& config,
                                             const AttributeSchema& schema,
                                             std::vector<std::string>* warnings) {
  std::vector<ImageRecord> records;
  if (!config.votes_path.empty()) {
    VoteTable votes =
        load_votes(resolve_data_path(config.votes_path), schema);
    if (warnings) {
      auto w = vote_warnings(votes, config.min_votes);
      warnings->insert(warnings->end(), w.begin(), w.end());
    }
    records = records_from_votes(votes, schema,
                                 resolve_data_path(config.image_root));
  } else {
    records = load_manifest(resolve_data_path(config.manifest_path), schema);
    if (!config.image_root.empty()) {
      const std::string root = resolve_data_path(config.image_root);
      for (auto& rec : records)
        if (!std::filesystem::path(rec.image_path).is_absolute())
          rec.image_path = (std::filesystem::path(root) / rec.image_path).string();
    }
  }
  split_dataset(records, schema, config.split_seed, warnings);
  return records;
}

template <typename S = float>
struct PipelineResult {
  MultiTaskNetwork<S> network;  // post-stage-2 weights
  TrainState state;
  EvalReport report;
  SplitSizes splits;
  std::vector<std::string> warnings;
  std::string stage1_checkpoint;
  std::string stage2_checkpoint;
  std::string log_path;
  std::string report_dir;
};

/// End-to-end: load + split data, build the network, run both stages with a
/// checkpoint after each, then evaluate the stage-1 and stage-2 weights on
/// the test split into a two-column report.
template <typename S = float>
PipelineResult<S> run_pipeline(const PipelineConfig& config,
                               std::ostream* progress = nullptr) {
  validate_config(config);
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  PipelineResult<S> result;
  const AttributeSchema schema = resolve_schema(config);
  std::vector<ImageRecord> records =
      load_dataset(config, schema, &result.warnings);
  result.splits = count_splits(records);

  HeadSpec head;
  head.outputs =
      config.output_units == 0 ? schema.target_count() : config.output_units;
  head.dropout = effective_dropout(config, schema.benchmark());
  BackboneSpec backbone;
  backbone.weights_path = resolve_data_path(config.backbone_weights);
  MultiTaskNetwork<S> net = build_network<S>(backbone, head, config.seed);
  net.set_input_resolution(config.resolution);
  net.set_preprocess(parse_preprocess(config.preprocess));
  net.set_schema_name(schema.name());

  const auto train_records = records_in_split(records, Split::kTrain);
  const auto val_records = records_in_split(records, Split::kVal);
  const auto test_records = records_in_split(records, Split::kTest);
  const Preprocess preprocess = parse_preprocess(config.preprocess);
  BatchLoader<S> train_loader(train_records, config.resolution, preprocess,
                              head.outputs, /*flip=*/true, config.seed);
  BatchLoader<S> val_loader(val_records, config.resolution, preprocess,
                            head.outputs, /*flip=*/false, config.seed);

  TrainState state;
  state.seed = config.seed;
  TrainOptions options;
  options.target_weights = config.target_weights;
  options.progress = progress;

  EvalOptions eval_options;
  eval_options.batch_size = config.eval_batch;

  train_stage(net, train_loader, val_loader, config.stage1, state, options);
  result.stage1_checkpoint =
      (fs::path(config.output_dir) / "checkpoint_stage1.bin").string();
  save_checkpoint(net, result.stage1_checkpoint);

  EvalReport stage1_report;
  if (!test_records.empty()) {
    eval_options.column_label = "training";
    stage1_report = evaluate(net, test_records, schema, eval_options);
  }

  train_stage(net, train_loader, val_loader, config.stage2, state, options);
  result.stage2_checkpoint =
      (fs::path(config.output_dir) / "checkpoint_stage2.bin").string();
  save_checkpoint(net, result.stage2_checkpoint);

  if (!test_records.empty()) {
    eval_options.column_label = "fine_tuning";
    result.report = evaluate(net, test_records, schema, eval_options);
    result.report.columns.insert(result.report.columns.begin(),
                                 stage1_report.columns.front());
  } else {
    result.warnings.push_back("test split is empty; evaluation skipped");
  }

  result.log_path =
      (fs::path(config.output_dir) / "training_log.csv").string();
  write_training_log(state, result.log_path);
  if (!test_records.empty()) {
    result.report_dir = (fs::path(config.output_dir) / "report").string();
    write_eval_report(result.report, result.report_dir);
    write_report_plots(result.report, result.report_dir);
  }

  result.state = std::move(state);
  result.network = std::move(net);
  return result;
}

}  // namespace aesthnet
