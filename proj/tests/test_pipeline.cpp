#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aesthnet/aesthnet.hpp"
#include "fixtures.hpp"

using namespace aesthnet;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

fs::path write_tiny_schema_file(const fs::path& dir) {
  const fs::path p = dir / "tiny.schema";
  write_file(p,
             "benchmark = custom\n"
             "name = tiny\n"
             "attributes = contrast, sharpness\n"
             "overall_range = 0, 1\n"
             "range.contrast = 0, 1\n"
             "range.sharpness = -1, 1\n");
  return p;
}

// Manifest + schema + config for a pipeline run over the tiny dataset.
PipelineConfig tiny_pipeline_config(const fs::path& dir, std::size_t n,
                                    const std::string& out_name) {
  auto records = fixtures::make_dataset(dir, n);
  const AttributeSchema schema = fixtures::tiny_schema();
  const fs::path manifest = dir / "manifest.csv";
  write_manifest(manifest.string(), records, schema, /*with_split=*/true);
  const fs::path schema_path = write_tiny_schema_file(dir);

  PipelineConfig config;
  config.dataset = "custom";
  config.schema_path = schema_path.string();
  config.manifest_path = manifest.string();
  config.output_dir = (dir / out_name).string();
  config.seed = 11;
  config.resolution = 32;
  config.preprocess = "unit";
  config.dropout = 0.2;
  config.eval_batch = 4;
  config.stage1.epochs = 1;
  config.stage1.batch_size = 2;
  config.stage1.lr0 = 0.01;
  config.stage2.epochs = 1;
  config.stage2.batch_size = 2;
  return config;
}

}  // namespace

TEST_CASE("config files parse with comments and stage overrides") {
  auto dir = fixtures::fresh_dir("config");
  const fs::path path = dir / "run.conf";
  write_file(path,
             "# training run\n"
             "dataset = eva\n"
             "votes = votes.csv\n"
             "image_root = images   # inline comment\n"
             "output_dir = runs/eva\n"
             "seed = 7\n"
             "split_seed = 8\n"
             "dropout = 0.3\n"
             "output_units = 1\n"
             "resolution = 64\n"
             "preprocess = unit\n"
             "deterministic = false\n"
             "min_votes = 5\n"
             "eval_batch = 16\n"
             "target_weights = 1.0, 0.5, 0.5, 0.5, 0.5\n"
             "\n"
             "stage1.lr0 = 0.002\n"
             "stage1.epochs = 2\n"
             "stage1.trainable = fc1, fc2, output\n"
             "stage2.schedule = continuous\n"
             "stage2.decay_steps = 50\n"
             "stage2.decay_base = 0.25\n");
  PipelineConfig c = load_config(path.string());
  REQUIRE(c.dataset == "eva");
  REQUIRE(c.votes_path == "votes.csv");
  REQUIRE(c.image_root == "images");
  REQUIRE(c.output_dir == "runs/eva");
  REQUIRE(c.seed == 7);
  REQUIRE(c.split_seed == 8);
  REQUIRE(c.dropout == 0.3);
  REQUIRE(c.output_units == 1);
  REQUIRE(c.resolution == 64);
  REQUIRE(c.preprocess == "unit");
  REQUIRE(!c.deterministic);
  REQUIRE(c.min_votes == 5);
  REQUIRE(c.eval_batch == 16);
  REQUIRE(c.target_weights == std::vector<double>{1.0, 0.5, 0.5, 0.5, 0.5});
  REQUIRE(c.stage1.lr0 == 0.002);
  REQUIRE(c.stage1.epochs == 2);
  REQUIRE(c.stage1.trainable == std::vector<std::string>{"fc1", "fc2", "output"});
  REQUIRE(c.stage2.schedule == LrScheduleKind::kContinuousExponential);
  REQUIRE(c.stage2.decay_steps == 50);
  REQUIRE(c.stage2.decay_base == 0.25);
  // untouched keys keep their defaults
  REQUIRE(c.stage2.lr0 == 0.0001);
  REQUIRE(c.manifest_path.empty());

  write_file(dir / "unknown.conf", "dataset = aadb\nlearning_rate = 1\n");
  REQUIRE_THROWS_WITH(load_config((dir / "unknown.conf").string()),
                      Catch::Matchers::ContainsSubstring("unknown config key"));
  write_file(dir / "noeq.conf", "dataset aadb\n");
  REQUIRE_THROWS_WITH(load_config((dir / "noeq.conf").string()),
                      Catch::Matchers::ContainsSubstring("key = value"));
  write_file(dir / "badnum.conf", "seed = twelve\n");
  REQUIRE_THROWS_AS(load_config((dir / "badnum.conf").string()), ConfigError);
  write_file(dir / "badbool.conf", "deterministic = maybe\n");
  REQUIRE_THROWS_AS(load_config((dir / "badbool.conf").string()), ConfigError);
  write_file(dir / "badstage.conf", "stage1.warmup = 3\n");
  REQUIRE_THROWS_AS(load_config((dir / "badstage.conf").string()), ConfigError);
  REQUIRE_THROWS_AS(load_config((dir / "missing.conf").string()), ConfigError);
}

TEST_CASE("data paths resolve against the environment root") {
  REQUIRE(resolve_data_path("") == "");
  REQUIRE(resolve_data_path("/abs/path.csv") == "/abs/path.csv");

  unsetenv(kDataRootEnv);
  REQUIRE(resolve_data_path("rel/path.csv") == "rel/path.csv");

  setenv(kDataRootEnv, "/data/root", 1);
  REQUIRE(resolve_data_path("rel/path.csv") == "/data/root/rel/path.csv");
  REQUIRE(resolve_data_path("/abs/path.csv") == "/abs/path.csv");
  unsetenv(kDataRootEnv);
}

TEST_CASE("config validation rejects inconsistent settings") {
  PipelineConfig ok;
  ok.dataset = "aadb";
  ok.manifest_path = "m.csv";
  validate_config(ok);  // must not throw

  auto expect_error = [](PipelineConfig c, const std::string& needle) {
    REQUIRE_THROWS_WITH(validate_config(c),
                        Catch::Matchers::ContainsSubstring(needle));
  };

  PipelineConfig c = ok;
  c.dataset = "ava";
  expect_error(c, "dataset must be");

  c = ok;
  c.dataset = "custom";
  expect_error(c, "schema");

  c = ok;
  c.manifest_path.clear();
  expect_error(c, "manifest or a votes");

  c = ok;
  c.dropout = 1.0;
  expect_error(c, "dropout");

  c = ok;
  c.resolution = 31;
  expect_error(c, "resolution");

  c = ok;
  c.output_units = 2;
  expect_error(c, "output_units");

  c = ok;
  c.preprocess = "torch";
  REQUIRE_THROWS_AS(validate_config(c), ConfigError);

  c = ok;
  c.stage1.batch_size = 0;
  expect_error(c, "batch_size");

  c = ok;
  c.stage2.epochs = 0;
  expect_error(c, "epochs");

  c = ok;
  c.stage1.lr0 = 0.0;
  expect_error(c, "lr0");

  c = ok;
  c.stage2.decay_steps = 0;
  expect_error(c, "decay_steps");

  c = ok;
  c.stage2.trainable.clear();
  expect_error(c, "trainable");
}

TEST_CASE("dropout defaults depend on the benchmark") {
  PipelineConfig c;
  REQUIRE(effective_dropout(c, BenchmarkId::kEva) == 0.25);
  REQUIRE(effective_dropout(c, BenchmarkId::kAadb) == 0.35);
  REQUIRE(effective_dropout(c, BenchmarkId::kCustom) == 0.35);
  c.dropout = 0.1;
  REQUIRE(effective_dropout(c, BenchmarkId::kEva) == 0.1);
  c.dropout = 0.0;
  REQUIRE(effective_dropout(c, BenchmarkId::kAadb) == 0.0);
}

TEST_CASE("schema resolution prefers an explicit file") {
  auto dir = fixtures::fresh_dir("resolve_schema");
  PipelineConfig c;
  c.dataset = "aadb";
  REQUIRE(resolve_schema(c).name() == "aadb");
  c.schema_path = write_tiny_schema_file(dir).string();
  REQUIRE(resolve_schema(c).name() == "tiny");
}

TEST_CASE("load_dataset reads votes with warnings and splits") {
  auto dir = fixtures::fresh_dir("load_votes");
  write_file(dir / "votes.csv",
             "image,rater,overall,contrast,sharpness\n"
             "a.png,r1,0.2,0.4,-0.5\n"
             "a.png,r2,0.4,0.6,0.5\n"
             "b.png,r1,0.9,0.1,0.0\n"
             "c.png,r3,0.5,0.5,0.5\n"
             "d.png,r1,0.7,0.2,-1.0\n"
             "e.png,r2,0.1,0.9,1.0\n");
  PipelineConfig config;
  config.dataset = "custom";
  config.schema_path = write_tiny_schema_file(dir).string();
  config.votes_path = (dir / "votes.csv").string();
  config.image_root = dir.string();
  config.min_votes = 2;
  config.split_seed = 4;

  const AttributeSchema schema = resolve_schema(config);
  std::vector<std::string> warnings;
  auto records = load_dataset(config, schema, &warnings);
  REQUIRE(records.size() == 5);
  // every image except a.png is short-voted against min_votes = 2
  REQUIRE(warnings.size() >= 4);
  REQUIRE(records[0].raw_targets[0] == Catch::Approx(0.3));  // vote average
  for (const auto& r : records) REQUIRE(r.has_split);
  REQUIRE(records[0].image_path == (dir / "a.png").string());
}

TEST_CASE("load_dataset prefixes relative manifest paths with image_root") {
  auto dir = fixtures::fresh_dir("load_manifest_root");
  const AttributeSchema schema = fixtures::tiny_schema();
  write_file(dir / "manifest.csv",
             "image,overall,contrast,sharpness,split\n"
             "sub/x.png,0.5,0.5,0.0,train\n"
             "/already/abs.png,0.25,0.75,-0.5,test\n");
  PipelineConfig config;
  config.dataset = "custom";
  config.schema_path = write_tiny_schema_file(dir).string();
  config.manifest_path = (dir / "manifest.csv").string();
  config.image_root = (dir / "images").string();

  auto records = load_dataset(config, schema, nullptr);
  REQUIRE(records.size() == 2);
  REQUIRE(records[0].image_path == (dir / "images" / "sub" / "x.png").string());
  REQUIRE(records[1].image_path == "/already/abs.png");
}

TEST_CASE("the full pipeline trains, checkpoints, and reports") {
  auto dir = fixtures::fresh_dir("pipeline");
  PipelineConfig config = tiny_pipeline_config(dir, 12, "out");

  PipelineResult<float> result = run_pipeline<float>(config);

  REQUIRE(result.splits.train == 6);
  REQUIRE(result.splits.val == 3);
  REQUIRE(result.splits.test == 3);
  REQUIRE(result.network.outputs() == 3);

  // one epoch per stage over ceil(6/2) = 3 batches each
  REQUIRE(result.state.steps.size() == 6);
  REQUIRE(result.state.global_step == 6);
  REQUIRE(result.state.steps[2].stage == 1);
  REQUIRE(result.state.steps[3].stage == 2);
  REQUIRE(result.state.epochs.size() == 2);

  REQUIRE(fs::exists(result.stage1_checkpoint));
  REQUIRE(fs::exists(result.stage2_checkpoint));
  REQUIRE(fs::exists(result.log_path));
  REQUIRE(fs::exists(fs::path(result.report_dir) / "report.json"));
  REQUIRE(fs::exists(fs::path(result.report_dir) / "frequency.csv"));
  REQUIRE(fs::exists(fs::path(result.report_dir) / "correlation_matrix.csv"));
  REQUIRE(fs::exists(fs::path(result.report_dir) / "scatter_training.csv"));
  REQUIRE(fs::exists(fs::path(result.report_dir) / "scatter_fine_tuning.csv"));
  REQUIRE(fs::exists(fs::path(result.report_dir) / "scatter_training.png"));
  REQUIRE(fs::exists(fs::path(result.report_dir) / "scatter_fine_tuning.png"));
  REQUIRE(fs::exists(fs::path(result.report_dir) / "correlation_matrix.png"));

  REQUIRE(result.report.columns.size() == 2);
  REQUIRE(result.report.columns[0].label == "training");
  REQUIRE(result.report.columns[1].label == "fine_tuning");
  REQUIRE(result.report.columns[0].per_target.size() == 3);
  REQUIRE(result.report.test_count == 3);

  SECTION("the stage-2 checkpoint reproduces the trained network exactly") {
    auto loaded = load_checkpoint<float>(result.stage2_checkpoint);
    REQUIRE(loaded.outputs() == 3);
    REQUIRE(loaded.input_resolution() == 32);
    REQUIRE(loaded.schema_name() == "tiny");
    Tensor<float> x = fixtures::random_input<float>(1, 32, 123);
    Tensor<float> a = result.network.forward(x, false);
    Tensor<float> b = loaded.forward(x, false);
    REQUIRE(std::equal(a.data(), a.data() + a.size(), b.data()));
  }

  SECTION("reruns reproduce metrics bit-for-bit") {
    PipelineConfig again = config;
    again.output_dir = (dir / "out_rerun").string();
    PipelineResult<float> r2 = run_pipeline<float>(again);
    REQUIRE(r2.state.steps.size() == result.state.steps.size());
    for (std::size_t i = 0; i < r2.state.steps.size(); ++i)
      REQUIRE(r2.state.steps[i].train_loss == result.state.steps[i].train_loss);
    for (std::size_t t = 0; t < 3; ++t) {
      const auto& ta = result.report.columns[1].per_target[t];
      const auto& tb = r2.report.columns[1].per_target[t];
      REQUIRE(ta.defined == tb.defined);
      if (ta.defined) REQUIRE(ta.rho == tb.rho);
    }
  }
}

TEST_CASE("single-task pipelines predict only the overall score") {
  auto dir = fixtures::fresh_dir("pipeline_single");
  PipelineConfig config = tiny_pipeline_config(dir, 8, "out");
  config.output_units = 1;

  PipelineResult<float> result = run_pipeline<float>(config);
  REQUIRE(result.network.outputs() == 1);
  REQUIRE(result.report.columns.size() == 2);
  const auto& targets = result.report.columns[1].per_target;
  REQUIRE(targets.size() == 3);
  REQUIRE(!targets[1].defined);
  REQUIRE(targets[1].note == "not predicted by this checkpoint (single-task)");

  auto loaded = load_checkpoint<float>(result.stage2_checkpoint);
  REQUIRE(loaded.outputs() == 1);
}

TEST_CASE("an empty test split downgrades evaluation to a warning") {
  auto dir = fixtures::fresh_dir("pipeline_notest");
  auto records = fixtures::make_dataset(dir, 4);
  for (auto& r : records)
    if (r.split == Split::kTest) r.split = Split::kVal;
  const AttributeSchema schema = fixtures::tiny_schema();
  write_manifest((dir / "manifest.csv").string(), records, schema, true);

  PipelineConfig config;
  config.dataset = "custom";
  config.schema_path = write_tiny_schema_file(dir).string();
  config.manifest_path = (dir / "manifest.csv").string();
  config.output_dir = (dir / "out").string();
  config.seed = 3;
  config.resolution = 32;
  config.preprocess = "unit";
  config.stage1.epochs = 1;
  config.stage1.batch_size = 2;
  config.stage2.epochs = 1;
  config.stage2.batch_size = 2;

  PipelineResult<float> result = run_pipeline<float>(config);
  REQUIRE(result.splits.test == 0);
  bool warned = false;
  for (const auto& w : result.warnings)
    warned |= w.find("test split is empty") != std::string::npos;
  REQUIRE(warned);
  REQUIRE(result.report.columns.empty());
  REQUIRE(result.report_dir.empty());
  REQUIRE(fs::exists(result.log_path));
  REQUIRE(fs::exists(result.stage2_checkpoint));
}
