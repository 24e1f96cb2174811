// Command-line surface: prepare / train / evaluate / cross-eval / gradcam /
// report. Exit codes: 0 success, 2 configuration, 3 data validation,
// 4 runtime.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aesthnet/aesthnet.hpp"

namespace fs = std::filesystem;
using namespace aesthnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  bool single_task = false;
  std::string dataset;
};

PipelineConfig effective_config(const GlobalOptions& g) {
  if (g.config_path.empty())
    throw ConfigError("this command needs --config <file>");
  PipelineConfig c = load_config(resolve_data_path(g.config_path));
  if (!g.dataset.empty()) c.dataset = g.dataset;
  if (g.seed) c.seed = *g.seed;
  if (g.deterministic) c.deterministic = true;
  if (g.single_task) c.output_units = 1;
  return c;
}

std::vector<ImageRecord> copy_split(const std::vector<ImageRecord>& records,
                                    Split split) {
  std::vector<ImageRecord> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(r);
  return out;
}

std::string format_rho(double v, bool defined) {
  if (!defined) return "undefined";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

int command_prepare(const GlobalOptions& g) {
  PipelineConfig config = effective_config(g);
  validate_config(config);
  fs::create_directories(config.output_dir);
  const AttributeSchema schema = resolve_schema(config);
  std::vector<std::string> warnings;
  std::vector<ImageRecord> records = load_dataset(config, schema, &warnings);

  const struct { Split split; const char* name; } splits[] = {
      {Split::kTrain, "train"}, {Split::kVal, "val"}, {Split::kTest, "test"}};
  for (const auto& [split, name] : splits)
    write_manifest(
        (fs::path(config.output_dir) / ("manifest_" + std::string(name) + ".csv"))
            .string(),
        copy_split(records, split), schema, /*with_split=*/false);
  if (!config.votes_path.empty())
    write_manifest((fs::path(config.output_dir) / "vote_averages.csv").string(),
                   records, schema, /*with_split=*/true);

  DatasetStatistics stats = compute_statistics(records, schema);
  nlohmann::ordered_json j = to_json(stats);
  j["warnings"] = warnings;
  std::ofstream out(fs::path(config.output_dir) / "statistics.json",
                    std::ios::trunc);
  if (!out) throw IoError("cannot write statistics.json");
  out << j.dump(2) << "\n";

  std::cout << "prepared " << stats.total << " records (train "
            << stats.splits.train << ", val " << stats.splits.val << ", test "
            << stats.splits.test << ")\n";
  for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
  std::cout << "wrote " << config.output_dir << "/manifest_{train,val,test}.csv"
            << (config.votes_path.empty() ? "" : ", vote_averages.csv")
            << ", statistics.json\n";
  return kExitOk;
}

int command_train(const GlobalOptions& g) {
  PipelineConfig config = effective_config(g);
  PipelineResult<float> result = run_pipeline<float>(config, &std::cout);
  for (const auto& w : result.warnings) std::cout << "warning: " << w << "\n";
  std::cout << "splits: train " << result.splits.train << ", val "
            << result.splits.val << ", test " << result.splits.test << "\n"
            << "checkpoints: " << result.stage1_checkpoint << ", "
            << result.stage2_checkpoint << "\n"
            << "training log: " << result.log_path << "\n";
  if (!result.report.columns.empty()) {
    std::cout << "report: " << result.report_dir << "\n";
    for (const auto& column : result.report.columns) {
      const auto& overall = column.per_target.front();
      std::cout << "test overall rho (" << column.label
                << "): " << format_rho(overall.rho, overall.defined) << "\n";
    }
  }
  return kExitOk;
}

void print_report_table(const EvalReport& report) {
  std::cout << std::left << std::setw(24) << "target";
  for (const auto& column : report.columns)
    std::cout << std::setw(14) << column.label;
  std::cout << "\n";
  const std::size_t targets = report.columns.front().per_target.size();
  for (std::size_t t = 0; t < targets; ++t) {
    std::cout << std::left << std::setw(24)
              << report.columns.front().per_target[t].name;
    for (const auto& column : report.columns) {
      const auto& tc = column.per_target[t];
      std::cout << std::setw(14) << format_rho(tc.rho, tc.defined);
    }
    std::cout << "\n";
  }
}

int command_evaluate(const GlobalOptions& g, const std::string& checkpoint,
                     const std::string& label) {
  PipelineConfig config = effective_config(g);
  validate_config(config);
  const AttributeSchema schema = resolve_schema(config);
  std::vector<std::string> warnings;
  std::vector<ImageRecord> records = load_dataset(config, schema, &warnings);
  auto test = records_in_split(records, Split::kTest);

  MultiTaskNetwork<float> net =
      load_checkpoint<float>(resolve_data_path(checkpoint));
  if (!net.schema_name().empty() && net.schema_name() != schema.name())
    std::cout << "note: checkpoint was trained against schema '"
              << net.schema_name() << "', evaluating against '"
              << schema.name() << "'\n";

  EvalOptions options;
  options.batch_size = config.eval_batch;
  options.column_label = label;
  EvalReport report = evaluate(net, test, schema, options);

  const std::string report_dir =
      (fs::path(config.output_dir) / "report").string();
  write_eval_report(report, report_dir);
  write_report_plots(report, report_dir);
  print_report_table(report);
  const auto& overall = report.columns.front().per_target.front();
  if (overall.defined && !std::isnan(overall.p_value))
    std::cout << "overall p-value: " << std::scientific
              << std::setprecision(3) << overall.p_value << "\n";
  std::cout << "report written to " << report_dir << "\n";
  return kExitOk;
}

int command_crosseval(const GlobalOptions& g, const std::string& checkpoint_a,
                      const std::string& checkpoint_b,
                      const std::string& config_b_path) {
  PipelineConfig config_a = effective_config(g);
  validate_config(config_a);
  if (config_b_path.empty())
    throw ConfigError(
        "cross-eval needs --config-b describing the other benchmark");
  PipelineConfig config_b = load_config(resolve_data_path(config_b_path));
  validate_config(config_b);

  const AttributeSchema schema_a = resolve_schema(config_a);
  const AttributeSchema schema_b = resolve_schema(config_b);
  std::vector<ImageRecord> records_a = load_dataset(config_a, schema_a, nullptr);
  std::vector<ImageRecord> records_b = load_dataset(config_b, schema_b, nullptr);
  auto test_a = records_in_split(records_a, Split::kTest);
  auto test_b = records_in_split(records_b, Split::kTest);

  MultiTaskNetwork<float> net_a =
      load_checkpoint<float>(resolve_data_path(checkpoint_a));

  nlohmann::ordered_json j;
  std::cout << std::left << std::setw(22) << "model \\ test set"
            << std::setw(14) << schema_a.name() << std::setw(14)
            << schema_b.name() << "\n";
  auto run_row = [&](MultiTaskNetwork<float>& net, const std::string& row) {
    CrossEvalResult on_a = cross_evaluate(net, test_a, schema_a,
                                          config_a.eval_batch);
    CrossEvalResult on_b = cross_evaluate(net, test_b, schema_b,
                                          config_b.eval_batch);
    std::cout << std::left << std::setw(22) << row << std::setw(14)
              << format_rho(on_a.rho, true) << std::setw(14)
              << format_rho(on_b.rho, true) << "\n";
    j[row] = {{schema_a.name(), on_a.rho}, {schema_b.name(), on_b.rho}};
  };
  run_row(net_a, "trained_on_" + schema_a.name());
  if (!checkpoint_b.empty()) {
    MultiTaskNetwork<float> net_b =
        load_checkpoint<float>(resolve_data_path(checkpoint_b));
    run_row(net_b, "trained_on_" + schema_b.name());
  }

  fs::create_directories(config_a.output_dir);
  std::ofstream out(fs::path(config_a.output_dir) / "cross_eval.json",
                    std::ios::trunc);
  if (!out) throw IoError("cannot write cross_eval.json");
  out << j.dump(2) << "\n";
  std::cout << "wrote " << config_a.output_dir << "/cross_eval.json\n";
  return kExitOk;
}

int command_gradcam(const GlobalOptions& g, const std::string& checkpoint,
                    const std::vector<std::string>& images,
                    const std::string& layer, std::size_t output_index,
                    double opacity) {
  PipelineConfig config = effective_config(g);
  if (images.empty())
    throw ConfigError("gradcam needs at least one --image");
  MultiTaskNetwork<float> net =
      load_checkpoint<float>(resolve_data_path(checkpoint));
  const fs::path out_dir = fs::path(config.output_dir) / "gradcam";
  fs::create_directories(out_dir);
  for (const std::string& image : images) {
    const std::string path = resolve_data_path(image);
    Tensor<float> img = encode_image<float>(path, net.input_resolution(),
                                            net.preprocess());
    EncodedBatch<float> batch;
    batch.images = Tensor<float>({1, img.dim(0), img.dim(1), img.dim(2)});
    std::copy(img.data(), img.data() + img.size(), batch.images.data());
    batch.targets = Tensor<float>({1, 1}, 0.0f);
    ActivationMap map = grad_cam(net, batch, output_index, layer, path);
    const std::string stem = fs::path(path).stem().string();
    const std::string out_png =
        (out_dir / (stem + "_" + layer + "_u" + std::to_string(output_index) +
                    ".png"))
            .string();
    overlay(map, path, out_png, opacity);
    std::cout << "wrote " << out_png << " (+sidecar)\n";
  }
  return kExitOk;
}

int command_report(const GlobalOptions& g, std::string report_path) {
  if (report_path.empty()) {
    PipelineConfig config = effective_config(g);
    report_path =
        (fs::path(config.output_dir) / "report" / "report.json").string();
  }
  std::ifstream in(report_path);
  if (!in) throw IoError("cannot open report: " + report_path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed report JSON: " + std::string(e.what()));
  }
  const std::string benchmark = j.at("schema").get<std::string>();
  std::cout << "evaluation report for '" << benchmark << "' ("
            << j.at("test_count").get<std::size_t>() << " test images)\n\n";

  ReferenceBaselines baselines;
  bool have_baselines = true;
  try {
    baselines = reference_baselines(benchmark);
  } catch (const ValidationError&) {
    have_baselines = false;
  }

  std::cout << std::left << std::setw(24) << "target";
  for (const auto& column : j.at("checkpoints"))
    std::cout << std::setw(14) << column.at("label").get<std::string>();
  if (have_baselines)
    std::cout << std::setw(14) << "ref:training" << std::setw(16)
              << "ref:fine_tuning";
  std::cout << "\n";

  const auto& first = j.at("checkpoints").front().at("per_target");
  for (std::size_t t = 0; t < first.size(); ++t) {
    const std::string name = first[t].at("name").get<std::string>();
    std::cout << std::left << std::setw(24) << name;
    for (const auto& column : j.at("checkpoints")) {
      const auto& tc = column.at("per_target")[t];
      const bool defined = tc.at("defined").get<bool>();
      std::cout << std::setw(14)
                << format_rho(defined ? tc.at("rho").get<double>() : 0.0,
                              defined);
    }
    if (have_baselines) {
      std::string ref_t = "-", ref_f = "-";
      for (std::size_t r = 0; r < baselines.target_names.size(); ++r) {
        if (baselines.target_names[r] == name) {
          ref_t = format_rho(baselines.rho_training[r], true);
          ref_f = format_rho(baselines.rho_fine_tuning[r], true);
        }
      }
      std::cout << std::setw(14) << ref_t << std::setw(16) << ref_f;
    }
    std::cout << "\n";
  }

  if (have_baselines) {
    // Overall rho of the last checkpoint column drives the comparisons.
    const auto& last = j.at("checkpoints").back().at("per_target")[0];
    if (last.at("defined").get<bool>()) {
      const double model_rho = last.at("rho").get<double>();
      if (!baselines.prior_overall_rho.empty()) {
        std::cout << "\npublished overall-score baselines: ";
        for (double v : baselines.prior_overall_rho)
          std::cout << format_rho(v, true) << " ";
        std::cout << "| this model: " << format_rho(model_rho, true) << "\n";
      }
      if (!baselines.consistency_bands.empty()) {
        std::cout << "\nhuman-consistency comparison (overall rho "
                  << format_rho(model_rho, true) << "):\n";
        for (const auto& row :
             human_consistency_table(model_rho, baselines.consistency_bands)) {
          const char* verdict = row.model_rank > 0
                                    ? "model above"
                                    : row.model_rank < 0 ? "model below"
                                                         : "tie";
          std::cout << "  band " << std::setw(12) << row.band.band << " ("
                    << row.band.rater_count << " raters, rho "
                    << format_rho(row.band.rho, true) << "): " << verdict
                    << "\n";
        }
      }
    }
    const fs::path baselines_path =
        fs::path(report_path).parent_path() / "baselines.json";
    std::ofstream out(baselines_path, std::ios::trunc);
    if (out) out << to_json(baselines).dump(2) << "\n";
    std::cout << "\nreference constants written to " << baselines_path.string()
              << "\n";
  }
  return kExitOk;
}

template <typename F>
int run_guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "data validation error: " << e.what() << "\n";
    return kExitData;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "aesthnet: multi-task aesthetic score and attribute prediction toolkit"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "pipeline config file");
  app.add_option("--seed", g.seed, "override the training seed");
  app.add_flag("--deterministic", g.deterministic,
               "force bit-reproducible execution (the default)");
  app.add_flag("--single-task", g.single_task,
               "predict the overall score only (output_units = 1)");
  app.add_option("--dataset", g.dataset, "dataset kind")
      ->check(CLI::IsMember({"aadb", "eva", "custom"}));

  auto* prepare =
      app.add_subcommand("prepare", "materialize splits and statistics");
  prepare->fallthrough();

  auto* train = app.add_subcommand("train", "run the two-stage pipeline");
  train->fallthrough();

  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
  evaluate_cmd->fallthrough();
  std::string eval_checkpoint, eval_label = "checkpoint";
  evaluate_cmd->add_option("--checkpoint", eval_checkpoint)->required();
  evaluate_cmd->add_option("--label", eval_label, "report column label");

  auto* crosseval =
      app.add_subcommand("cross-eval", "transfer evaluation across benchmarks");
  crosseval->fallthrough();
  std::string cross_ckpt_a, cross_ckpt_b, cross_config_b;
  crosseval->add_option("--checkpoint", cross_ckpt_a,
                        "model trained on the --config benchmark")
      ->required();
  crosseval->add_option("--checkpoint-b", cross_ckpt_b,
                        "model trained on the --config-b benchmark");
  crosseval->add_option("--config-b", cross_config_b,
                        "config of the other benchmark");

  auto* gradcam_cmd =
      app.add_subcommand("gradcam", "render activation-map overlays");
  gradcam_cmd->fallthrough();
  std::string gc_checkpoint, gc_layer = "block5_conv3";
  std::vector<std::string> gc_images;
  std::size_t gc_output_index = 0;
  double gc_opacity = 0.5;
  gradcam_cmd->add_option("--checkpoint", gc_checkpoint)->required();
  gradcam_cmd->add_option("--image", gc_images, "image file (repeatable)");
  gradcam_cmd->add_option("--layer", gc_layer, "backbone conv layer name");
  gradcam_cmd->add_option("--output-index", gc_output_index,
                          "0 = overall, 1..K = attributes");
  gradcam_cmd->add_option("--opacity", gc_opacity, "overlay opacity in (0,1)");

  auto* report_cmd = app.add_subcommand(
      "report", "print a report beside the published reference numbers");
  report_cmd->fallthrough();
  std::string report_path;
  report_cmd->add_option("--report", report_path,
                         "report.json path (default: from --config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (prepare->parsed()) return run_guarded([&] { return command_prepare(g); });
  if (train->parsed()) return run_guarded([&] { return command_train(g); });
  if (evaluate_cmd->parsed())
    return run_guarded(
        [&] { return command_evaluate(g, eval_checkpoint, eval_label); });
  if (crosseval->parsed())
    return run_guarded([&] {
      return command_crosseval(g, cross_ckpt_a, cross_ckpt_b, cross_config_b);
    });
  if (gradcam_cmd->parsed())
    return run_guarded([&] {
      return command_gradcam(g, gc_checkpoint, gc_images, gc_layer,
                             gc_output_index, gc_opacity);
    });
  if (report_cmd->parsed())
    return run_guarded([&] { return command_report(g, report_path); });
  return kExitConfig;
}
