#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aesthnet/core/error.hpp"
#include "aesthnet/data/loader.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/data/schema.hpp"
#include "aesthnet/eval/frequency.hpp"
#include "aesthnet/eval/spearman.hpp"
#include "aesthnet/nn/network.hpp"

namespace aesthnet {

struct TargetCorrelation {
  std::string name;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;
  std::string note;  // why undefined, when it is
};

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // NaN where undefined
  std::vector<std::vector<bool>> defined;

  std::size_t size() const { return labels.size(); }
};

/// Pairwise tie-aware Spearman over the columns of an n x (K+1) score table.
/// Constant columns yield flagged-undefined entries, never silent zeros.
inline CorrelationMatrix attribute_correlation_matrix(
    const std::vector<std::vector<double>>& columns,
    const std::vector<std::string>& labels) {
  if (columns.size() != labels.size())
    throw ValidationError("column/label count mismatch");
  const std::size_t k = columns.size();
  for (const auto& c : columns)
    if (c.size() != columns.front().size())
      throw ValidationError("score table columns have unequal lengths");
  CorrelationMatrix m;
  m.labels = labels;
  m.values.assign(k, std::vector<double>(k, std::numeric_limits<double>::quiet_NaN()));
  m.defined.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double rho = std::numeric_limits<double>::quiet_NaN();
      bool ok = true;
      try {
        if (i == j) {
          spearman_rho(columns[i], columns[i]);  // surfaces constant columns
          rho = 1.0;
        } else {
          rho = spearman_rho(columns[i], columns[j]);
        }
      } catch (const UndefinedCorrelationError&) {
        ok = false;
      }
      m.values[i][j] = m.values[j][i] = rho;
      m.defined[i][j] = m.defined[j][i] = ok;
    }
  }
  return m;
}

struct EvalColumn {
  std::string label;
  std::vector<TargetCorrelation> per_target;          // [0] = overall
  std::vector<double> pred_min;                        // raw scale
  std::vector<double> pred_max;
  std::vector<std::pair<double, double>> scatter;      // (gt, pred), raw overall
};

struct EvalReport {
  std::string schema_name;
  std::size_t test_count = 0;
  FrequencyTable gt_frequency;       // ground-truth overall, raw scale
  bool frequency_widened = false;
  CorrelationMatrix gt_correlations; // ground-truth targets, raw scale
  std::vector<EvalColumn> columns;
};

struct EvalOptions {
  std::size_t batch_size = 64;
  std::vector<double> frequency_edges;  // empty = benchmark default grid
  std::string column_label = "checkpoint";
};

namespace detail {

/// Raw-scale predictions for `records` through `net`, batched without
/// augmentation. Output is column-major: one vector per predicted target.
template <typename S>
std::vector<std::vector<double>> predict_columns(
    const MultiTaskNetwork<S>& net,
    const std::vector<const ImageRecord*>& records,
    const AttributeSchema& schema, std::size_t batch_size) {
  const std::size_t n = records.size();
  const std::size_t m = net.outputs();
  BatchLoader<S> loader(records, net.input_resolution(), net.preprocess(),
                        schema.target_count(), /*flip=*/false, /*seed=*/0);
  std::vector<std::vector<double>> cols(m, std::vector<double>());
  for (auto& c : cols) c.reserve(n);
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t count = std::min(batch_size, n - begin);
    EncodedBatch<S> batch = loader.load_eval_batch(begin, count);
    Tensor<S> pred = net.predict(batch);
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t t = 0; t < m; ++t)
        cols[t].push_back(
            schema.denormalize(t, static_cast<double>(pred[i * m + t])));
  }
  return cols;
}

inline TargetCorrelation correlate_target(const std::string& name,
                                          const std::vector<double>& gt,
                                          const std::vector<double>& pred) {
  TargetCorrelation tc;
  tc.name = name;
  try {
    tc.rho = spearman_rho(gt, pred);
    tc.defined = true;
    if (gt.size() >= 4) tc.p_value = rho_significance(tc.rho, gt.size());
  } catch (const UndefinedCorrelationError& e) {
    tc.defined = false;
    tc.note = e.what();
  }
  return tc;
}

}  // namespace detail

/// Full single-checkpoint evaluation. A single-task network (one output) is
/// accepted against a multi-target schema: attribute entries come back
/// flagged undefined with a note, overall is evaluated normally.
template <typename S>
EvalReport evaluate(const MultiTaskNetwork<S>& net,
                    const std::vector<const ImageRecord*>& records,
                    const AttributeSchema& schema,
                    const EvalOptions& options = {}) {
  if (records.empty()) throw ValidationError("no records to evaluate");
  if (net.outputs() != schema.target_count() && net.outputs() != 1)
    throw ValidationError(
        "checkpoint predicts " + std::to_string(net.outputs()) +
        " outputs but schema '" + schema.name() + "' declares " +
        std::to_string(schema.target_count()));

  const std::size_t n = records.size();
  const std::size_t k1 = schema.target_count();

  // Ground-truth columns in raw scale.
  std::vector<std::vector<double>> gt(k1, std::vector<double>());
  for (auto& c : gt) c.reserve(n);
  for (const ImageRecord* rec : records)
    for (std::size_t t = 0; t < k1; ++t) gt[t].push_back(rec->raw_targets[t]);

  const std::vector<std::vector<double>> pred =
      detail::predict_columns(net, records, schema, options.batch_size);

  EvalReport report;
  report.schema_name = schema.name();
  report.test_count = n;

  EvalColumn column;
  column.label = options.column_label;
  for (std::size_t t = 0; t < k1; ++t) {
    if (t < pred.size()) {
      column.per_target.push_back(
          detail::correlate_target(schema.target_name(t), gt[t], pred[t]));
    } else {
      TargetCorrelation tc;
      tc.name = schema.target_name(t);
      tc.defined = false;
      tc.note = "not predicted by this checkpoint (single-task)";
      column.per_target.push_back(tc);
    }
  }
  for (const auto& c : pred) {
    const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
    column.pred_min.push_back(*lo);
    column.pred_max.push_back(*hi);
  }
  column.scatter.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    column.scatter.emplace_back(gt[0][i], pred[0][i]);

  std::vector<double> edges = options.frequency_edges.empty()
                                  ? default_frequency_edges(schema)
                                  : options.frequency_edges;
  report.frequency_widened = widen_edges_to_cover(edges, gt[0]);
  report.gt_frequency = interval_frequencies(gt[0], edges);

  std::vector<std::string> labels;
  for (std::size_t t = 0; t < k1; ++t) labels.push_back(schema.target_name(t));
  report.gt_correlations = attribute_correlation_matrix(gt, labels);

  report.columns.push_back(std::move(column));
  return report;
}

struct CrossEvalResult {
  double rho = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t test_count = 0;
};

/// Overall-score transfer: predictions of a model trained on benchmark A
/// against ground truth of benchmark B. Attribute outputs are ignored.
template <typename S>
CrossEvalResult cross_evaluate(const MultiTaskNetwork<S>& net,
                               const std::vector<const ImageRecord*>& records,
                               const AttributeSchema& target_schema,
                               std::size_t batch_size = 64) {
  if (records.empty()) throw ValidationError("no records to evaluate");
  const std::size_t n = records.size();
  BatchLoader<S> loader(records, net.input_resolution(), net.preprocess(),
                        target_schema.target_count(), /*flip=*/false,
                        /*seed=*/0);
  std::vector<double> pred, gt;
  pred.reserve(n);
  gt.reserve(n);
  const std::size_t m = net.outputs();
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t count = std::min(batch_size, n - begin);
    EncodedBatch<S> batch = loader.load_eval_batch(begin, count);
    Tensor<S> p = net.predict(batch);
    for (std::size_t i = 0; i < count; ++i)
      pred.push_back(static_cast<double>(p[i * m]));
  }
  for (const ImageRecord* rec : records) gt.push_back(rec->raw_targets[0]);
  CrossEvalResult result;
  result.test_count = n;
  result.rho = spearman_rho(gt, pred);
  if (n >= 4) result.p_value = rho_significance(result.rho, n);
  return result;
}

struct ConsistencyBand {
  std::string band;         // e.g. "(0,100)"
  std::size_t rater_count;  // images rated, per the reference
  double rho;
};

struct BandComparison {
  ConsistencyBand band;
  double model_rho;
  int model_rank;  // +1 model above band, -1 below, 0 tie
};

/// Ranks a model's overall ρ against reference human-consistency bands.
inline std::vector<BandComparison> human_consistency_table(
    double model_rho, const std::vector<ConsistencyBand>& bands) {
  std::vector<BandComparison> rows;
  for (const auto& band : bands) {
    BandComparison row{band, model_rho, 0};
    if (model_rho > band.rho) row.model_rank = 1;
    else if (model_rho < band.rho) row.model_rank = -1;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const FrequencyTable& t) {
  nlohmann::ordered_json j;
  j["edges"] = t.edges;
  j["counts"] = t.counts;
  j["percentages"] = t.percentages;
  return j;
}

inline nlohmann::ordered_json to_json(const CorrelationMatrix& m) {
  nlohmann::ordered_json j;
  j["labels"] = m.labels;
  nlohmann::ordered_json values = nlohmann::ordered_json::array();
  for (const auto& row : m.values) {
    nlohmann::ordered_json r = nlohmann::ordered_json::array();
    for (double v : row) r.push_back(detail::json_number(v));
    values.push_back(r);
  }
  j["values"] = values;
  j["defined"] = m.defined;
  return j;
}

inline nlohmann::ordered_json to_json(const EvalColumn& c) {
  nlohmann::ordered_json j;
  j["label"] = c.label;
  nlohmann::ordered_json targets = nlohmann::ordered_json::array();
  for (const auto& t : c.per_target) {
    nlohmann::ordered_json tj;
    tj["name"] = t.name;
    tj["rho"] = detail::json_number(t.rho);
    tj["p_value"] = detail::json_number(t.p_value);
    tj["defined"] = t.defined;
    if (!t.note.empty()) tj["note"] = t.note;
    targets.push_back(tj);
  }
  j["per_target"] = targets;
  j["prediction_min"] = c.pred_min;
  j["prediction_max"] = c.pred_max;
  j["scatter_count"] = c.scatter.size();
  return j;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["schema"] = r.schema_name;
  j["test_count"] = r.test_count;
  nlohmann::ordered_json freq = to_json(r.gt_frequency);
  freq["widened"] = r.frequency_widened;
  j["ground_truth_frequency"] = freq;
  j["ground_truth_correlations"] = to_json(r.gt_correlations);
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (const auto& c : r.columns) cols.push_back(to_json(c));
  j["checkpoints"] = cols;
  return j;
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("failed writing: " + path);
}

}  // namespace detail

/// report.json plus CSV companions (scatter per column, frequency table,
/// ground-truth correlation matrix). Byte-identical across reruns.
inline void write_eval_report(const EvalReport& report,
                              const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  detail::write_text_file((fs::path(directory) / "report.json").string(),
                          to_json(report).dump(2) + "\n");

  {
    std::string csv = "bin_low,bin_high,count,percentage\n";
    const FrequencyTable& t = report.gt_frequency;
    for (std::size_t i = 0; i < t.counts.size(); ++i)
      csv += detail::format_value(t.edges[i]) + "," +
             detail::format_value(t.edges[i + 1]) + "," +
             std::to_string(t.counts[i]) + "," +
             detail::format_value(t.percentages[i]) + "\n";
    detail::write_text_file((fs::path(directory) / "frequency.csv").string(),
                            csv);
  }

  {
    std::string csv = "target";
    for (const auto& l : report.gt_correlations.labels) csv += "," + l;
    csv += "\n";
    for (std::size_t i = 0; i < report.gt_correlations.size(); ++i) {
      csv += report.gt_correlations.labels[i];
      for (std::size_t j = 0; j < report.gt_correlations.size(); ++j) {
        csv += ",";
        if (report.gt_correlations.defined[i][j])
          csv += detail::format_value(report.gt_correlations.values[i][j]);
      }
      csv += "\n";
    }
    detail::write_text_file(
        (fs::path(directory) / "correlation_matrix.csv").string(), csv);
  }

  for (const auto& column : report.columns) {
    std::string csv = "ground_truth,prediction\n";
    for (const auto& [g, p] : column.scatter)
      csv += detail::format_value(g) + "," + detail::format_value(p) + "\n";
    detail::write_text_file(
        (fs::path(directory) / ("scatter_" + column.label + ".csv")).string(),
        csv);
  }
}

}  // namespace aesthnet
