#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "aesthnet/core/error.hpp"
#include "aesthnet/eval/report.hpp"

namespace aesthnet {

/// Published reference numbers for the two benchmarks, bundled so reports
/// can print side-by-side comparisons. These are data for display only; no
/// code path asserts against them.
struct ReferenceBaselines {
  std::string benchmark;

  // Overall-score Spearman ρ of earlier published methods on this benchmark.
  std::vector<double> prior_overall_rho;

  // Reference multi-task results: ρ after the warm-up stage and after
  // fine-tuning, for the overall score and each attribute (schema order).
  std::vector<std::string> target_names;
  std::vector<double> rho_training;
  std::vector<double> rho_fine_tuning;

  // Single-task (overall only) reference results.
  double single_task_training = 0.0;
  double single_task_fine_tuning = 0.0;

  // Human rater self-consistency bands (band, raters in band, ρ).
  std::vector<ConsistencyBand> consistency_bands;

  // Ground-truth overall-score frequency grid and counts on the test split.
  std::vector<double> frequency_edges;
  std::vector<std::size_t> frequency_counts;

  // Raw vote-average extremes per target, where published.
  std::vector<double> target_min;
  std::vector<double> target_max;

  // Overall ρ when transferring this benchmark's model to the other one.
  double transfer_to_other = 0.0;
  double transfer_from_other = 0.0;
};

inline ReferenceBaselines aadb_baselines() {
  ReferenceBaselines b;
  b.benchmark = "aadb";
  b.prior_overall_rho = {0.6782, 0.6889, 0.6927, 0.7041};
  b.target_names = {"overall",          "balancing_elements", "content",
                    "color_harmony",    "dof",                "light",
                    "motion_blur",      "object_emphasis",    "rule_of_thirds",
                    "vivid_color",      "repetition",         "symmetry"};
  b.rho_training = {0.650, 0.264, 0.546, 0.437, 0.466, 0.396,
                    0.098, 0.600, 0.216, 0.617, 0.322, 0.194};
  b.rho_fine_tuning = {0.707, 0.267, 0.593, 0.484, 0.497, 0.445,
                       0.109, 0.639, 0.235, 0.669, 0.355, 0.177};
  b.single_task_training = 0.6890;
  b.single_task_fine_tuning = 0.7067;
  b.consistency_bands = {{"(0,100)", 190, 0.6738},
                         {"[100,200)", 65, 0.7013},
                         {"[200,inf)", 42, 0.7112}};
  b.frequency_edges = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  b.frequency_counts = {4, 35, 79, 147, 152, 165, 224, 76, 103, 15};
  b.transfer_to_other = 0.321;    // this benchmark's model on the other
  b.transfer_from_other = 0.441;  // the other benchmark's model on this one
  return b;
}

inline ReferenceBaselines eva_baselines() {
  ReferenceBaselines b;
  b.benchmark = "eva";
  b.prior_overall_rho = {};
  b.target_names = {"overall", "light_and_color", "composition_and_depth",
                    "quality", "semantics"};
  b.rho_training = {0.600, 0.610, 0.571, 0.463, 0.586};
  b.rho_fine_tuning = {0.695, 0.709, 0.655, 0.548, 0.659};
  b.single_task_training = 0.604;
  b.single_task_fine_tuning = 0.675;
  b.frequency_edges = {1.7, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 9.5};
  b.frequency_counts = {0, 3, 16, 64, 144, 231, 100, 11, 1};
  b.target_min = {1.764, 1.636, 1.558, 1.441, 1.735};
  b.target_max = {9.032, 3.657, 3.656, 3.593, 3.645};
  b.transfer_to_other = 0.441;
  b.transfer_from_other = 0.321;
  return b;
}

inline ReferenceBaselines reference_baselines(const std::string& benchmark) {
  if (benchmark == "aadb") return aadb_baselines();
  if (benchmark == "eva") return eva_baselines();
  throw ValidationError("no reference baselines for benchmark '" + benchmark +
                        "'");
}

inline nlohmann::ordered_json to_json(const ReferenceBaselines& b) {
  nlohmann::ordered_json j;
  j["benchmark"] = b.benchmark;
  j["prior_overall_rho"] = b.prior_overall_rho;
  j["target_names"] = b.target_names;
  j["rho_training"] = b.rho_training;
  j["rho_fine_tuning"] = b.rho_fine_tuning;
  j["single_task_training"] = b.single_task_training;
  j["single_task_fine_tuning"] = b.single_task_fine_tuning;
  nlohmann::ordered_json bands = nlohmann::ordered_json::array();
  for (const auto& band : b.consistency_bands) {
    nlohmann::ordered_json bj;
    bj["band"] = band.band;
    bj["raters"] = band.rater_count;
    bj["rho"] = band.rho;
    bands.push_back(bj);
  }
  j["consistency_bands"] = bands;
  j["frequency_edges"] = b.frequency_edges;
  j["frequency_counts"] = b.frequency_counts;
  j["target_min"] = b.target_min;
  j["target_max"] = b.target_max;
  j["transfer_to_other"] = b.transfer_to_other;
  j["transfer_from_other"] = b.transfer_from_other;
  return j;
}

}  // namespace aesthnet
