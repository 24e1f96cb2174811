#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aesthnet/core/rng.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/eval/baselines.hpp"
#include "aesthnet/eval/frequency.hpp"
#include "aesthnet/eval/plots.hpp"
#include "aesthnet/eval/report.hpp"
#include "aesthnet/eval/spearman.hpp"
#include "fixtures.hpp"

using namespace aesthnet;

namespace {

// Independent tie-averaged ranks: rank = |{v_j < v_i}| + (|{v_j == v_i}|+1)/2.
std::vector<double> brute_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t less = 0, eq = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) ++less;
      if (v[j] == v[i]) ++eq;
    }
    r[i] = static_cast<double>(less) + (static_cast<double>(eq) + 1.0) / 2.0;
  }
  return r;
}

// Reference rho with long-double accumulation; NaN when undefined.
double reference_spearman(const std::vector<double>& a,
                          const std::vector<double>& b) {
  const std::vector<double> ra = brute_ranks(a), rb = brute_ranks(b);
  const std::size_t n = ra.size();
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double da = ra[i] - ma, db = rb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) return std::numeric_limits<double>::quiet_NaN();
  long double rho = sab / std::sqrt(saa * sbb);
  if (rho > 1) rho = 1;
  if (rho < -1) rho = -1;
  return static_cast<double>(rho);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("fractional ranks average over ties") {
  REQUIRE(fractional_ranks({10, 20, 20, 30}) ==
          std::vector<double>{1.0, 2.5, 2.5, 4.0});
  REQUIRE(fractional_ranks({5, 5, 5}) == std::vector<double>{2.0, 2.0, 2.0});
  REQUIRE(fractional_ranks({3, 1, 2}) == std::vector<double>{3.0, 1.0, 2.0});
}

TEST_CASE("spearman rho matches frozen spot values") {
  REQUIRE(spearman_rho({1, 2, 2, 4}, {1, 3, 2, 4}) ==
          Catch::Approx(0.94868329805051388).epsilon(1e-14));

  const std::vector<double> a2{
      0.0012301533574825742, 0.2987455375084699,   -0.2741378553622176,
      -0.8905918387572742,   -0.45467078517172255, -0.9916465549964624,
      0.060143602597438485,  1.3402152455545335,   -0.49220651855132963,
      -0.6204748998199404,   0.4898420501851982,   0.35688700816006075};
  const std::vector<double> b2{
      0.10602932567663985, -0.7810952759539698, -0.16632075014438227,
      0.2500072750796507,  -1.5715499398709432, -0.9534390385384494,
      -1.8711509385021248, -0.6194301170077093, -2.087838297067397,
      -0.5453285809846515, -1.0225254563511041, 0.4497078629017319};
  REQUIRE(spearman_rho(a2, b2) ==
          Catch::Approx(0.034965034965034975).epsilon(1e-13));

  REQUIRE(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) == 1.0);
  REQUIRE(spearman_rho({1, 2, 3, 4}, {4, 1, 0, -2}) == -1.0);

  REQUIRE_THROWS_AS(spearman_rho({1, 2}, {1, 2, 3}), ValidationError);
  REQUIRE_THROWS_AS(spearman_rho({1}, {1}), UndefinedCorrelationError);
  REQUIRE_THROWS_AS(spearman_rho({1, 1, 1}, {1, 2, 3}),
                    UndefinedCorrelationError);
  REQUIRE_THROWS_AS(
      spearman_rho({1, std::numeric_limits<double>::infinity()}, {1, 2}),
      ValidationError);
}

TEST_CASE("spearman rho agrees with a brute-force reference") {
  double worst = 0.0;
  std::size_t compared = 0;

  // exhaustive small-alphabet sweep (ties everywhere)
  for (std::size_t n : {3u, 4u}) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 3;
    auto decode = [&](std::size_t code) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = static_cast<double>(code % 3);
        code /= 3;
      }
      return v;
    };
    for (std::size_t ai = 0; ai < total; ++ai) {
      const std::vector<double> av = decode(ai);
      for (std::size_t bi = 0; bi < total; ++bi) {
        const std::vector<double> bv = decode(bi);
        const double ref = reference_spearman(av, bv);
        if (std::isnan(ref)) {
          REQUIRE_THROWS_AS(spearman_rho(av, bv), UndefinedCorrelationError);
          continue;
        }
        worst = std::max(worst, std::fabs(spearman_rho(av, bv) - ref));
        ++compared;
      }
    }
  }

  // random real-valued pairs, half quantized to force ties
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(39));
    std::vector<double> a(n), b(n);
    const bool quantize = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-5.0, 5.0);
      b[i] = rng.uniform(-5.0, 5.0);
      if (quantize) {
        a[i] = std::round(a[i]);
        b[i] = std::round(b[i]);
      }
    }
    const double ref = reference_spearman(a, b);
    if (std::isnan(ref)) continue;
    worst = std::max(worst, std::fabs(spearman_rho(a, b) - ref));
    ++compared;
  }

  INFO("pairs compared: " << compared << ", worst |diff| = " << worst);
  REQUIRE(compared > 7000);
  REQUIRE(worst < 1e-12);
}

TEST_CASE("rho significance matches the t-approximation oracle") {
  REQUIRE(rho_significance(0.5, 10) ==
          Catch::Approx(0.14111328125000003).epsilon(1e-12));
  REQUIRE(rho_significance(0.7067, 1000) ==
          Catch::Approx(3.8703761870506873e-152).epsilon(1e-10));
  REQUIRE(rho_significance(0.3, 25) ==
          Catch::Approx(0.14511308137364495).epsilon(1e-12));
  REQUIRE(rho_significance(-0.62, 40) ==
          Catch::Approx(1.9837669503146952e-05).epsilon(1e-11));
  REQUIRE(rho_significance(0.1, 5) ==
          Catch::Approx(0.87288857156953825).epsilon(1e-12));

  // cross-check through the t statistic: rho = t / sqrt(df + t^2)
  auto p_from_t = [](double t, double df) {
    const double rho = t / std::sqrt(df + t * t);
    return rho_significance(rho, static_cast<std::size_t>(df) + 2);
  };
  REQUIRE(p_from_t(2.0, 8) == Catch::Approx(0.080516237957262565).epsilon(1e-11));
  REQUIRE(p_from_t(1.5, 998) == Catch::Approx(0.13393067123340172).epsilon(1e-11));
  REQUIRE(p_from_t(3.3, 23) == Catch::Approx(0.0031302129030747038).epsilon(1e-11));
  REQUIRE(p_from_t(0.7, 3) == Catch::Approx(0.5343269983047636).epsilon(1e-11));

  REQUIRE(rho_significance(1.0, 10) == 0.0);
  REQUIRE(rho_significance(-1.0, 10) == 0.0);
  REQUIRE_THROWS_AS(rho_significance(0.5, 3), ValidationError);
  REQUIRE_THROWS_AS(rho_significance(1.5, 10), ValidationError);
  REQUIRE_THROWS_AS(rho_significance(std::nan(""), 10), ValidationError);
}

TEST_CASE("permutation test corroborates the t-approximation") {
  const std::vector<double> a{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<double> b{2, 4, 0, 7, 6, 1, 3, 9, 8, 5};
  const double rho = spearman_rho(a, b);
  REQUIRE(rho == Catch::Approx(0.5030303030303029).epsilon(1e-14));

  const double p1 = rho_significance_permutation(a, b, 20000, 99);
  const double p2 = rho_significance_permutation(a, b, 20000, 99);
  REQUIRE(p1 == p2);  // seeded, hence exactly reproducible
  REQUIRE(rho_significance_permutation(a, b, 20000, 100) != p1);

  const double approx = rho_significance(rho, a.size());
  REQUIRE(std::fabs(p1 - approx) < 0.02);
}

TEST_CASE("interval frequencies use half-open bins with a closed top") {
  FrequencyTable t = interval_frequencies({0.0, 0.5, 1.0, 2.9, 3.0},
                                          {0.0, 1.0, 2.0, 3.0});
  REQUIRE(t.counts == std::vector<std::size_t>{2, 1, 2});
  REQUIRE(t.total() == 5);
  REQUIRE(t.percentages[0] == Catch::Approx(0.4));
  REQUIRE(t.percentages[1] == Catch::Approx(0.2));

  REQUIRE_THROWS_AS(interval_frequencies({1.0}, {0.0}), ValidationError);
  REQUIRE_THROWS_AS(interval_frequencies({1.0}, {0.0, 0.0}), ValidationError);
  REQUIRE_THROWS_AS(interval_frequencies({}, {0.0, 1.0}), ValidationError);
  REQUIRE_THROWS_AS(interval_frequencies({-0.5}, {0.0, 1.0}), ValidationError);
  REQUIRE_THROWS_AS(interval_frequencies({std::nan("")}, {0.0, 1.0}),
                    ValidationError);
}

TEST_CASE("default frequency grids per benchmark") {
  const auto aadb = AttributeSchema::builtin("aadb");
  REQUIRE(default_frequency_edges(aadb) ==
          std::vector<double>{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8,
                              0.9, 1.0});
  const auto eva = AttributeSchema::builtin("eva");
  REQUIRE(default_frequency_edges(eva) ==
          std::vector<double>{1.7, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 9.5});
  const auto tiny = fixtures::tiny_schema();
  const auto edges = default_frequency_edges(tiny);
  REQUIRE(edges.size() == 11);
  REQUIRE(edges.front() == 0.0);
  REQUIRE(edges.back() == 1.0);
  REQUIRE(edges[3] == Catch::Approx(0.3));

  std::vector<double> widen{0.05, 0.5, 1.0};
  REQUIRE(!widen_edges_to_cover(widen, {0.1, 0.9}));
  REQUIRE(widen == std::vector<double>{0.05, 0.5, 1.0});
  REQUIRE(widen_edges_to_cover(widen, {0.01, 1.2}));
  REQUIRE(widen.front() == 0.01);
  REQUIRE(widen.back() == 1.2);
}

TEST_CASE("correlation matrix flags undefined entries instead of zeroing") {
  std::vector<std::vector<double>> cols{
      {1, 2, 3, 4}, {4, 3, 2, 1}, {7, 7, 7, 7}};
  const std::vector<std::string> labels{"up", "down", "flat"};
  CorrelationMatrix m = attribute_correlation_matrix(cols, labels);
  REQUIRE(m.size() == 3);
  REQUIRE(m.values[0][0] == 1.0);
  REQUIRE(m.defined[0][0]);
  REQUIRE(m.values[0][1] == -1.0);
  REQUIRE(m.values[1][0] == m.values[0][1]);
  REQUIRE(!m.defined[0][2]);
  REQUIRE(!m.defined[2][2]);
  REQUIRE(std::isnan(m.values[2][2]));

  REQUIRE_THROWS_AS(attribute_correlation_matrix(cols, {"a", "b"}),
                    ValidationError);
  cols[1].pop_back();
  REQUIRE_THROWS_AS(attribute_correlation_matrix(cols, labels),
                    ValidationError);
}

TEST_CASE("evaluate produces a full per-target report") {
  auto dir = fixtures::fresh_dir("evaluate");
  auto records = fixtures::make_dataset(dir, 20);
  auto test = records_in_split(records, Split::kTest);
  REQUIRE(test.size() == 5);
  const AttributeSchema schema = fixtures::tiny_schema();
  auto net = fixtures::tiny_network(3, 0.0, 21);

  EvalReport report = evaluate(net, test, schema);
  REQUIRE(report.schema_name == "tiny");
  REQUIRE(report.test_count == 5);
  REQUIRE(report.columns.size() == 1);
  const EvalColumn& col = report.columns[0];
  REQUIRE(col.label == "checkpoint");
  REQUIRE(col.per_target.size() == 3);
  REQUIRE(col.per_target[0].name == "overall");
  REQUIRE(col.per_target[1].name == "contrast");
  REQUIRE(col.per_target[2].name == "sharpness");
  for (const auto& t : col.per_target) {
    REQUIRE(t.defined);
    REQUIRE(t.rho >= -1.0);
    REQUIRE(t.rho <= 1.0);
    REQUIRE(t.p_value >= 0.0);
    REQUIRE(t.p_value <= 1.0);
  }

  // predictions come back on the raw scale of each target
  REQUIRE(col.pred_min.size() == 3);
  REQUIRE(col.pred_max.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) REQUIRE(col.pred_min[t] <= col.pred_max[t]);
  REQUIRE(col.pred_min[0] >= 0.0);
  REQUIRE(col.pred_max[0] <= 1.0);
  REQUIRE(col.pred_min[2] >= -1.0);
  REQUIRE(col.pred_max[2] <= 1.0);

  REQUIRE(col.scatter.size() == 5);
  for (std::size_t i = 0; i < 5; ++i)
    REQUIRE(col.scatter[i].first == test[i]->raw_targets[0]);

  REQUIRE(report.gt_frequency.edges.size() == 11);
  REQUIRE(report.gt_frequency.total() == 5);
  REQUIRE(!report.frequency_widened);

  REQUIRE(report.gt_correlations.size() == 3);
  REQUIRE(report.gt_correlations.values[0][1] == -1.0);  // contrast = 1 - overall
  REQUIRE(report.gt_correlations.values[0][2] == 1.0);   // sharpness rises with it

  SECTION("deterministic across reruns and batch sizes") {
    EvalOptions small;
    small.batch_size = 2;
    EvalReport again = evaluate(net, test, schema, small);
    for (std::size_t t = 0; t < 3; ++t)
      REQUIRE(again.columns[0].per_target[t].rho == col.per_target[t].rho);
  }

  SECTION("single-task checkpoints flag unpredicted attributes") {
    auto solo = fixtures::tiny_network(1, 0.0, 22);
    EvalOptions opts;
    opts.column_label = "solo";
    EvalReport sr = evaluate(solo, test, schema, opts);
    REQUIRE(sr.columns[0].label == "solo");
    REQUIRE(sr.columns[0].per_target[0].defined);
    REQUIRE(!sr.columns[0].per_target[1].defined);
    REQUIRE(sr.columns[0].per_target[1].note ==
            "not predicted by this checkpoint (single-task)");
    REQUIRE(sr.columns[0].pred_min.size() == 1);
  }

  SECTION("output arity must match the schema or be one") {
    auto two = fixtures::tiny_network(2, 0.0, 23);
    REQUIRE_THROWS_AS(evaluate(two, test, schema), ValidationError);
    REQUIRE_THROWS_AS(evaluate(net, {}, schema), ValidationError);
  }

  SECTION("explicit frequency edges are honored") {
    EvalOptions opts;
    opts.frequency_edges = {0.0, 0.5, 1.0};
    EvalReport fr = evaluate(net, test, schema, opts);
    REQUIRE(fr.gt_frequency.edges == opts.frequency_edges);
    REQUIRE(fr.gt_frequency.counts.size() == 2);
    REQUIRE(fr.gt_frequency.total() == 5);
  }

  SECTION("cross evaluation tracks the overall column") {
    CrossEvalResult cx = cross_evaluate(net, test, schema);
    REQUIRE(cx.test_count == 5);
    // ranks are invariant under the monotone denormalization
    REQUIRE(cx.rho == Catch::Approx(col.per_target[0].rho).epsilon(1e-12));
    REQUIRE(cx.p_value >= 0.0);
    REQUIRE_THROWS_AS(cross_evaluate(net, {}, schema), ValidationError);
  }

  SECTION("report files round-trip as valid JSON and CSV") {
    auto out = fixtures::fresh_dir("report_files");
    write_eval_report(report, out.string());
    const std::string first = slurp(out / "report.json");
    write_eval_report(report, out.string());
    REQUIRE(slurp(out / "report.json") == first);  // byte-identical rewrite

    auto j = nlohmann::json::parse(first);
    REQUIRE(j["schema"] == "tiny");
    REQUIRE(j["test_count"] == 5);
    REQUIRE(j["ground_truth_frequency"]["counts"].size() == 10);
    REQUIRE(j["ground_truth_frequency"]["widened"] == false);
    REQUIRE(j["ground_truth_correlations"]["labels"].size() == 3);
    REQUIRE(j["checkpoints"].size() == 1);
    REQUIRE(j["checkpoints"][0]["label"] == "checkpoint");
    REQUIRE(j["checkpoints"][0]["per_target"].size() == 3);
    REQUIRE(j["checkpoints"][0]["per_target"][0]["defined"] == true);
    REQUIRE(j["checkpoints"][0]["scatter_count"] == 5);

    REQUIRE(line_count(slurp(out / "frequency.csv")) == 11);  // header + bins
    REQUIRE(line_count(slurp(out / "scatter_checkpoint.csv")) == 6);
    const std::string corr = slurp(out / "correlation_matrix.csv");
    REQUIRE(line_count(corr) == 4);
    REQUIRE(corr.rfind("target,overall,contrast,sharpness\n", 0) == 0);

    write_report_plots(report, out.string());
    REQUIRE(std::filesystem::file_size(out / "scatter_checkpoint.png") > 0);
    REQUIRE(std::filesystem::file_size(out / "correlation_matrix.png") > 0);
    const std::string png = slurp(out / "scatter_checkpoint.png");
    write_report_plots(report, out.string());
    REQUIRE(slurp(out / "scatter_checkpoint.png") == png);
  }
}

TEST_CASE("undefined correlations serialize as null with a note") {
  // A constant ground-truth column must surface as flagged-undefined JSON.
  std::vector<std::vector<double>> cols{{1, 2, 3, 4}, {5, 5, 5, 5}};
  CorrelationMatrix m =
      attribute_correlation_matrix(cols, {"overall", "flat"});
  auto j = to_json(m);
  REQUIRE(j["values"][0][1].is_null());
  REQUIRE(j["defined"][0][1] == false);
  REQUIRE(j["values"][0][0] == 1.0);

  TargetCorrelation tc;
  tc.name = "flat";
  tc.defined = false;
  tc.note = "constant";
  EvalColumn c;
  c.label = "x";
  c.per_target.push_back(tc);
  auto cj = to_json(c);
  REQUIRE(cj["per_target"][0]["rho"].is_null());
  REQUIRE(cj["per_target"][0]["note"] == "constant");
}

TEST_CASE("plot writers validate their inputs") {
  auto dir = fixtures::fresh_dir("plots");
  REQUIRE_THROWS_AS(write_scatter_png((dir / "s.png").string(), {}),
                    ValidationError);
  CorrelationMatrix empty;
  REQUIRE_THROWS_AS(write_heatmap_png((dir / "h.png").string(), empty),
                    ValidationError);
  write_scatter_png((dir / "one.png").string(), {{0.5, 0.5}}, "one point");
  REQUIRE(std::filesystem::file_size(dir / "one.png") > 0);
}

TEST_CASE("human consistency table ranks the model against each band") {
  const auto bands = aadb_baselines().consistency_bands;
  REQUIRE(bands.size() == 3);
  auto rows = human_consistency_table(0.68, bands);
  REQUIRE(rows.size() == 3);
  REQUIRE(rows[0].model_rank == 1);   // above 0.6738
  REQUIRE(rows[1].model_rank == -1);  // below 0.7013
  REQUIRE(rows[2].model_rank == -1);  // below 0.7112
  auto tie = human_consistency_table(bands[1].rho, bands);
  REQUIRE(tie[1].model_rank == 0);
}

TEST_CASE("reference baselines carry the published tables") {
  const ReferenceBaselines aadb = aadb_baselines();
  REQUIRE(aadb.benchmark == "aadb");
  REQUIRE(aadb.target_names.size() == 12);
  REQUIRE(aadb.rho_training.size() == 12);
  REQUIRE(aadb.rho_fine_tuning[0] == 0.707);
  REQUIRE(aadb.single_task_fine_tuning == 0.7067);
  REQUIRE(aadb.rho_fine_tuning[0] > aadb.single_task_fine_tuning);
  std::size_t aadb_total = 0;
  for (std::size_t c : aadb.frequency_counts) aadb_total += c;
  REQUIRE(aadb_total == 1000);
  REQUIRE(aadb.frequency_edges.size() == aadb.frequency_counts.size() + 1);

  const ReferenceBaselines eva = eva_baselines();
  REQUIRE(eva.target_names.size() == 5);
  REQUIRE(eva.rho_fine_tuning[0] == 0.695);
  std::size_t eva_total = 0;
  for (std::size_t c : eva.frequency_counts) eva_total += c;
  REQUIRE(eva_total == 570);
  REQUIRE(eva.target_min.size() == 5);
  REQUIRE(eva.target_max.size() == 5);

  // the two transfer directions agree between the tables
  REQUIRE(aadb.transfer_to_other == eva.transfer_from_other);
  REQUIRE(aadb.transfer_from_other == eva.transfer_to_other);
  // the eva-trained model carries over better than the reverse direction
  REQUIRE(eva.transfer_to_other > eva.transfer_from_other);

  REQUIRE(reference_baselines("aadb").benchmark == "aadb");
  REQUIRE(reference_baselines("eva").benchmark == "eva");
  REQUIRE_THROWS_AS(reference_baselines("custom"), ValidationError);

  auto j = to_json(aadb);
  REQUIRE(j["consistency_bands"].size() == 3);
  REQUIRE(j["frequency_counts"].size() == 10);
}
