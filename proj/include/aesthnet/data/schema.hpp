#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aesthnet/core/csv.hpp"
#include "aesthnet/core/error.hpp"

namespace aesthnet {

enum class BenchmarkId { kAadb, kEva, kCustom };

inline std::string to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::kAadb: return "aadb";
    case BenchmarkId::kEva: return "eva";
    default: return "custom";
  }
}

enum class Split { kTrain, kVal, kTest };

inline std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    default: return "test";
  }
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ValidationError("unknown split value: '" + s + "'");
}

/// Closed raw-score interval for one target.
struct TargetRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Per-benchmark declaration of targets: names, raw scales, and the affine
/// normalization onto [0,1]. Index 0 is always the overall score; indices
/// 1..K follow attribute order.
class AttributeSchema {
public:
  AttributeSchema() = default;

  AttributeSchema(BenchmarkId benchmark, std::string name,
                  std::vector<std::string> attribute_names,
                  TargetRange overall_range,
                  std::vector<TargetRange> attribute_ranges)
      : benchmark_(benchmark),
        name_(std::move(name)),
        attribute_names_(std::move(attribute_names)),
        overall_range_(overall_range),
        attribute_ranges_(std::move(attribute_ranges)) {
    if (attribute_ranges_.size() != attribute_names_.size())
      throw SchemaError("attribute range count does not match name count");
    for (std::size_t i = 0; i < target_count(); ++i) {
      const TargetRange r = range(i);
      if (!(r.hi > r.lo))
        throw SchemaError("raw range for target '" + target_name(i) +
                          "' is not strictly increasing");
    }
  }

  BenchmarkId benchmark() const { return benchmark_; }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& attribute_names() const {
    return attribute_names_;
  }

  std::size_t attribute_count() const { return attribute_names_.size(); }
  std::size_t target_count() const { return attribute_names_.size() + 1; }

  /// Target index 0 = overall, 1..K = attributes.
  TargetRange range(std::size_t target) const {
    return target == 0 ? overall_range_ : attribute_ranges_.at(target - 1);
  }

  std::string target_name(std::size_t target) const {
    return target == 0 ? std::string("overall")
                       : attribute_names_.at(target - 1);
  }

  int attribute_index(const std::string& name) const {
    for (std::size_t i = 0; i < attribute_names_.size(); ++i)
      if (attribute_names_[i] == name) return static_cast<int>(i);
    return -1;
  }

  bool in_range(std::size_t target, double raw) const {
    const TargetRange r = range(target);
    const double slack = 1e-9 * (r.hi - r.lo);
    return raw >= r.lo - slack && raw <= r.hi + slack;
  }

  /// Affine map of one raw value onto [0,1]. Out-of-range input is rejected.
  double normalize(std::size_t target, double raw) const {
    if (!in_range(target, raw))
      throw ValidationError("value " + std::to_string(raw) + " for target '" +
                            target_name(target) + "' outside raw range [" +
                            std::to_string(range(target).lo) + ", " +
                            std::to_string(range(target).hi) + "]");
    const TargetRange r = range(target);
    double n = (raw - r.lo) / (r.hi - r.lo);
    return n < 0.0 ? 0.0 : (n > 1.0 ? 1.0 : n);
  }

  /// Inverse of normalize; restores the raw scale for reporting.
  double denormalize(std::size_t target, double normalized) const {
    const TargetRange r = range(target);
    return r.lo + normalized * (r.hi - r.lo);
  }

  std::vector<double> normalize(const std::vector<double>& raw) const {
    if (raw.size() != target_count())
      throw ValidationError("target vector length " +
                            std::to_string(raw.size()) + " does not match " +
                            std::to_string(target_count()));
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = normalize(i, raw[i]);
    return out;
  }

  std::vector<double> denormalize(const std::vector<double>& normalized) const {
    std::vector<double> out(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i)
      out[i] = denormalize(i, normalized[i]);
    return out;
  }

  /// AADB ships overall and repetition/symmetry in [0,1] and the other nine
  /// attributes in [-1,1]; normalization passes the former through and maps
  /// v to (v+1)/2 for the latter.
  static AttributeSchema aadb() {
    std::vector<std::string> names = {
        "balancing_elements", "content",       "color_harmony",
        "dof",                "light",         "motion_blur",
        "object_emphasis",    "rule_of_thirds", "vivid_color",
        "repetition",         "symmetry"};
    std::vector<TargetRange> ranges(names.size(), TargetRange{-1.0, 1.0});
    ranges[9] = TargetRange{0.0, 1.0};   // repetition
    ranges[10] = TargetRange{0.0, 1.0};  // symmetry
    return AttributeSchema(BenchmarkId::kAadb, "aadb", std::move(names),
                           TargetRange{0.0, 1.0}, std::move(ranges));
  }

  /// EVA overall uses the 0-10 point scale; the four attributes use a
  /// four-level Likert scale encoded 1-4.
  static AttributeSchema eva() {
    std::vector<std::string> names = {"light_and_color", "composition_and_depth",
                                      "quality", "semantics"};
    std::vector<TargetRange> ranges(names.size(), TargetRange{1.0, 4.0});
    return AttributeSchema(BenchmarkId::kEva, "eva", std::move(names),
                           TargetRange{0.0, 10.0}, std::move(ranges));
  }

  static AttributeSchema builtin(const std::string& name) {
    if (name == "aadb") return aadb();
    if (name == "eva") return eva();
    throw SchemaError("no builtin schema named '" + name + "'");
  }

  /// Parses a key-value schema declaration file:
  ///   benchmark = custom
  ///   name = mydata
  ///   attributes = sharpness, contrast
  ///   overall_range = 0, 1
  ///   range.sharpness = 0, 1
  ///   range.contrast = -1, 1
  static AttributeSchema load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schema file: " + path);
    std::string benchmark = "custom";
    std::string name;
    std::vector<std::string> attributes;
    bool have_overall = false;
    TargetRange overall;
    std::vector<std::pair<std::string, TargetRange>> ranges;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = csv::trim(line);
      if (t.empty() || t[0] == '#') continue;
      auto eq = t.find('=');
      if (eq == std::string::npos)
        throw SchemaError(path + ":" + std::to_string(lineno) +
                          ": expected 'key = value'");
      std::string key = csv::trim(t.substr(0, eq));
      std::string value = csv::trim(t.substr(eq + 1));
      if (key == "benchmark") {
        benchmark = value;
      } else if (key == "name") {
        name = value;
      } else if (key == "attributes") {
        for (auto& f : csv::split_line(value))
          if (!f.empty()) attributes.push_back(f);
      } else if (key == "overall_range") {
        overall = parse_range(value, path, lineno);
        have_overall = true;
      } else if (key.rfind("range.", 0) == 0) {
        ranges.emplace_back(key.substr(6), parse_range(value, path, lineno));
      } else {
        throw SchemaError(path + ":" + std::to_string(lineno) +
                          ": unknown key '" + key + "'");
      }
    }

    if (benchmark == "aadb" || benchmark == "eva") return builtin(benchmark);
    if (benchmark != "custom")
      throw SchemaError("benchmark must be aadb, eva, or custom; got '" +
                        benchmark + "'");
    if (attributes.empty())
      throw SchemaError(path + ": custom schema declares no attributes");
    if (!have_overall)
      throw SchemaError(path + ": custom schema missing overall_range");
    std::vector<TargetRange> attr_ranges;
    for (const auto& a : attributes) {
      bool found = false;
      for (const auto& [rn, rr] : ranges)
        if (rn == a) {
          attr_ranges.push_back(rr);
          found = true;
          break;
        }
      if (!found)
        throw SchemaError(path + ": missing range for attribute '" + a + "'");
    }
    return AttributeSchema(BenchmarkId::kCustom, name.empty() ? "custom" : name,
                           std::move(attributes), overall,
                           std::move(attr_ranges));
  }

private:
  static TargetRange parse_range(const std::string& value,
                                 const std::string& path, int lineno) {
    auto fields = csv::split_line(value);
    if (fields.size() != 2)
      throw SchemaError(path + ":" + std::to_string(lineno) +
                        ": range needs 'lo, hi'");
    TargetRange r;
    r.lo = csv::parse_double(fields[0], "range lo");
    r.hi = csv::parse_double(fields[1], "range hi");
    if (!(r.hi > r.lo))
      throw SchemaError(path + ":" + std::to_string(lineno) +
                        ": range is not strictly increasing");
    return r;
  }

  BenchmarkId benchmark_ = BenchmarkId::kCustom;
  std::string name_;
  std::vector<std::string> attribute_names_;
  TargetRange overall_range_;
  std::vector<TargetRange> attribute_ranges_;
};

}  // namespace aesthnet
