#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "aesthnet/core/csv.hpp"
#include "aesthnet/core/error.hpp"
#include "aesthnet/data/schema.hpp"

namespace aesthnet {

/// One image with its targets on the raw benchmark scale and normalized to
/// [0,1]. Index 0 is the overall score.
struct ImageRecord {
  std::string image_path;
  std::vector<double> raw_targets;
  std::vector<double> normalized_targets;
  Split split = Split::kTrain;
  bool has_split = false;
};

/// Reads a manifest CSV with header `image,overall,<attr_1>,...,<attr_K>[,split]`.
/// Attribute columns are matched to the schema by name; every schema
/// attribute must be present and no unknown columns are allowed.
inline std::vector<ImageRecord> load_manifest(const std::string& path,
                                              const AttributeSchema& schema) {
  CsvTable table = csv::read_file(path);

  const std::size_t k = schema.attribute_count();
  int image_col = table.column("image");
  int overall_col = table.column("overall");
  int split_col = table.column("split");
  if (image_col < 0) throw SchemaError(path + ": missing 'image' column");
  if (overall_col < 0) throw SchemaError(path + ": missing 'overall' column");

  std::vector<int> attr_cols(k, -1);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    if (h == "image" || h == "overall" || h == "split") continue;
    int ai = schema.attribute_index(h);
    if (ai < 0)
      throw SchemaError(path + ": unknown attribute column '" + h +
                        "' for schema '" + schema.name() + "'");
    attr_cols[static_cast<std::size_t>(ai)] = static_cast<int>(c);
  }
  for (std::size_t i = 0; i < k; ++i)
    if (attr_cols[i] < 0)
      throw SchemaError(path + ": missing attribute column '" +
                        schema.attribute_names()[i] + "'");

  std::vector<ImageRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto context = [&](const std::string& col) {
      return path + " row " + std::to_string(r + 2) + " column '" + col + "'";
    };
    if (row.size() != table.header.size())
      throw ValidationError(path + " row " + std::to_string(r + 2) +
                            ": expected " + std::to_string(table.header.size()) +
                            " fields, got " + std::to_string(row.size()));

    ImageRecord rec;
    rec.image_path = row[static_cast<std::size_t>(image_col)];
    if (rec.image_path.empty())
      throw ValidationError(context("image") + ": empty image path");

    rec.raw_targets.resize(k + 1);
    rec.raw_targets[0] = csv::parse_double(
        row[static_cast<std::size_t>(overall_col)], context("overall"));
    for (std::size_t i = 0; i < k; ++i)
      rec.raw_targets[i + 1] =
          csv::parse_double(row[static_cast<std::size_t>(attr_cols[i])],
                            context(schema.attribute_names()[i]));

    for (std::size_t t = 0; t < k + 1; ++t)
      if (!schema.in_range(t, rec.raw_targets[t]))
        throw ValidationError(context(schema.target_name(t)) + ": value " +
                              std::to_string(rec.raw_targets[t]) +
                              " outside declared raw range");
    rec.normalized_targets = schema.normalize(rec.raw_targets);

    if (split_col >= 0) {
      rec.split = parse_split(row[static_cast<std::size_t>(split_col)]);
      rec.has_split = true;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

namespace detail {

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Writes records back out in manifest format. Values round-trip exactly and
/// the output is byte-identical across reruns for identical inputs.
inline void write_manifest(const std::string& path,
                           const std::vector<ImageRecord>& records,
                           const AttributeSchema& schema, bool with_split) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << "image,overall";
  for (const auto& a : schema.attribute_names()) out << "," << a;
  if (with_split) out << ",split";
  out << "\n";
  for (const auto& rec : records) {
    out << rec.image_path;
    for (double v : rec.raw_targets) out << "," << detail::format_value(v);
    if (with_split) out << "," << to_string(rec.split);
    out << "\n";
  }
  if (!out) throw IoError("failed writing manifest: " + path);
}

inline std::vector<const ImageRecord*> records_in_split(
    const std::vector<ImageRecord>& records, Split split) {
  std::vector<const ImageRecord*> out;
  for (const auto& r : records)
    if (r.split == split) out.push_back(&r);
  return out;
}

}  // namespace aesthnet
