#pragma once

#include <map>
#include <string>
#include <vector>

#include "aesthnet/core/csv.hpp"
#include "aesthnet/core/error.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/data/schema.hpp"

namespace aesthnet {

/// Raw rater scores, one tuple of (overall, K attributes) per vote.
struct VoteTable {
  std::vector<std::string> image_names;             // first-appearance order
  std::vector<std::vector<std::vector<double>>> votes;  // [image][vote][K+1]
};

/// Reads a vote CSV with header `image,rater,overall,<attr_1>,...,<attr_K>`,
/// one row per (image, rater). Vote values are validated against the schema
/// raw ranges.
inline VoteTable load_votes(const std::string& path,
                            const AttributeSchema& schema) {
  CsvTable table = csv::read_file(path);
  const std::size_t k = schema.attribute_count();

  int image_col = table.column("image");
  int rater_col = table.column("rater");
  int overall_col = table.column("overall");
  if (image_col < 0 || rater_col < 0 || overall_col < 0)
    throw SchemaError(path + ": vote file needs 'image', 'rater', 'overall'");
  std::vector<int> attr_cols(k, -1);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& h = table.header[c];
    if (h == "image" || h == "rater" || h == "overall") continue;
    int ai = schema.attribute_index(h);
    if (ai < 0)
      throw SchemaError(path + ": unknown attribute column '" + h + "'");
    attr_cols[static_cast<std::size_t>(ai)] = static_cast<int>(c);
  }
  for (std::size_t i = 0; i < k; ++i)
    if (attr_cols[i] < 0)
      throw SchemaError(path + ": missing attribute column '" +
                        schema.attribute_names()[i] + "'");

  VoteTable out;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw ValidationError(path + " row " + std::to_string(r + 2) +
                            ": wrong field count");
    const std::string& img = row[static_cast<std::size_t>(image_col)];
    std::vector<double> tuple(k + 1);
    tuple[0] = csv::parse_double(row[static_cast<std::size_t>(overall_col)],
                                 path + " row " + std::to_string(r + 2) +
                                     " column 'overall'");
    for (std::size_t i = 0; i < k; ++i)
      tuple[i + 1] =
          csv::parse_double(row[static_cast<std::size_t>(attr_cols[i])],
                            path + " row " + std::to_string(r + 2) +
                                " column '" + schema.attribute_names()[i] + "'");
    for (std::size_t t = 0; t < k + 1; ++t)
      if (!schema.in_range(t, tuple[t]))
        throw ValidationError(path + " row " + std::to_string(r + 2) +
                              " column '" + schema.target_name(t) +
                              "': vote outside declared raw range");

    auto it = index.find(img);
    std::size_t idx;
    if (it == index.end()) {
      idx = out.image_names.size();
      index.emplace(img, idx);
      out.image_names.push_back(img);
      out.votes.emplace_back();
    } else {
      idx = it->second;
    }
    out.votes[idx].push_back(std::move(tuple));
  }
  return out;
}

/// Images with fewer votes than `min_votes` (30 for EVA-style collection).
inline std::vector<std::string> vote_warnings(const VoteTable& votes,
                                              std::size_t min_votes) {
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < votes.image_names.size(); ++i)
    if (votes.votes[i].size() < min_votes)
      warnings.push_back("image '" + votes.image_names[i] + "' has only " +
                         std::to_string(votes.votes[i].size()) + " votes (< " +
                         std::to_string(min_votes) + ")");
  return warnings;
}

/// Arithmetic mean of all votes per target per image.
inline std::vector<std::vector<double>> average_votes(const VoteTable& votes) {
  std::vector<std::vector<double>> means;
  means.reserve(votes.image_names.size());
  for (std::size_t i = 0; i < votes.image_names.size(); ++i) {
    const auto& image_votes = votes.votes[i];
    if (image_votes.empty())
      throw ValidationError("image '" + votes.image_names[i] +
                            "' has no votes");
    std::vector<double> mean(image_votes[0].size(), 0.0);
    for (const auto& v : image_votes)
      for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += v[t];
    for (double& m : mean) m /= static_cast<double>(image_votes.size());
    means.push_back(std::move(mean));
  }
  return means;
}

/// Builds ImageRecords from averaged votes. `image_prefix` is prepended to
/// each image name (typically the images directory).
inline std::vector<ImageRecord> records_from_votes(
    const VoteTable& votes, const AttributeSchema& schema,
    const std::string& image_prefix = "") {
  auto means = average_votes(votes);
  std::vector<ImageRecord> records;
  records.reserve(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    ImageRecord rec;
    rec.image_path = image_prefix.empty()
                         ? votes.image_names[i]
                         : image_prefix + "/" + votes.image_names[i];
    rec.raw_targets = std::move(means[i]);
    rec.normalized_targets = schema.normalize(rec.raw_targets);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace aesthnet
