#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/data/schema.hpp"

namespace aesthnet {

struct FrequencyTable {
  std::vector<double> edges;        // size bins + 1, strictly increasing
  std::vector<std::size_t> counts;  // per bin
  std::vector<double> percentages;  // counts / total

  std::size_t total() const {
    std::size_t n = 0;
    for (std::size_t c : counts) n += c;
    return n;
  }
};

/// Half-open bins [eᵢ, eᵢ₊₁); the last bin is closed so the top edge counts.
inline FrequencyTable interval_frequencies(const std::vector<double>& scores,
                                           const std::vector<double>& edges) {
  if (edges.size() < 2) throw ValidationError("need at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw ValidationError("bin edges must be strictly increasing");
  if (scores.empty()) throw ValidationError("no scores to bin");
  FrequencyTable table;
  table.edges = edges;
  table.counts.assign(edges.size() - 1, 0);
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("non-finite score");
    if (s < edges.front() || s > edges.back())
      throw ValidationError("score " + std::to_string(s) +
                            " outside binning range [" +
                            std::to_string(edges.front()) + ", " +
                            std::to_string(edges.back()) + "]");
    if (s == edges.back()) {
      ++table.counts.back();
      continue;
    }
    const auto it = std::upper_bound(edges.begin(), edges.end(), s);
    ++table.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
  }
  table.percentages.resize(table.counts.size());
  for (std::size_t i = 0; i < table.counts.size(); ++i)
    table.percentages[i] = static_cast<double>(table.counts[i]) /
                           static_cast<double>(scores.size());
  return table;
}

/// Published binning grids for the two benchmarks; custom schemas get ten
/// equal bins over the raw overall range.
inline std::vector<double> default_frequency_edges(
    const AttributeSchema& schema) {
  switch (schema.benchmark()) {
    case BenchmarkId::kAadb:
      return {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    case BenchmarkId::kEva:
      return {1.7, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 9.5};
    case BenchmarkId::kCustom: {
      const TargetRange r = schema.range(0);
      std::vector<double> edges(11);
      for (int i = 0; i <= 10; ++i)
        edges[static_cast<std::size_t>(i)] =
            r.lo + (r.hi - r.lo) * static_cast<double>(i) / 10.0;
      return edges;
    }
  }
  throw ValidationError("unknown benchmark");
}

/// Stretches the outer edges just enough to admit out-of-grid scores.
/// Returns true when a stretch happened (reports flag it).
inline bool widen_edges_to_cover(std::vector<double>& edges,
                                 const std::vector<double>& scores) {
  bool widened = false;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo < edges.front()) {
    edges.front() = *lo;
    widened = true;
  }
  if (*hi > edges.back()) {
    edges.back() = *hi;
    widened = true;
  }
  return widened;
}

}  // namespace aesthnet
