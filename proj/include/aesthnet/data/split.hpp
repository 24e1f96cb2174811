#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/rng.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/data/schema.hpp"

namespace aesthnet {

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

inline SplitSizes count_splits(const std::vector<ImageRecord>& records) {
  SplitSizes s;
  for (const auto& r : records) {
    switch (r.split) {
      case Split::kTrain: ++s.train; break;
      case Split::kVal: ++s.val; break;
      case Split::kTest: ++s.test; break;
    }
  }
  return s;
}

constexpr std::size_t kEvaExpectedImages = 4070;
constexpr std::size_t kEvaTrainImages = 3500;

/// Assigns train/val/test membership.
///
/// AADB manifests carry the official partition and it is copied verbatim.
/// EVA has no official split: records are shuffled deterministically under
/// `seed`, the first 3500 become train and the last 570 test. Custom
/// benchmarks use their split column when present, otherwise a seeded
/// 80/10/10 partition.
inline void split_dataset(std::vector<ImageRecord>& records,
                          const AttributeSchema& schema, std::uint64_t seed,
                          std::vector<std::string>* warnings = nullptr) {
  if (records.empty()) throw ValidationError("no records to split");

  auto all_have_split = [&records]() {
    for (const auto& r : records)
      if (!r.has_split) return false;
    return true;
  };

  if (schema.benchmark() == BenchmarkId::kAadb) {
    if (!all_have_split())
      throw ValidationError(
          "AADB manifest is missing the official split column");
    return;
  }

  if (schema.benchmark() == BenchmarkId::kCustom && all_have_split()) return;

  // Seeded shuffle, stable across platforms.
  Rng rng(detail::mix(seed, 0x73706c6974ULL));
  rng.shuffle(records);

  std::size_t n = records.size();
  std::size_t train_n, val_n;
  if (schema.benchmark() == BenchmarkId::kEva) {
    if (n == kEvaExpectedImages) {
      train_n = kEvaTrainImages;
    } else {
      if (warnings)
        warnings->push_back("EVA record count " + std::to_string(n) +
                            " differs from the expected " +
                            std::to_string(kEvaExpectedImages) +
                            "; splitting proportionally");
      train_n = static_cast<std::size_t>(std::llround(
          static_cast<double>(n) * static_cast<double>(kEvaTrainImages) /
          static_cast<double>(kEvaExpectedImages)));
      if (train_n == 0) train_n = 1;
      if (train_n >= n) train_n = n - 1;
    }
    val_n = 0;
  } else {
    train_n = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
    val_n = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n)));
    if (train_n + val_n >= n) {
      train_n = n > 2 ? n - 2 : 1;
      val_n = n > 2 ? 1 : 0;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    records[i].split = i < train_n              ? Split::kTrain
                       : i < train_n + val_n    ? Split::kVal
                                                : Split::kTest;
    records[i].has_split = true;
  }
}

}  // namespace aesthnet
