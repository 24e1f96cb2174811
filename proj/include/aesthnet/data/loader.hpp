#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "aesthnet/core/rng.hpp"
#include "aesthnet/data/image.hpp"
#include "aesthnet/data/record.hpp"

namespace aesthnet {

namespace detail {
constexpr std::uint64_t kOrderStream = 0x6f72646572ULL;
constexpr std::uint64_t kFlipStream = 0x666c6970ULL;
}  // namespace detail

/// Serves encoded batches for one split. All state is immutable after
/// construction; the delivered batch sequence is a pure function of
/// (seed, epoch), so multi-worker decode cannot change results.
template <typename Scalar>
class BatchLoader {
public:
  BatchLoader(std::vector<const ImageRecord*> records, std::size_t resolution,
              Preprocess preprocess, std::size_t target_count,
              bool flip_augmentation, std::uint64_t seed)
      : records_(std::move(records)),
        resolution_(resolution),
        preprocess_(preprocess),
        target_count_(target_count),
        flip_(flip_augmentation),
        seed_(seed) {}

  std::size_t size() const { return records_.size(); }
  std::size_t resolution() const { return resolution_; }
  std::size_t target_count() const { return target_count_; }

  /// Deterministic per-epoch visit order.
  std::vector<std::size_t> epoch_order(std::size_t epoch) const {
    std::vector<std::size_t> order(records_.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(detail::mix(detail::mix(seed_, detail::kOrderStream), epoch));
    rng.shuffle(order);
    return order;
  }

  bool flip_coin(std::size_t epoch, std::size_t record_index) const {
    if (!flip_) return false;
    return CounterRng::coin(detail::mix(seed_, detail::kFlipStream), epoch,
                            record_index);
  }

  /// Encodes records order[begin..begin+count) into one batch, applying the
  /// per-(epoch, record) flip coin when augmentation is on.
  EncodedBatch<Scalar> load_batch(const std::vector<std::size_t>& order,
                                  std::size_t begin, std::size_t count,
                                  std::size_t epoch) const {
    EncodedBatch<Scalar> batch;
    batch.images = Tensor<Scalar>({count, resolution_, resolution_, 3});
    batch.targets = Tensor<Scalar>({count, target_count_});
    const std::size_t image_len = resolution_ * resolution_ * 3;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t rec_idx = order[begin + i];
      const ImageRecord& rec = *records_[rec_idx];
      Tensor<Scalar> img =
          encode_image<Scalar>(rec.image_path, resolution_, preprocess_);
      if (flip_coin(epoch, rec_idx)) img = augment_flip(img, true);
      std::copy(img.data(), img.data() + image_len,
                batch.images.data() + i * image_len);
      copy_targets(rec, batch.targets.data() + i * target_count_);
    }
    return batch;
  }

  /// Unaugmented batch over explicit record indices (evaluation path).
  EncodedBatch<Scalar> load_eval_batch(std::size_t begin,
                                       std::size_t count) const {
    EncodedBatch<Scalar> batch;
    batch.images = Tensor<Scalar>({count, resolution_, resolution_, 3});
    batch.targets = Tensor<Scalar>({count, target_count_});
    const std::size_t image_len = resolution_ * resolution_ * 3;
    for (std::size_t i = 0; i < count; ++i) {
      const ImageRecord& rec = *records_[begin + i];
      Tensor<Scalar> img =
          encode_image<Scalar>(rec.image_path, resolution_, preprocess_);
      std::copy(img.data(), img.data() + image_len,
                batch.images.data() + i * image_len);
      copy_targets(rec, batch.targets.data() + i * target_count_);
    }
    return batch;
  }

  /// One record as a size-1 batch with an explicit flip choice. The frozen
  /// feature cache uses this to precompute both flip variants.
  EncodedBatch<Scalar> load_record(std::size_t index, bool flip) const {
    EncodedBatch<Scalar> batch;
    batch.images = Tensor<Scalar>({1, resolution_, resolution_, 3});
    batch.targets = Tensor<Scalar>({1, target_count_});
    const ImageRecord& rec = *records_[index];
    Tensor<Scalar> img =
        encode_image<Scalar>(rec.image_path, resolution_, preprocess_);
    if (flip) img = augment_flip(img, true);
    std::copy(img.data(), img.data() + img.size(), batch.images.data());
    copy_targets(rec, batch.targets.data());
    return batch;
  }

  const ImageRecord& record(std::size_t i) const { return *records_[i]; }

private:
  void copy_targets(const ImageRecord& rec, Scalar* dst) const {
    // target_count_ == 1 selects the overall score (single-task mode).
    for (std::size_t t = 0; t < target_count_; ++t)
      dst[t] = static_cast<Scalar>(rec.normalized_targets[t]);
  }

  std::vector<const ImageRecord*> records_;
  std::size_t resolution_;
  Preprocess preprocess_;
  std::size_t target_count_;
  bool flip_;
  std::uint64_t seed_;
};

}  // namespace aesthnet
