#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "aesthnet/core/error.hpp"
#include "aesthnet/core/tensor.hpp"
#include "aesthnet/data/loader.hpp"
#include "aesthnet/eval/spearman.hpp"
#include "aesthnet/nn/network.hpp"
#include "aesthnet/train/adam.hpp"
#include "aesthnet/train/loss.hpp"
#include "aesthnet/train/schedule.hpp"

namespace aesthnet {

struct StepRecord {
  std::uint64_t step = 0;   // global step across stages
  std::size_t epoch = 0;    // global epoch across stages
  int stage = 1;
  double lr = 0.0;
  double train_loss = 0.0;
};

struct EpochRecord {
  std::uint64_t step = 0;  // last global step of the epoch
  std::size_t epoch = 0;
  int stage = 1;
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double val_rho = std::numeric_limits<double>::quiet_NaN();
};

struct TrainState {
  std::uint64_t seed = 0;
  std::uint64_t global_step = 0;
  std::size_t epoch = 0;
  std::vector<StepRecord> steps;        // append-only
  std::vector<EpochRecord> epochs;      // append-only
};

struct TrainOptions {
  bool cache_frozen_features = true;
  std::vector<double> target_weights;  // empty = unweighted (the default)
  std::ostream* progress = nullptr;
};

namespace detail {

/// Pooled features for every record and both flip variants, computed once
/// while the backbone is frozen. Values are bit-identical to running the
/// full forward because per-sample conv work is independent of batching.
template <typename S>
struct FeatureCache {
  Tensor<S> features[2];  // [n, C]; variant 1 empty when flips are unused
  Tensor<S> targets;      // [n, M]

  static FeatureCache build(const MultiTaskNetwork<S>& net,
                            const BatchLoader<S>& loader, bool with_flip) {
    FeatureCache cache;
    const std::size_t n = loader.size();
    const std::size_t m = loader.target_count();
    cache.targets = Tensor<S>({n, m});
    for (int variant = 0; variant < (with_flip ? 2 : 1); ++variant)
      cache.features[variant] = Tensor<S>({n, kVggFeatureChannels});
    for (std::size_t i = 0; i < n; ++i) {
      for (int variant = 0; variant < (with_flip ? 2 : 1); ++variant) {
        EncodedBatch<S> one = loader.load_record(i, variant == 1);
        Tensor<S> x = nhwc_to_nchw(one.images);
        Tensor<S> fmap = net.backbone().forward(x);
        Tensor<S> feat = global_avg_pool(fmap);
        std::copy(feat.data(), feat.data() + kVggFeatureChannels,
                  cache.features[variant].data() + i * kVggFeatureChannels);
        if (variant == 0)
          std::copy(one.targets.data(), one.targets.data() + m,
                    cache.targets.data() + i * m);
      }
    }
    return cache;
  }

  /// Gathers rows for one batch with per-record flip choices.
  void gather(const std::vector<std::size_t>& order, std::size_t begin,
              std::size_t count, const std::vector<bool>& flips,
              Tensor<S>& features_out, Tensor<S>& targets_out) const {
    const std::size_t c = kVggFeatureChannels;
    const std::size_t m = targets.dim(1);
    features_out = Tensor<S>({count, c});
    targets_out = Tensor<S>({count, m});
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t rec = order[begin + i];
      const Tensor<S>& src =
          flips[i] && !features[1].empty() ? features[1] : features[0];
      std::copy(src.data() + rec * c, src.data() + (rec + 1) * c,
                features_out.data() + i * c);
      std::copy(targets.data() + rec * m, targets.data() + (rec + 1) * m,
                targets_out.data() + i * m);
    }
  }
};

}  // namespace detail

/// Validation pass: joint-mean MSE plus Spearman ρ of the overall column.
/// ρ is NaN when undefined (constant predictions) or the split is empty.
template <typename S>
std::pair<double, double> validate(const MultiTaskNetwork<S>& net,
                                   const BatchLoader<S>& val_loader,
                                   std::size_t batch_size,
                                   const std::vector<double>& weights = {}) {
  const std::size_t n = val_loader.size();
  if (n == 0)
    return {std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN()};
  double loss_acc = 0.0;
  std::size_t seen = 0;
  std::vector<double> pred_overall, true_overall;
  pred_overall.reserve(n);
  true_overall.reserve(n);
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t count = std::min(batch_size, n - begin);
    EncodedBatch<S> batch = val_loader.load_eval_batch(begin, count);
    Tensor<S> pred = net.predict(batch);
    loss_acc += mse_loss(pred, batch.targets, weights) *
                static_cast<double>(pred.size());
    seen += pred.size();
    const std::size_t m = pred.dim(1);
    for (std::size_t i = 0; i < count; ++i) {
      pred_overall.push_back(static_cast<double>(pred[i * m]));
      true_overall.push_back(static_cast<double>(batch.targets[i * m]));
    }
  }
  double rho = std::numeric_limits<double>::quiet_NaN();
  try {
    rho = spearman_rho(true_overall, pred_overall);
  } catch (const UndefinedCorrelationError&) {
  }
  return {loss_acc / static_cast<double>(seen), rho};
}

/// Runs one optimization stage in place. The trainable mask is rebuilt from
/// the stage config; the optimizer is fresh (stage-local Adam state) and the
/// schedule's step counter restarts at zero.
template <typename S>
void train_stage(MultiTaskNetwork<S>& net, const BatchLoader<S>& train_loader,
                 const BatchLoader<S>& val_loader, const StageConfig& stage,
                 TrainState& state, const TrainOptions& options = {}) {
  if (train_loader.size() == 0)
    throw ValidationError("training split is empty");

  net.freeze_backbone();
  net.set_trainable(head_layer_names(), false);
  net.set_trainable(stage.trainable, true);

  AdamOptimizer<S> optimizer(stage.beta1, stage.beta2, stage.epsilon);
  auto params = net.parameters();

  const bool frozen_backbone =
      net.backbone().lowest_trainable() == kVggConvCount;
  const bool use_cache = frozen_backbone && options.cache_frozen_features;

  detail::FeatureCache<S> train_cache, val_cache;
  if (use_cache) {
    if (options.progress)
      *options.progress << "stage " << stage.stage_id
                        << ": caching frozen-backbone features for "
                        << train_loader.size() << "+" << val_loader.size()
                        << " records\n";
    train_cache =
        detail::FeatureCache<S>::build(net, train_loader, /*with_flip=*/true);
    if (val_loader.size() > 0)
      val_cache =
          detail::FeatureCache<S>::build(net, val_loader, /*with_flip=*/false);
  }

  const std::size_t n = train_loader.size();
  std::uint64_t local_step = 0;
  for (std::size_t e = 0; e < stage.epochs; ++e) {
    const std::size_t epoch = state.epoch;
    const std::vector<std::size_t> order = train_loader.epoch_order(epoch);
    for (std::size_t begin = 0; begin < n; begin += stage.batch_size) {
      const std::size_t count = std::min(stage.batch_size, n - begin);
      const double lr = lr_schedule(stage, local_step);

      Tensor<S> pred, targets;
      typename RegressionHead<S>::Cache head_cache;
      typename MultiTaskNetwork<S>::ForwardCache full_cache;
      if (use_cache) {
        std::vector<bool> flips(count);
        for (std::size_t i = 0; i < count; ++i)
          flips[i] = train_loader.flip_coin(epoch, order[begin + i]);
        Tensor<S> features;
        train_cache.gather(order, begin, count, flips, features, targets);
        pred = net.forward_features(features, true, state.seed,
                                    state.global_step, &head_cache);
      } else {
        EncodedBatch<S> batch =
            train_loader.load_batch(order, begin, count, epoch);
        targets = std::move(batch.targets);
        Tensor<S> x = nhwc_to_nchw(batch.images);
        pred = net.forward(x, true, state.seed, state.global_step, &full_cache);
      }

      const double loss = mse_loss(pred, targets, options.target_weights);
      if (!std::isfinite(loss))
        throw NumericError("non-finite training loss at step " +
                           std::to_string(state.global_step));

      net.zero_grad();
      Tensor<S> d_pred = mse_loss_grad(pred, targets, options.target_weights);
      if (use_cache) {
        net.head().backward(head_cache, d_pred, /*want_feature_grad=*/false);
      } else {
        net.backward(full_cache, d_pred);
      }
      optimizer.step(params, lr);

      state.steps.push_back(
          {state.global_step, epoch, stage.stage_id, lr, loss});
      ++state.global_step;
      ++local_step;
    }

    EpochRecord er;
    er.step = state.global_step == 0 ? 0 : state.global_step - 1;
    er.epoch = epoch;
    er.stage = stage.stage_id;
    if (val_loader.size() > 0) {
      if (use_cache) {
        Tensor<S> val_pred = net.forward_features(val_cache.features[0], false);
        er.val_loss =
            mse_loss(val_pred, val_cache.targets, options.target_weights);
        std::vector<double> po, to;
        const std::size_t m = val_pred.dim(1);
        for (std::size_t i = 0; i < val_loader.size(); ++i) {
          po.push_back(static_cast<double>(val_pred[i * m]));
          to.push_back(static_cast<double>(val_cache.targets[i * m]));
        }
        try {
          er.val_rho = spearman_rho(to, po);
        } catch (const UndefinedCorrelationError&) {
        }
      } else {
        auto [vl, vr] = validate(net, val_loader, stage.batch_size,
                                 options.target_weights);
        er.val_loss = vl;
        er.val_rho = vr;
      }
    }
    state.epochs.push_back(er);
    if (options.progress)
      *options.progress << "stage " << stage.stage_id << " epoch " << epoch
                        << ": val_loss=" << er.val_loss
                        << " val_rho=" << er.val_rho << "\n";
    ++state.epoch;
  }
}

}  // namespace aesthnet
