#pragma once

// Umbrella header: the whole toolkit.

#include "aesthnet/config.hpp"
#include "aesthnet/core/csv.hpp"
#include "aesthnet/core/error.hpp"
#include "aesthnet/core/rng.hpp"
#include "aesthnet/core/tensor.hpp"
#include "aesthnet/data/image.hpp"
#include "aesthnet/data/loader.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/data/schema.hpp"
#include "aesthnet/data/split.hpp"
#include "aesthnet/data/statistics.hpp"
#include "aesthnet/data/votes.hpp"
#include "aesthnet/eval/baselines.hpp"
#include "aesthnet/eval/frequency.hpp"
#include "aesthnet/eval/plots.hpp"
#include "aesthnet/eval/report.hpp"
#include "aesthnet/eval/spearman.hpp"
#include "aesthnet/explain/gradcam.hpp"
#include "aesthnet/explain/overlay.hpp"
#include "aesthnet/nn/backbone.hpp"
#include "aesthnet/nn/checkpoint.hpp"
#include "aesthnet/nn/head.hpp"
#include "aesthnet/nn/init.hpp"
#include "aesthnet/nn/layers.hpp"
#include "aesthnet/nn/network.hpp"
#include "aesthnet/pipeline.hpp"
#include "aesthnet/train/adam.hpp"
#include "aesthnet/train/log.hpp"
#include "aesthnet/train/loss.hpp"
#include "aesthnet/train/schedule.hpp"
#include "aesthnet/train/trainer.hpp"
