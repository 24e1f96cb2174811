#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include "aesthnet/core/error.hpp"
#include "aesthnet/data/record.hpp"
#include "aesthnet/train/trainer.hpp"

namespace aesthnet {

/// Single chronological CSV: one row per step, plus a summary row at each
/// epoch boundary carrying val_loss/val_rho (train_loss empty there; val
/// fields empty on step rows). NaN serializes as an empty field.
inline void write_training_log(const TrainState& state,
                               const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "step,epoch,stage,lr,train_loss,val_loss,val_rho\n";
  auto opt = [](double v) {
    return std::isnan(v) ? std::string() : detail::format_value(v);
  };
  std::size_t next_epoch_row = 0;
  for (const StepRecord& s : state.steps) {
    out << s.step << "," << s.epoch << "," << s.stage << ","
        << detail::format_value(s.lr) << "," << detail::format_value(s.train_loss)
        << ",,\n";
    while (next_epoch_row < state.epochs.size() &&
           state.epochs[next_epoch_row].step == s.step) {
      const EpochRecord& e = state.epochs[next_epoch_row];
      out << e.step << "," << e.epoch << "," << e.stage << ",,,"
          << opt(e.val_loss) << "," << opt(e.val_rho) << "\n";
      ++next_epoch_row;
    }
  }
  if (!out) throw IoError("failed writing training log: " + path);
}

}  // namespace aesthnet
