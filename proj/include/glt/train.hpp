#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "glt/data.hpp"
#include "glt/model.hpp"
#include "glt/parallel.hpp"

namespace glt {

struct TrainConfig {
    double learning_rate = 1e-5;
    int batch_size = 10;
    int max_epochs = 200;
    double rmsprop_alpha = 0.99;
    double rmsprop_epsilon = 1e-8;
    int early_stop_patience = 10;
    std::uint64_t seed = 0;
    double clip_norm = 0.0;  // 0 disables gradient clipping
    Exec exec = Exec::parallel;
};

void validate_train_config(const TrainConfig& config);

enum class StopReason { max_epochs, early_stop };

const char* to_string(StopReason reason);

struct EpochStats {
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
    double seconds = 0.0;  // wall time; serialized to a sidecar, never the log
};

struct TrainLog {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;
    StopReason stop_reason = StopReason::max_epochs;

    double best_val_mse() const;
};

// (1/n) sum (y - y')^2 with n = batch size * N.
double mse_loss(const std::vector<Vector>& predictions, const std::vector<Vector>& targets);

struct BackwardResult {
    double loss = 0.0;
    ParamSet grads;
};

// Loss and exact gradients for a batch of window samples. Per-sample
// passes may run in parallel; gradients are reduced in sample order so the
// result is independent of the thread count.
BackwardResult backward(const GltModel& model, const WindowSet& windows,
                        std::span<const std::size_t> samples, Exec exec = Exec::parallel);

// s <- alpha s + (1-alpha) g^2;  theta <- theta - lr g / (sqrt(s) + eps).
// opt_state matches the parameter shapes and starts at zero.
void rmsprop_update(GltModel& model, const ParamSet& grads, ParamSet& opt_state,
                    const TrainConfig& config);

// Mean squared validation error of the model over a window set.
double validation_mse(const GltModel& model, const WindowSet& windows,
                      Exec exec = Exec::parallel);

struct TrainResult {
    GltModel model;  // parameters of the best validation epoch
    TrainLog log;
};

using EpochCallback = std::function<void(const EpochStats&)>;

TrainResult train(GltModel model, const WindowSet& train_windows,
                  const WindowSet& val_windows, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// --- gradient checking -------------------------------------------------------

struct GradCheckBlock {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t flagged = 0;
};

struct GradCheckReport {
    std::vector<GradCheckBlock> blocks;
    double max_rel_error = 0.0;
    std::size_t flagged = 0;
    bool ok = true;
};

// Central finite differences against the analytic gradients, every entry.
// rel(a, f) = |a - f| / max(|a|, |f|, 1e-6): sub-micro entries are compared
// on the absolute scale, where the difference quotient itself is noise.
GradCheckReport gradient_check(const GltModel& model, const WindowSet& windows,
                               std::span<const std::size_t> samples, double step,
                               double tolerance);

// Same check against caller-supplied gradients instead of backward()'s.
GradCheckReport gradient_check_against(const GltModel& model, const WindowSet& windows,
                                       std::span<const std::size_t> samples, double step,
                                       double tolerance, const ParamSet& analytic);

}  // namespace glt
