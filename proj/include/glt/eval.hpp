#pragma once

#include <string>
#include <vector>

#include "glt/data.hpp"
#include "glt/model.hpp"
#include "glt/parallel.hpp"

namespace glt {

struct MetricsReport {
    double rmse_mph = 0.0;
    double mape_pct = 0.0;  // over entries with a nonzero target
    double mae_mph = 0.0;
    std::size_t n = 0;  // samples * links
    std::size_t skipped_zero_targets = 0;

    std::string to_line() const;
};

// RMSE/MAE over all entries; MAPE in percent over entries with target > 0.
MetricsReport compute_metrics(const std::vector<Vector>& predictions,
                              const std::vector<Vector>& targets);

// Model predictions for every window, in the series' own units.
std::vector<Vector> predict_all(const GltModel& model, const WindowSet& windows,
                                Exec exec = Exec::parallel);

// Denormalized model predictions against mph targets. The series passed in
// is in mph; inputs are normalized internally before the forward pass.
MetricsReport evaluate(const GltModel& model, const SpeedSeries& series_mph,
                       const NormalizationSpec& normalization, int window_len, int horizon,
                       Exec exec = Exec::parallel);

enum class BaselineKind { persistence, historical_mean };

BaselineKind parse_baseline(const std::string& name);

// Reference predictors in mph. persistence repeats the last input row;
// historical_mean uses the training series' per-link time-of-day mean.
std::vector<Vector> baseline_predict(BaselineKind kind, const SpeedSeries& train_mph,
                                     const WindowSet& windows_mph);

std::vector<Vector> window_targets(const WindowSet& windows);

// One day of ground truth vs prediction for a single link, written as
// time_step,ground_truth_mph,predicted_mph rows.
void export_trace(const GltModel& model, const SpeedSeries& series_mph,
                  const NormalizationSpec& normalization, int window_len, int horizon,
                  std::size_t link_id, std::size_t day_index, const std::string& path);

}  // namespace glt
