#include "glt/eval.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include "glt/io.hpp"

namespace glt {

std::string MetricsReport::to_line() const {
    std::ostringstream out;
    out << "rmse_mph=" << format_double(rmse_mph) << " mape_pct=" << format_double(mape_pct)
        << " mae_mph=" << format_double(mae_mph) << " n=" << n
        << " skipped_zero_targets=" << skipped_zero_targets;
    return out.str();
}

MetricsReport compute_metrics(const std::vector<Vector>& predictions,
                              const std::vector<Vector>& targets) {
    require(!predictions.empty(), Errc::empty_batch, "no predictions");
    require(predictions.size() == targets.size(), Errc::shape_mismatch,
            "prediction/target batch sizes differ");

    double sq_sum = 0.0;
    double abs_sum = 0.0;
    double pct_sum = 0.0;
    std::size_t n = 0;
    std::size_t n_pct = 0;
    std::size_t skipped = 0;
    for (std::size_t s = 0; s < predictions.size(); ++s) {
        require(predictions[s].size() == targets[s].size(), Errc::shape_mismatch,
                "prediction/target widths differ");
        for (std::size_t i = 0; i < predictions[s].size(); ++i) {
            const double y = targets[s][i];
            const double r = predictions[s][i] - y;
            sq_sum += r * r;
            abs_sum += std::abs(r);
            ++n;
            if (y > 0.0) {
                pct_sum += std::abs(r) / y;
                ++n_pct;
            } else {
                ++skipped;
            }
        }
    }
    require(n_pct > 0, Errc::all_targets_zero, "MAPE undefined: every target is zero");

    MetricsReport report;
    report.rmse_mph = std::sqrt(sq_sum / static_cast<double>(n));
    report.mae_mph = abs_sum / static_cast<double>(n);
    report.mape_pct = 100.0 * pct_sum / static_cast<double>(n_pct);
    report.n = n;
    report.skipped_zero_targets = skipped;
    return report;
}

std::vector<Vector> predict_all(const GltModel& model, const WindowSet& windows, Exec exec) {
    require(windows.count() > 0, Errc::empty_dataset, "no windows to predict");
    std::vector<Vector> predictions(windows.count());
    parallel_for(windows.count(), exec, [&](std::size_t s) {
        predictions[s] = forward(model, windows, s);
    });
    return predictions;
}

std::vector<Vector> window_targets(const WindowSet& windows) {
    std::vector<Vector> targets;
    targets.reserve(windows.count());
    for (std::size_t s = 0; s < windows.count(); ++s) {
        auto t = windows.target(s);
        targets.emplace_back(t.begin(), t.end());
    }
    return targets;
}

MetricsReport evaluate(const GltModel& model, const SpeedSeries& series_mph,
                       const NormalizationSpec& normalization, int window_len, int horizon,
                       Exec exec) {
    const auto normalized = std::make_shared<SpeedSeries>(normalize(series_mph, normalization));
    const WindowSet windows(normalized, window_len, horizon);
    std::vector<Vector> predictions = predict_all(model, windows, exec);
    for (auto& p : predictions) p = denormalize(std::move(p), normalization);

    const WindowSet windows_mph(std::make_shared<SpeedSeries>(series_mph), window_len, horizon);
    return compute_metrics(predictions, window_targets(windows_mph));
}

BaselineKind parse_baseline(const std::string& name) {
    if (name == "persistence") return BaselineKind::persistence;
    if (name == "historical_mean") return BaselineKind::historical_mean;
    fail(Errc::bad_config, "unknown baseline '" + name + "'");
}

std::vector<Vector> baseline_predict(BaselineKind kind, const SpeedSeries& train_mph,
                                     const WindowSet& windows_mph) {
    std::vector<Vector> predictions;
    predictions.reserve(windows_mph.count());

    if (kind == BaselineKind::persistence) {
        for (std::size_t s = 0; s < windows_mph.count(); ++s) {
            auto last = windows_mph.input_row(s, windows_mph.window_len() - 1);
            predictions.emplace_back(last.begin(), last.end());
        }
        return predictions;
    }

    // historical_mean: per-link mean of each time-of-day slot over training.
    const int spd = train_mph.steps_per_day();
    const std::size_t n = train_mph.links();
    Matrix slot_mean(static_cast<std::size_t>(spd), n);
    std::vector<std::size_t> slot_count(static_cast<std::size_t>(spd), 0);
    for (std::size_t t = 0; t < train_mph.steps(); ++t) {
        const std::size_t slot = (static_cast<std::size_t>(train_mph.start_index) + t) %
                                 static_cast<std::size_t>(spd);
        auto row = train_mph.values.row(t);
        auto acc = slot_mean.row(slot);
        for (std::size_t j = 0; j < n; ++j) acc[j] += row[j];
        ++slot_count[slot];
    }
    for (int s = 0; s < spd; ++s) {
        require(slot_count[static_cast<std::size_t>(s)] > 0, Errc::too_short,
                "historical mean needs every time-of-day slot in training data");
        auto acc = slot_mean.row(static_cast<std::size_t>(s));
        for (std::size_t j = 0; j < n; ++j)
            acc[j] /= static_cast<double>(slot_count[static_cast<std::size_t>(s)]);
    }

    const auto& series = windows_mph.source();
    for (std::size_t s = 0; s < windows_mph.count(); ++s) {
        const std::size_t target_step = windows_mph.t_index(s) +
                                        static_cast<std::size_t>(windows_mph.horizon());
        const std::size_t slot = (static_cast<std::size_t>(series.start_index) + target_step) %
                                 static_cast<std::size_t>(spd);
        auto row = slot_mean.row(slot);
        predictions.emplace_back(row.begin(), row.end());
    }
    return predictions;
}

void export_trace(const GltModel& model, const SpeedSeries& series_mph,
                  const NormalizationSpec& normalization, int window_len, int horizon,
                  std::size_t link_id, std::size_t day_index, const std::string& path) {
    require(link_id < series_mph.links(), Errc::bad_link,
            "link " + std::to_string(link_id) + " outside 0.." +
                std::to_string(series_mph.links() - 1));
    const auto spd = static_cast<std::size_t>(series_mph.steps_per_day());
    const std::size_t day_begin = day_index * spd;
    require(day_begin + spd <= series_mph.steps(), Errc::bad_day,
            "day " + std::to_string(day_index) + " not fully covered by the series");
    // Every step of the day needs a full window of history before it.
    require(day_begin + 1 >= static_cast<std::size_t>(window_len) +
                                 static_cast<std::size_t>(horizon),
            Errc::bad_day, "day " + std::to_string(day_index) +
                               " lacks window history; pick a later day");

    const auto normalized = std::make_shared<SpeedSeries>(normalize(series_mph, normalization));
    const WindowSet windows(normalized, window_len, horizon);

    std::ostringstream out;
    out << "time_step,ground_truth_mph,predicted_mph\n";
    for (std::size_t s = 0; s < spd; ++s) {
        const std::size_t t = day_begin + s;  // absolute step being predicted
        const std::size_t sample = t - static_cast<std::size_t>(horizon) -
                                   (static_cast<std::size_t>(window_len) - 1);
        Vector pred = denormalize(forward(model, windows, sample), normalization);
        out << s << ',' << format_double(series_mph.values(t, link_id)) << ','
            << format_double(pred[link_id]) << '\n';
    }
    write_text_file(path, out.str());
}

}  // namespace glt
