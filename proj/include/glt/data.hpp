#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>

#include "glt/matrix.hpp"

namespace glt {

// T x N history of link speeds (mph) on a fixed interval grid.
// start_index is the time-of-day slot of row 0, so slices taken out of a
// longer series keep their alignment to the day.
struct SpeedSeries {
    Matrix values;
    int interval_minutes = 5;
    int start_index = 0;

    std::size_t steps() const { return values.rows(); }
    std::size_t links() const { return values.cols(); }
    int steps_per_day() const { return 1440 / interval_minutes; }
};

// Full-series invariants: finite nonnegative entries, interval divides the
// day, N >= 2 and at least one whole day of history. Slices produced by
// chronological_split are allowed to be shorter than a day and skip this.
void validate_full_series(const SpeedSeries& series);

struct RoadNetworkSpec {
    Matrix adjacency;  // N x N binary, symmetric, zero diagonal
    Matrix distance;   // N x N miles, symmetric, zero diagonal
};

void validate_network(const RoadNetworkSpec& net);

struct DatasetSplit {
    SpeedSeries train;
    SpeedSeries validation;
    SpeedSeries test;
    std::array<double, 3> fractions{0.7, 0.2, 0.1};
};

// One supervised sample: M input rows and the row H steps past the last one.
struct WindowSample {
    Matrix inputs;        // M x N
    Vector target;        // N
    std::size_t t_index;  // index of the last input row in the source series
};

// Lazy view over all windows of a series; rows are spans into the source so
// a window set over a year of data costs nothing beyond the series itself.
class WindowSet {
public:
    WindowSet(std::shared_ptr<const SpeedSeries> source, int window_len, int horizon);

    std::size_t count() const { return count_; }
    int window_len() const { return window_len_; }
    int horizon() const { return horizon_; }
    std::size_t links() const { return source_->links(); }
    const SpeedSeries& source() const { return *source_; }

    std::size_t t_index(std::size_t sample) const {
        return static_cast<std::size_t>(window_len_) - 1 + sample;
    }
    // Row m (0..M-1) of the sample's input block.
    std::span<const double> input_row(std::size_t sample, int m) const {
        return source_->values.row(sample + static_cast<std::size_t>(m));
    }
    std::span<const double> target(std::size_t sample) const {
        return source_->values.row(t_index(sample) + static_cast<std::size_t>(horizon_));
    }

    WindowSample sample(std::size_t index) const;

private:
    std::shared_ptr<const SpeedSeries> source_;
    int window_len_;
    int horizon_;
    std::size_t count_;
};

struct NormalizationSpec {
    enum class Mode { none, max_scale };
    Mode mode = Mode::max_scale;
    double scale = 60.0;  // mph
};

NormalizationSpec parse_normalization(const std::string& mode, double scale);

enum class Topology { chain, ring, grid };

Topology parse_topology(const std::string& name);
const char* to_string(Topology topology);

// --- operations ---------------------------------------------------------

// Zero readings are loop-detector dropouts: replace each 0 with the link's
// last valid value, or the link's mean of valid values if none precedes.
// Links with no valid readings at all are left as zeros.
void impute_zero_readings(Matrix& values);

SpeedSeries load_speed_csv(const std::string& path, int interval_minutes,
                           bool impute_zeros = true);
void write_speed_csv(const std::string& path, const SpeedSeries& series);

DatasetSplit chronological_split(const SpeedSeries& series,
                                 std::array<double, 3> fractions = {0.7, 0.2, 0.1});

WindowSet make_windows(std::shared_ptr<const SpeedSeries> series, int window_len, int horizon);
inline WindowSet make_windows(const SpeedSeries& series, int window_len, int horizon) {
    return make_windows(std::make_shared<SpeedSeries>(series), window_len, horizon);
}

struct SynthOptions {
    int n_links = 20;
    int days = 7;
    std::uint64_t seed = 0;
    Topology topology = Topology::chain;
    bool noiseless = false;
    int interval_minutes = 5;
};

std::pair<SpeedSeries, RoadNetworkSpec> generate_synthetic(const SynthOptions& opts);

SpeedSeries normalize(const SpeedSeries& series, const NormalizationSpec& spec);
SpeedSeries denormalize(const SpeedSeries& series, const NormalizationSpec& spec);
Vector denormalize(Vector values, const NormalizationSpec& spec);

}  // namespace glt
