#include "glt/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "glt/io.hpp"
#include "glt/rng.hpp"

namespace glt {

void validate_full_series(const SpeedSeries& series) {
    require(series.interval_minutes > 0 && 1440 % series.interval_minutes == 0,
            Errc::bad_interval,
            "interval of " + std::to_string(series.interval_minutes) +
                " minutes does not divide the day");
    require(series.links() >= 2, Errc::bad_shape, "need at least 2 links");
    require(all_finite(series.values), Errc::non_finite, "speed series has non-finite entries");
    for (std::size_t i = 0; i < series.values.size(); ++i)
        require(series.values.data()[i] >= 0.0, Errc::negative_speed,
                "negative speed reading");
    require(series.steps() >= static_cast<std::size_t>(series.steps_per_day()),
            Errc::too_short,
            "series covers " + std::to_string(series.steps()) + " steps, need a full day (" +
                std::to_string(series.steps_per_day()) + ")");
}

void validate_network(const RoadNetworkSpec& net) {
    const std::size_t n = net.adjacency.rows();
    require(net.adjacency.cols() == n && net.distance.rows() == n && net.distance.cols() == n,
            Errc::bad_shape, "adjacency/distance must be square and of equal size");
    require(is_symmetric(net.adjacency), Errc::non_symmetric, "adjacency must be symmetric");
    require(is_symmetric(net.distance), Errc::non_symmetric, "distance must be symmetric");
    require(all_finite(net.distance), Errc::non_finite, "distance has non-finite entries");
    for (std::size_t i = 0; i < n; ++i) {
        require(net.adjacency(i, i) == 0.0, Errc::bad_shape, "adjacency diagonal must be zero");
        require(net.distance(i, i) == 0.0, Errc::bad_shape, "distance diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
            const double a = net.adjacency(i, j);
            require(a == 0.0 || a == 1.0, Errc::bad_shape, "adjacency entries must be 0/1");
            require(net.distance(i, j) >= 0.0, Errc::bad_shape, "distances must be nonnegative");
            if (a == 1.0)
                require(net.distance(i, j) > 0.0, Errc::bad_shape,
                        "adjacent links must have positive distance");
        }
    }
}

void impute_zero_readings(Matrix& values) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < values.rows(); ++i) {
            if (values(i, j) != 0.0) {
                sum += values(i, j);
                ++count;
            }
        }
        if (count == 0) continue;  // dead sensor, nothing to impute from
        const double mean = sum / static_cast<double>(count);
        double last_valid = mean;
        bool seen_valid = false;
        for (std::size_t i = 0; i < values.rows(); ++i) {
            if (values(i, j) != 0.0) {
                last_valid = values(i, j);
                seen_valid = true;
            } else {
                values(i, j) = seen_valid ? last_valid : mean;
            }
        }
    }
}

SpeedSeries load_speed_csv(const std::string& path, int interval_minutes, bool impute_zeros) {
    std::ifstream in(path);
    require(in.good(), Errc::io_error, "cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t cols = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (cols == 0) cols = fields.size();
        require(fields.size() == cols, Errc::malformed_csv,
                path + ": row " + std::to_string(line_no) + " has " +
                    std::to_string(fields.size()) + " cells, expected " + std::to_string(cols));
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t j = 0; j < fields.size() && numeric; ++j)
            numeric = parse_double(fields[j], row[j]);
        if (!numeric) {
            // The first row may be a header; anything later is malformed.
            require(rows.empty(), Errc::malformed_csv,
                    path + ": non-numeric cell in row " + std::to_string(line_no));
            continue;
        }
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), Errc::malformed_csv, path + ": no data rows");

    Matrix values(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            require(std::isfinite(rows[i][j]), Errc::malformed_csv,
                    path + ": non-finite cell");
            require(rows[i][j] >= 0.0, Errc::negative_speed,
                    path + ": negative speed in row " + std::to_string(i + 1));
            values(i, j) = rows[i][j];
        }

    if (impute_zeros) impute_zero_readings(values);

    SpeedSeries series{std::move(values), interval_minutes, 0};
    validate_full_series(series);
    return series;
}

void write_speed_csv(const std::string& path, const SpeedSeries& series) {
    write_matrix_csv(path, series.values);
}

DatasetSplit chronological_split(const SpeedSeries& series, std::array<double, 3> fractions) {
    double sum = 0.0;
    for (double f : fractions) {
        require(f > 0.0, Errc::bad_fractions, "fractions must be positive");
        sum += f;
    }
    require(std::abs(sum - 1.0) <= 1e-9, Errc::bad_fractions, "fractions must sum to 1");

    const std::size_t total = series.steps();
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(total)));
    const std::size_t n_val =
        static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(total)));
    require(n_train + n_val <= total, Errc::bad_fractions, "split exceeds series length");
    const std::size_t n_test = total - n_train - n_val;

    auto slice = [&](std::size_t offset, std::size_t len) {
        Matrix values(len, series.links());
        for (std::size_t i = 0; i < len; ++i) {
            auto src = series.values.row(offset + i);
            std::copy(src.begin(), src.end(), values.row(i).begin());
        }
        const int spd = series.steps_per_day();
        const int start =
            static_cast<int>((static_cast<std::size_t>(series.start_index) + offset) %
                             static_cast<std::size_t>(spd));
        return SpeedSeries{std::move(values), series.interval_minutes, start};
    };

    DatasetSplit split;
    split.train = slice(0, n_train);
    split.validation = slice(n_train, n_val);
    split.test = slice(n_train + n_val, n_test);
    split.fractions = fractions;
    return split;
}

WindowSet::WindowSet(std::shared_ptr<const SpeedSeries> source, int window_len, int horizon)
    : source_(std::move(source)), window_len_(window_len), horizon_(horizon) {
    require(window_len_ >= 1, Errc::bad_params, "window length must be >= 1");
    require(horizon_ >= 1, Errc::bad_params, "horizon must be >= 1");
    const std::size_t need = static_cast<std::size_t>(window_len_) + horizon_;
    require(source_->steps() >= need, Errc::too_short,
            "series of " + std::to_string(source_->steps()) + " steps too short for M=" +
                std::to_string(window_len_) + ", H=" + std::to_string(horizon_));
    count_ = source_->steps() - need + 1;
}

WindowSample WindowSet::sample(std::size_t index) const {
    WindowSample s;
    s.inputs = Matrix(static_cast<std::size_t>(window_len_), links());
    for (int m = 0; m < window_len_; ++m) {
        auto src = input_row(index, m);
        std::copy(src.begin(), src.end(), s.inputs.row(static_cast<std::size_t>(m)).begin());
    }
    auto tgt = target(index);
    s.target.assign(tgt.begin(), tgt.end());
    s.t_index = t_index(index);
    return s;
}

WindowSet make_windows(std::shared_ptr<const SpeedSeries> series, int window_len, int horizon) {
    return WindowSet(std::move(series), window_len, horizon);
}

NormalizationSpec parse_normalization(const std::string& mode, double scale) {
    NormalizationSpec spec;
    if (mode == "none") {
        spec.mode = NormalizationSpec::Mode::none;
    } else if (mode == "max_scale") {
        spec.mode = NormalizationSpec::Mode::max_scale;
    } else {
        fail(Errc::bad_config, "unknown normalization mode '" + mode + "'");
    }
    require(scale > 0.0, Errc::bad_scale, "normalization scale must be positive");
    spec.scale = scale;
    return spec;
}

Topology parse_topology(const std::string& name) {
    if (name == "chain") return Topology::chain;
    if (name == "ring") return Topology::ring;
    if (name == "grid") return Topology::grid;
    fail(Errc::bad_config, "unknown topology '" + name + "'");
}

const char* to_string(Topology topology) {
    switch (topology) {
        case Topology::chain: return "chain";
        case Topology::ring: return "ring";
        case Topology::grid: return "grid";
    }
    return "?";
}

namespace {

// Per-link average day: a 60 mph free-flow baseline with Gaussian-shaped
// rush-hour dips plus two intraday harmonics, so consecutive steps move the
// way loop-detector feeds do instead of sitting on a flat line.
struct LinkProfile {
    double morning_depth;
    double evening_depth;
    double morning_center_min;
    double evening_center_min;
    double morning_width_min;
    double evening_width_min;
    double wave_amp[2];
    double wave_cycles[2];  // cycles per day
    double wave_phase[2];
};

double profile_speed(const LinkProfile& p, double time_of_day_min) {
    auto dip = [&](double depth, double center, double width) {
        const double z = (time_of_day_min - center) / width;
        return depth * std::exp(-0.5 * z * z);
    };
    double speed = 60.0 - dip(p.morning_depth, p.morning_center_min, p.morning_width_min) -
                   dip(p.evening_depth, p.evening_center_min, p.evening_width_min);
    for (int w = 0; w < 2; ++w)
        speed += p.wave_amp[w] *
                 std::sin(2.0 * std::numbers::pi *
                              (p.wave_cycles[w] * time_of_day_min / 1440.0) +
                          p.wave_phase[w]);
    return speed;
}

RoadNetworkSpec make_topology(int n, Topology topology) {
    Matrix adjacency(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    auto connect = [&](int a, int b) {
        adjacency(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = 1.0;
        adjacency(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) = 1.0;
    };
    switch (topology) {
        case Topology::chain:
            for (int i = 0; i + 1 < n; ++i) connect(i, i + 1);
            break;
        case Topology::ring:
            for (int i = 0; i + 1 < n; ++i) connect(i, i + 1);
            connect(n - 1, 0);
            break;
        case Topology::grid: {
            int rows = static_cast<int>(std::sqrt(static_cast<double>(n)));
            if (rows < 1) rows = 1;
            const int cols = (n + rows - 1) / rows;
            for (int v = 0; v < n; ++v) {
                const int r = v / cols;
                const int c = v % cols;
                if (c + 1 < cols && v + 1 < n && (v + 1) / cols == r) connect(v, v + 1);
                if ((r + 1) * cols + c < n) connect(v, (r + 1) * cols + c);
            }
            break;
        }
    }
    // Unit-mile nominal spacing on every edge.
    Matrix distance(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (adjacency(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == 1.0)
                distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1.0;
    return RoadNetworkSpec{std::move(adjacency), std::move(distance)};
}

}  // namespace

std::pair<SpeedSeries, RoadNetworkSpec> generate_synthetic(const SynthOptions& opts) {
    require(opts.n_links >= 2, Errc::bad_shape, "need at least 2 links");
    require(opts.days >= 2, Errc::bad_shape, "need at least 2 days");
    require(opts.interval_minutes > 0 && 1440 % opts.interval_minutes == 0, Errc::bad_interval,
            "interval must divide the day");

    const int n = opts.n_links;
    const int spd = 1440 / opts.interval_minutes;
    const std::size_t total = static_cast<std::size_t>(opts.days) * spd;

    RoadNetworkSpec net = make_topology(n, opts.topology);

    Rng rng(opts.seed);
    std::vector<LinkProfile> profiles(static_cast<std::size_t>(n));
    for (auto& p : profiles) {
        p.morning_depth = rng.uniform(18.0, 32.0);
        p.evening_depth = rng.uniform(18.0, 32.0);
        p.morning_center_min = rng.uniform(7.5 * 60.0, 8.5 * 60.0);
        p.evening_center_min = rng.uniform(17.0 * 60.0, 18.0 * 60.0);
        p.morning_width_min = rng.uniform(35.0, 60.0);
        p.evening_width_min = rng.uniform(35.0, 60.0);
        for (int w = 0; w < 2; ++w) {
            p.wave_amp[w] = rng.uniform(2.0, 4.0);
            p.wave_cycles[w] = std::floor(rng.uniform(9.0, 16.0));
            p.wave_phase[w] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
    }

    // Give the first non-adjacent pair identical noiseless profiles so the
    // long-term similarity mask always has a non-geographic edge to find.
    for (int i = 0; i < n; ++i) {
        bool done = false;
        for (int j = i + 1; j < n; ++j) {
            if (net.adjacency(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) == 0.0) {
                profiles[static_cast<std::size_t>(j)] = profiles[static_cast<std::size_t>(i)];
                done = true;
                break;
            }
        }
        if (done) break;
    }

    Matrix values(total, static_cast<std::size_t>(n));
    // Bounded slowly-drifting noise (AR(1) with a half-life of about an
    // hour) models day-specific congestion levels: any one day wanders away
    // from the average profile while neighbouring steps stay close. One
    // stream per link keeps the draw order independent of the day count.
    const double kNoiseClamp = 6.0;
    const double kNoisePersistence = 0.99;
    for (int j = 0; j < n; ++j) {
        const LinkProfile& p = profiles[static_cast<std::size_t>(j)];
        double noise = 0.0;
        for (std::size_t t = 0; t < total; ++t) {
            const double tod_min =
                static_cast<double>((t % static_cast<std::size_t>(spd)) *
                                    static_cast<std::size_t>(opts.interval_minutes));
            double speed = profile_speed(p, tod_min);
            if (!opts.noiseless) {
                noise = std::clamp(kNoisePersistence * noise + rng.uniform(-0.9, 0.9),
                                   -kNoiseClamp, kNoiseClamp);
                speed += noise;
            }
            values(t, static_cast<std::size_t>(j)) = std::clamp(speed, 0.0, 70.0);
        }
    }

    SpeedSeries series{std::move(values), opts.interval_minutes, 0};
    validate_full_series(series);
    return {std::move(series), std::move(net)};
}

SpeedSeries normalize(const SpeedSeries& series, const NormalizationSpec& spec) {
    require(spec.scale > 0.0, Errc::bad_scale, "normalization scale must be positive");
    if (spec.mode == NormalizationSpec::Mode::none) return series;
    SpeedSeries out = series;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values.data()[i] /= spec.scale;
    return out;
}

SpeedSeries denormalize(const SpeedSeries& series, const NormalizationSpec& spec) {
    require(spec.scale > 0.0, Errc::bad_scale, "normalization scale must be positive");
    if (spec.mode == NormalizationSpec::Mode::none) return series;
    SpeedSeries out = series;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values.data()[i] *= spec.scale;
    return out;
}

Vector denormalize(Vector values, const NormalizationSpec& spec) {
    require(spec.scale > 0.0, Errc::bad_scale, "normalization scale must be positive");
    if (spec.mode == NormalizationSpec::Mode::none) return values;
    for (double& v : values) v *= spec.scale;
    return values;
}

}  // namespace glt
