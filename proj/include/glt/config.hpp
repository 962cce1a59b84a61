#pragma once

#include <string>
#include <vector>

#include "glt/data.hpp"
#include "glt/graph.hpp"
#include "glt/train.hpp"

namespace glt {

// Everything one experiment needs, loadable from a flat sectioned
// key=value file; each key can be overridden by a CLI flag of the same name.
struct RunConfig {
    // [paths]
    std::string speed_csv;
    std::string adjacency_csv;
    std::string distance_csv;
    std::string out_dir = "out";
    std::string masks_dir;  // optional: load s_u_<k>.csv instead of rebuilding

    // [graph]
    GraphConfig graph;

    // [data]
    int window_len = 10;  // M
    int horizon = 1;      // H, fixed to 1
    std::string normalization = "max_scale";
    double scale_mph = 60.0;
    std::array<double, 3> fractions{0.7, 0.2, 0.1};
    int interval_minutes = 5;
    bool impute_zeros = true;

    // [train]
    TrainConfig train;

    // [run]
    std::uint64_t seed = 42;
    bool quiet = false;
    int threads = 0;  // 0 = library default

    NormalizationSpec normalization_spec() const {
        return parse_normalization(normalization, scale_mph);
    }
};

void validate_run_config(const RunConfig& config);

// Parse "[section]" / "key = value" lines; '#' starts a comment.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin);

// Apply one "section.key" assignment; unknown keys are a bad_config error.
void apply_config_value(RunConfig& config, const std::string& section, const std::string& key,
                        const std::string& value);

std::string serialize_run_config(const RunConfig& config);

}  // namespace glt
