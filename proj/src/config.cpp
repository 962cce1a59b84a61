#include "glt/config.hpp"

#include <sstream>

#include "glt/io.hpp"

namespace glt {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& value, const std::string& key) {
    double out;
    require(parse_double(value, out), Errc::bad_config,
            "key '" + key + "': expected a number, got '" + value + "'");
    return out;
}

long long to_int(const std::string& value, const std::string& key) {
    const double d = to_double(value, key);
    const long long i = static_cast<long long>(d);
    require(static_cast<double>(i) == d, Errc::bad_config,
            "key '" + key + "': expected an integer, got '" + value + "'");
    return i;
}

bool to_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    fail(Errc::bad_config, "key '" + key + "': expected a boolean, got '" + value + "'");
}

}  // namespace

void apply_config_value(RunConfig& config, const std::string& section, const std::string& key,
                        const std::string& value) {
    const std::string full = section.empty() ? key : section + "." + key;

    if (section == "paths") {
        if (key == "speed_csv") return void(config.speed_csv = value);
        if (key == "adjacency_csv") return void(config.adjacency_csv = value);
        if (key == "distance_csv") return void(config.distance_csv = value);
        if (key == "out_dir") return void(config.out_dir = value);
        if (key == "masks_dir") return void(config.masks_dir = value);
    } else if (section == "graph") {
        if (key == "hops") return void(config.graph.hops = static_cast<int>(to_int(value, full)));
        if (key == "gamma")
            return void(config.graph.gamma = static_cast<int>(to_int(value, full)));
        if (key == "delta_t_minutes")
            return void(config.graph.free_flow.delta_t_minutes = to_double(value, full));
        if (key == "m")
            return void(config.graph.free_flow.intervals =
                            static_cast<int>(to_int(value, full)));
        if (key == "free_flow_mph")
            return void(config.graph.free_flow.free_flow_mph = to_double(value, full));
        if (key == "symmetrize_lt")
            return void(config.graph.symmetrize_long_term = to_bool(value, full));
    } else if (section == "data") {
        if (key == "window_len")
            return void(config.window_len = static_cast<int>(to_int(value, full)));
        if (key == "horizon") return void(config.horizon = static_cast<int>(to_int(value, full)));
        if (key == "normalization") return void(config.normalization = value);
        if (key == "scale_mph") return void(config.scale_mph = to_double(value, full));
        if (key == "interval_minutes")
            return void(config.interval_minutes = static_cast<int>(to_int(value, full)));
        if (key == "impute_zeros") return void(config.impute_zeros = to_bool(value, full));
        if (key == "fractions") {
            auto parts = split_csv_line(value);
            require(parts.size() == 3, Errc::bad_config,
                    "fractions must be three comma-separated values");
            for (int i = 0; i < 3; ++i)
                config.fractions[static_cast<std::size_t>(i)] =
                    to_double(trim(parts[static_cast<std::size_t>(i)]), full);
            return;
        }
    } else if (section == "train") {
        if (key == "learning_rate") return void(config.train.learning_rate = to_double(value, full));
        if (key == "batch_size")
            return void(config.train.batch_size = static_cast<int>(to_int(value, full)));
        if (key == "max_epochs")
            return void(config.train.max_epochs = static_cast<int>(to_int(value, full)));
        if (key == "rmsprop_alpha")
            return void(config.train.rmsprop_alpha = to_double(value, full));
        if (key == "rmsprop_epsilon")
            return void(config.train.rmsprop_epsilon = to_double(value, full));
        if (key == "early_stop_patience")
            return void(config.train.early_stop_patience =
                            static_cast<int>(to_int(value, full)));
        if (key == "clip_norm") return void(config.train.clip_norm = to_double(value, full));
        if (key == "seed")
            return void(config.train.seed = static_cast<std::uint64_t>(to_int(value, full)));
    } else if (section == "run") {
        if (key == "seed")
            return void(config.seed = static_cast<std::uint64_t>(to_int(value, full)));
        if (key == "quiet") return void(config.quiet = to_bool(value, full));
        if (key == "threads")
            return void(config.threads = static_cast<int>(to_int(value, full)));
    }
    fail(Errc::bad_config, "unknown config key '" + full + "'");
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', Errc::bad_config,
                    origin + ":" + std::to_string(line_no) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        require(eq != std::string::npos, Errc::bad_config,
                origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        apply_config_value(config, section, key, value);
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_text_file(path), path);
}

void validate_run_config(const RunConfig& config) {
    require(config.graph.hops >= 1, Errc::bad_k, "graph.hops must be >= 1");
    require(config.graph.gamma >= 1, Errc::bad_gamma, "graph.gamma must be >= 1");
    validate_free_flow(config.graph.free_flow);
    require(config.window_len >= 1, Errc::bad_params, "data.window_len must be >= 1");
    require(config.horizon == 1, Errc::bad_horizon,
            "only next-step prediction is supported (data.horizon must be 1)");
    parse_normalization(config.normalization, config.scale_mph);
    validate_train_config(config.train);
}

std::string serialize_run_config(const RunConfig& config) {
    std::ostringstream out;
    out << "[paths]\n";
    out << "speed_csv = " << config.speed_csv << "\n";
    out << "adjacency_csv = " << config.adjacency_csv << "\n";
    out << "distance_csv = " << config.distance_csv << "\n";
    out << "out_dir = " << config.out_dir << "\n";
    if (!config.masks_dir.empty()) out << "masks_dir = " << config.masks_dir << "\n";
    out << "\n[graph]\n";
    out << "hops = " << config.graph.hops << "\n";
    out << "gamma = " << config.graph.gamma << "\n";
    out << "delta_t_minutes = " << format_double(config.graph.free_flow.delta_t_minutes) << "\n";
    out << "m = " << config.graph.free_flow.intervals << "\n";
    out << "free_flow_mph = " << format_double(config.graph.free_flow.free_flow_mph) << "\n";
    out << "symmetrize_lt = " << (config.graph.symmetrize_long_term ? "true" : "false") << "\n";
    out << "\n[data]\n";
    out << "window_len = " << config.window_len << "\n";
    out << "horizon = " << config.horizon << "\n";
    out << "normalization = " << config.normalization << "\n";
    out << "scale_mph = " << format_double(config.scale_mph) << "\n";
    out << "fractions = " << format_double(config.fractions[0]) << ","
        << format_double(config.fractions[1]) << "," << format_double(config.fractions[2])
        << "\n";
    out << "interval_minutes = " << config.interval_minutes << "\n";
    out << "impute_zeros = " << (config.impute_zeros ? "true" : "false") << "\n";
    out << "\n[train]\n";
    out << "learning_rate = " << format_double(config.train.learning_rate) << "\n";
    out << "batch_size = " << config.train.batch_size << "\n";
    out << "max_epochs = " << config.train.max_epochs << "\n";
    out << "rmsprop_alpha = " << format_double(config.train.rmsprop_alpha) << "\n";
    out << "rmsprop_epsilon = " << format_double(config.train.rmsprop_epsilon) << "\n";
    out << "early_stop_patience = " << config.train.early_stop_patience << "\n";
    out << "clip_norm = " << format_double(config.train.clip_norm) << "\n";
    out << "seed = " << config.train.seed << "\n";
    out << "\n[run]\n";
    out << "seed = " << config.seed << "\n";
    out << "quiet = " << (config.quiet ? "true" : "false") << "\n";
    out << "threads = " << config.threads << "\n";
    return out.str();
}

}  // namespace glt
