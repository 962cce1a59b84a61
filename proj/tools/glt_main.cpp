// Command-line front-end for the traffic forecasting pipeline.
//
//   glt synth        generate a synthetic dataset
//   glt build-graph  write every similarity mask plus a manifest
//   glt train        train a model, write checkpoint + per-epoch log
//   glt evaluate     test-set metrics for a checkpoint or a baseline
//   glt predict      one-day prediction trace for a single link
//   glt sweep-gamma  retrain across gamma values and tabulate metrics

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "glt/commands.hpp"
#include "glt/io.hpp"
#include "glt/parallel.hpp"

namespace {

struct Override {
    std::string section;
    std::string key;
    std::string value;
};

struct CommonArgs {
    std::string config_path;
    std::vector<Override> overrides;
};

// Registers one flag per config key; values are applied on top of the
// config file in command-line order.
void add_config_flags(CLI::App* app, CommonArgs& args) {
    app->add_option("--config", args.config_path, "Config file (key = value sections)");

    static const struct {
        const char* flag;
        const char* section;
        const char* key;
    } kKeys[] = {
        {"--speed_csv", "paths", "speed_csv"},
        {"--adjacency_csv", "paths", "adjacency_csv"},
        {"--distance_csv", "paths", "distance_csv"},
        {"--out_dir", "paths", "out_dir"},
        {"--masks_dir", "paths", "masks_dir"},
        {"--hops", "graph", "hops"},
        {"--gamma", "graph", "gamma"},
        {"--delta_t_minutes", "graph", "delta_t_minutes"},
        {"--m", "graph", "m"},
        {"--free_flow_mph", "graph", "free_flow_mph"},
        {"--symmetrize_lt", "graph", "symmetrize_lt"},
        {"--window_len", "data", "window_len"},
        {"--horizon", "data", "horizon"},
        {"--normalization", "data", "normalization"},
        {"--scale_mph", "data", "scale_mph"},
        {"--fractions", "data", "fractions"},
        {"--interval_minutes", "data", "interval_minutes"},
        {"--impute_zeros", "data", "impute_zeros"},
        {"--learning_rate", "train", "learning_rate"},
        {"--batch_size", "train", "batch_size"},
        {"--max_epochs", "train", "max_epochs"},
        {"--rmsprop_alpha", "train", "rmsprop_alpha"},
        {"--rmsprop_epsilon", "train", "rmsprop_epsilon"},
        {"--early_stop_patience", "train", "early_stop_patience"},
        {"--clip_norm", "train", "clip_norm"},
        {"--train_seed", "train", "seed"},
        {"--seed", "run", "seed"},
        {"--quiet", "run", "quiet"},
        {"--threads", "run", "threads"},
    };
    for (const auto& k : kKeys) {
        const std::string section = k.section;
        const std::string key = k.key;
        if (key == "quiet") {
            app->add_flag_callback(k.flag, [&args, section, key]() {
                args.overrides.push_back({section, key, "true"});
            });
            continue;
        }
        app->add_option_function<std::string>(
            k.flag,
            [&args, section, key](const std::string& value) {
                args.overrides.push_back({section, key, value});
            },
            std::string("config key ") + k.section + "." + k.key);
    }
    // Aliases used throughout the docs.
    app->add_option_function<std::string>(
        "--out-dir,-o",
        [&args](const std::string& v) { args.overrides.push_back({"paths", "out_dir", v}); },
        "alias for --out_dir");
}

glt::RunConfig resolve_config(const CommonArgs& args) {
    glt::RunConfig config;
    if (!args.config_path.empty()) config = glt::load_run_config(args.config_path);
    for (const auto& o : args.overrides)
        glt::apply_config_value(config, o.section, o.key, o.value);
    if (config.threads > 0) glt::set_threads(config.threads);
    return config;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& field : glt::split_csv_line(text)) {
        double v;
        if (!glt::parse_double(field, v) || v != static_cast<double>(static_cast<int>(v)))
            throw glt::Error(glt::Errc::bad_config, "bad integer list '" + text + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GLT graph construction and traffic speed forecasting"};
    app.require_subcommand(1);

    // synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    glt::SynthOptions synth_opts;
    std::string synth_out = "data/synth";
    std::string synth_topology = "chain";
    synth->add_option("--n", synth_opts.n_links, "number of links");
    synth->add_option("--days", synth_opts.days, "number of days");
    synth->add_option("--seed", synth_opts.seed, "generator seed");
    synth->add_option("--topology", synth_topology, "chain | ring | grid");
    synth->add_option("--interval_minutes", synth_opts.interval_minutes, "grid interval");
    synth->add_flag("--noiseless", synth_opts.noiseless, "disable noise");
    synth->add_option("--out_dir,--out-dir,-o", synth_out, "output directory");
    bool synth_quiet = false;
    synth->add_flag("--quiet", synth_quiet, "suppress progress output");

    // pipeline subcommands ----------------------------------------------
    CommonArgs build_args, train_args, eval_args, predict_args, sweep_args;
    auto* build = app.add_subcommand("build-graph", "Construct and write every mask");
    add_config_flags(build, build_args);

    auto* train_cmd = app.add_subcommand("train", "Train and write checkpoint + log");
    add_config_flags(train_cmd, train_args);

    auto* eval_cmd = app.add_subcommand("evaluate", "Test-set metrics for a checkpoint");
    add_config_flags(eval_cmd, eval_args);
    std::string eval_checkpoint;
    std::string eval_baseline;
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint path");
    eval_cmd->add_option("--baseline", eval_baseline,
                         "evaluate 'persistence' or 'historical_mean' instead");

    auto* predict = app.add_subcommand("predict", "Write a one-day trace for one link");
    add_config_flags(predict, predict_args);
    std::string predict_checkpoint;
    std::size_t predict_link = 0;
    std::size_t predict_day = 1;
    std::string predict_out;
    predict->add_option("--checkpoint", predict_checkpoint, "checkpoint path");
    predict->add_option("--link", predict_link, "link id");
    predict->add_option("--day", predict_day, "day index into the series");
    predict->add_option("--out", predict_out, "output csv path");

    auto* sweep = app.add_subcommand("sweep-gamma", "Retrain across gamma values");
    add_config_flags(sweep, sweep_args);
    std::string sweep_gammas = "2,3,4,5,6";
    int sweep_repeats = 1;
    sweep->add_option("--gammas", sweep_gammas, "comma-separated gamma values");
    sweep->add_option("--repeats", sweep_repeats, "training repeats per gamma");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            synth_opts.topology = glt::parse_topology(synth_topology);
            glt::cmd_synth(synth_opts, synth_out, synth_quiet);
        } else if (build->parsed()) {
            glt::cmd_build_graph(resolve_config(build_args));
        } else if (train_cmd->parsed()) {
            glt::cmd_train(resolve_config(train_args));
        } else if (eval_cmd->parsed()) {
            glt::RunConfig config = resolve_config(eval_args);
            if (eval_checkpoint.empty()) eval_checkpoint = config.out_dir + "/checkpoint.bin";
            glt::cmd_evaluate(config, eval_checkpoint, eval_baseline);
        } else if (predict->parsed()) {
            glt::RunConfig config = resolve_config(predict_args);
            if (predict_checkpoint.empty())
                predict_checkpoint = config.out_dir + "/checkpoint.bin";
            if (predict_out.empty()) predict_out = config.out_dir + "/trace.csv";
            glt::cmd_predict(config, predict_checkpoint, predict_link, predict_day, predict_out);
        } else if (sweep->parsed()) {
            glt::cmd_sweep_gamma(resolve_config(sweep_args), parse_int_list(sweep_gammas),
                                 sweep_repeats);
        }
    } catch (const glt::Error& err) {
        std::cerr << glt::error_class(err.code()) << " error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
