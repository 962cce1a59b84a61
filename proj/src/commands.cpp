#include "glt/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include "glt/io.hpp"

namespace fs = std::filesystem;

namespace glt {

namespace {

void ensure_dir(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    require(!ec, Errc::io_error, "cannot create directory " + path);
}

std::string mask_file_name(const BinaryMask& mask) {
    switch (mask.kind) {
        case MaskKind::geographic: return "s_g_" + std::to_string(mask.hop) + ".csv";
        case MaskKind::long_term: return "s_lt.csv";
        case MaskKind::glt: return "s_glt_" + std::to_string(mask.hop) + ".csv";
        case MaskKind::free_flow: return "s_f.csv";
        case MaskKind::ultimate: return "s_u_" + std::to_string(mask.hop) + ".csv";
    }
    fail(Errc::bad_params, "unknown mask kind");
}

// Normalized split windows plus the mph split for metrics and baselines.
struct Prepared {
    SpeedSeries series_mph;
    RoadNetworkSpec network;
    DatasetSplit split_mph;
    NormalizationSpec norm;
    std::shared_ptr<SpeedSeries> train_norm;
    std::shared_ptr<SpeedSeries> val_norm;
};

Prepared prepare(const RunConfig& config) {
    validate_run_config(config);
    Prepared p;
    p.series_mph = load_series(config);
    p.network = load_network(config);
    require(p.network.adjacency.rows() == p.series_mph.links(), Errc::shape_mismatch,
            "network size does not match the number of speed columns");
    p.split_mph = chronological_split(p.series_mph, config.fractions);
    p.norm = config.normalization_spec();
    p.train_norm = std::make_shared<SpeedSeries>(normalize(p.split_mph.train, p.norm));
    p.val_norm = std::make_shared<SpeedSeries>(normalize(p.split_mph.validation, p.norm));
    return p;
}

std::vector<BinaryMask> ultimate_masks_for(const RunConfig& config, const Prepared& p,
                                           int gamma_override = 0) {
    if (!config.masks_dir.empty() && gamma_override == 0)
        return load_ultimate_masks(config.masks_dir, config.graph.hops);
    GraphConfig graph = config.graph;
    if (gamma_override > 0) graph.gamma = gamma_override;
    GraphBundle bundle = build_graph_bundle(p.network, p.split_mph.train, graph,
                                            config.train.exec);
    return std::move(bundle.ultimate);
}

TrainResult run_training(const RunConfig& config, const Prepared& p,
                         std::vector<BinaryMask> masks, std::uint64_t init_seed,
                         std::uint64_t shuffle_seed, bool quiet) {
    const WindowSet train_ws(p.train_norm, config.window_len, config.horizon);
    const WindowSet val_ws(p.val_norm, config.window_len, config.horizon);

    GltModel model = init_params(static_cast<int>(p.series_mph.links()), config.graph.hops,
                                 std::move(masks), init_seed);
    TrainConfig tc = config.train;
    tc.seed = shuffle_seed;
    EpochCallback on_epoch;
    if (!quiet)
        on_epoch = [](const EpochStats& e) {
            std::cout << "epoch " << e.epoch << " train_mse=" << format_double(e.train_mse)
                      << " val_mse=" << format_double(e.val_mse) << "\n";
        };
    return train(std::move(model), train_ws, val_ws, tc, on_epoch);
}

}  // namespace

SpeedSeries load_series(const RunConfig& config) {
    require(!config.speed_csv.empty(), Errc::bad_config, "paths.speed_csv is not set");
    return load_speed_csv(config.speed_csv, config.interval_minutes, config.impute_zeros);
}

RoadNetworkSpec load_network(const RunConfig& config) {
    require(!config.adjacency_csv.empty(), Errc::bad_config, "paths.adjacency_csv is not set");
    require(!config.distance_csv.empty(), Errc::bad_config, "paths.distance_csv is not set");
    RoadNetworkSpec net{read_matrix_csv(config.adjacency_csv),
                        read_matrix_csv(config.distance_csv)};
    validate_network(net);
    return net;
}

std::vector<BinaryMask> load_ultimate_masks(const std::string& dir, int hops) {
    std::vector<BinaryMask> masks;
    for (int k = 1; k <= hops; ++k) {
        const std::string path = dir + "/s_u_" + std::to_string(k) + ".csv";
        Matrix values = read_matrix_csv(path);
        require(values.rows() == values.cols(), Errc::bad_shape, path + ": mask must be square");
        for (std::size_t i = 0; i < values.size(); ++i)
            require(values.data()[i] == 0.0 || values.data()[i] == 1.0, Errc::bad_shape,
                    path + ": mask entries must be 0/1");
        masks.push_back(BinaryMask{std::move(values), MaskKind::ultimate, k});
    }
    return masks;
}

void cmd_synth(const SynthOptions& opts, const std::string& out_dir, bool quiet) {
    ensure_dir(out_dir);
    auto [series, network] = generate_synthetic(opts);
    write_speed_csv(out_dir + "/speed.csv", series);
    write_matrix_csv(out_dir + "/adjacency.csv", network.adjacency);
    write_matrix_csv(out_dir + "/distance.csv", network.distance);

    std::ostringstream manifest;
    manifest << "seed=" << opts.seed << "\n"
             << "topology=" << to_string(opts.topology) << "\n"
             << "n_links=" << opts.n_links << "\n"
             << "days=" << opts.days << "\n"
             << "interval_minutes=" << opts.interval_minutes << "\n"
             << "noiseless=" << (opts.noiseless ? "true" : "false") << "\n";
    write_text_file(out_dir + "/manifest.txt", manifest.str());
    if (!quiet)
        std::cout << "wrote " << series.steps() << "x" << series.links() << " series to "
                  << out_dir << "\n";
}

void cmd_build_graph(const RunConfig& config) {
    Prepared p = prepare(config);
    GraphBundle bundle =
        build_graph_bundle(p.network, p.split_mph.train, config.graph, config.train.exec);

    const std::string dir = config.out_dir + "/masks";
    ensure_dir(dir);

    std::vector<const BinaryMask*> masks;
    for (const auto& m : bundle.geographic) masks.push_back(&m);
    masks.push_back(&bundle.long_term);
    for (const auto& m : bundle.glt) masks.push_back(&m);
    masks.push_back(&bundle.free_flow);
    for (const auto& m : bundle.ultimate) masks.push_back(&m);

    std::ostringstream manifest;
    for (const BinaryMask* mask : masks) {
        const std::string name = mask_file_name(*mask);
        write_matrix_csv(dir + "/" + name, mask->values);
        manifest << "kind=" << to_string(mask->kind) << " k=" << mask->hop
                 << " gamma=" << config.graph.gamma
                 << " dt_minutes=" << format_double(config.graph.free_flow.delta_t_minutes)
                 << " m=" << config.graph.free_flow.intervals
                 << " v_mph=" << format_double(config.graph.free_flow.free_flow_mph)
                 << " nnz=" << mask->nonzeros() << "\n";
    }
    write_text_file(dir + "/masks_manifest.txt", manifest.str());
    if (!config.quiet)
        std::cout << "wrote " << masks.size() << " masks to " << dir << "\n";
}

TrainOutcome cmd_train(const RunConfig& config) {
    Prepared p = prepare(config);
    TrainResult result = run_training(config, p, ultimate_masks_for(config, p), config.seed,
                                      config.train.seed, config.quiet);

    ensure_dir(config.out_dir);
    TrainOutcome outcome;
    outcome.log = result.log;
    outcome.checkpoint_path = config.out_dir + "/checkpoint.bin";
    outcome.log_path = config.out_dir + "/train_log.csv";

    Checkpoint checkpoint{std::move(result.model), config.window_len, config.horizon, p.norm};
    save_checkpoint(outcome.checkpoint_path, checkpoint);

    // Losses are in normalized units. Timing goes to a sidecar so the log
    // itself is byte-identical across reruns.
    std::ostringstream log_csv;
    log_csv << "epoch,train_mse,val_mse\n";
    std::ostringstream timing_csv;
    timing_csv << "epoch,seconds\n";
    for (const auto& e : result.log.epochs) {
        log_csv << e.epoch << ',' << format_double(e.train_mse) << ','
                << format_double(e.val_mse) << '\n';
        timing_csv << e.epoch << ',' << format_double(e.seconds) << '\n';
    }
    write_text_file(outcome.log_path, log_csv.str());
    write_text_file(config.out_dir + "/train_timing.csv", timing_csv.str());

    std::ostringstream summary;
    summary << "best_epoch=" << result.log.best_epoch << "\n"
            << "stop_reason=" << to_string(result.log.stop_reason) << "\n"
            << "best_val_mse=" << format_double(result.log.best_val_mse()) << "\n";
    write_text_file(config.out_dir + "/train_summary.txt", summary.str());

    if (!config.quiet)
        std::cout << "best epoch " << result.log.best_epoch << " ("
                  << to_string(result.log.stop_reason)
                  << "), checkpoint written to " << outcome.checkpoint_path << "\n";
    return outcome;
}

MetricsReport cmd_evaluate(const RunConfig& config, const std::string& checkpoint_path,
                           const std::string& baseline) {
    validate_run_config(config);
    const SpeedSeries series = load_series(config);
    const DatasetSplit split = chronological_split(series, config.fractions);

    MetricsReport report;
    if (baseline.empty()) {
        Checkpoint checkpoint = load_checkpoint(checkpoint_path);
        report = evaluate(checkpoint.model, split.test, checkpoint.normalization,
                          checkpoint.window_len, checkpoint.horizon, config.train.exec);
    } else {
        const BaselineKind kind = parse_baseline(baseline);
        const WindowSet test_ws(std::make_shared<SpeedSeries>(split.test), config.window_len,
                                config.horizon);
        report = compute_metrics(baseline_predict(kind, split.train, test_ws),
                                 window_targets(test_ws));
    }

    std::cout << report.to_line() << "\n";
    ensure_dir(config.out_dir);
    std::ostringstream kv;
    kv << "rmse_mph=" << format_double(report.rmse_mph) << "\n"
       << "mape_pct=" << format_double(report.mape_pct) << "\n"
       << "mae_mph=" << format_double(report.mae_mph) << "\n"
       << "n=" << report.n << "\n"
       << "skipped_zero_targets=" << report.skipped_zero_targets << "\n";
    const std::string name = baseline.empty() ? "metrics.txt" : "metrics_" + baseline + ".txt";
    write_text_file(config.out_dir + "/" + name, kv.str());
    return report;
}

void cmd_predict(const RunConfig& config, const std::string& checkpoint_path,
                 std::size_t link_id, std::size_t day_index, const std::string& out_path) {
    validate_run_config(config);
    const SpeedSeries series = load_series(config);
    Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    export_trace(checkpoint.model, series, checkpoint.normalization, checkpoint.window_len,
                 checkpoint.horizon, link_id, day_index, out_path);
    if (!config.quiet) std::cout << "wrote trace to " << out_path << "\n";
}

std::vector<SweepRow> cmd_sweep_gamma(const RunConfig& config, std::vector<int> gammas,
                                      int repeats) {
    require(!gammas.empty(), Errc::bad_params, "gamma list is empty");
    require(repeats >= 1, Errc::bad_params, "repeats must be >= 1");
    std::sort(gammas.begin(), gammas.end());

    Prepared p = prepare(config);

    // The profile distances and the gamma-independent masks are shared
    // across the whole sweep.
    const DailyProfileSet profiles = daily_profiles(p.split_mph.train);
    const TemporalDifference q = temporal_difference(profiles, config.train.exec);
    std::vector<BinaryMask> geographic;
    for (int k = 1; k <= config.graph.hops; ++k)
        geographic.push_back(k_hop_similarity(p.network.adjacency, k, config.train.exec));
    const BinaryMask free_flow =
        free_flow_reachable(p.network.distance, config.graph.free_flow, config.train.exec);

    std::vector<SweepRow> rows;
    for (int gamma : gammas) {
        const BinaryMask s_lt =
            long_term_similarity(q, gamma, config.graph.symmetrize_long_term);
        std::vector<BinaryMask> masks;
        for (int k = 1; k <= config.graph.hops; ++k)
            masks.push_back(ultimate_similarity(
                glt_similarity(geographic[static_cast<std::size_t>(k - 1)], s_lt), free_flow));

        for (int r = 0; r < repeats; ++r) {
            const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(r);
            TrainResult result = run_training(config, p, masks, seed, seed, true);
            const MetricsReport report =
                evaluate(result.model, p.split_mph.validation, p.norm, config.window_len,
                         config.horizon, config.train.exec);
            rows.push_back({gamma, seed, report.rmse_mph, report.mape_pct, report.mae_mph});
            if (!config.quiet)
                std::cout << "gamma=" << gamma << " seed=" << seed << " "
                          << report.to_line() << "\n";
        }
    }

    ensure_dir(config.out_dir);
    std::ostringstream csv;
    csv << "gamma,seed,val_rmse_mph,val_mape_pct,val_mae_mph\n";
    for (const auto& row : rows)
        csv << row.gamma << ',' << row.seed << ',' << format_double(row.val_rmse_mph) << ','
            << format_double(row.val_mape_pct) << ',' << format_double(row.val_mae_mph)
            << '\n';
    write_text_file(config.out_dir + "/sweep.csv", csv.str());

    // per-gamma means over the repeats, as a side table
    std::ostringstream mean_csv;
    mean_csv << "gamma,mean_rmse_mph,mean_mape_pct,mean_mae_mph,runs\n";
    for (int gamma : gammas) {
        double rmse = 0.0, mape = 0.0, mae = 0.0;
        int runs = 0;
        for (const auto& row : rows)
            if (row.gamma == gamma) {
                rmse += row.val_rmse_mph;
                mape += row.val_mape_pct;
                mae += row.val_mae_mph;
                ++runs;
            }
        mean_csv << gamma << ',' << format_double(rmse / runs) << ','
                 << format_double(mape / runs) << ',' << format_double(mae / runs) << ','
                 << runs << '\n';
        if (!config.quiet)
            std::cout << "gamma=" << gamma << " mean over " << runs
                      << " runs: rmse_mph=" << format_double(rmse / runs)
                      << " mape_pct=" << format_double(mape / runs)
                      << " mae_mph=" << format_double(mae / runs) << "\n";
    }
    write_text_file(config.out_dir + "/sweep_mean.csv", mean_csv.str());
    return rows;
}

std::vector<SweepRow> parse_sweep_table(const std::string& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    require(std::getline(in, line) &&
                line == "gamma,seed,val_rmse_mph,val_mape_pct,val_mae_mph",
            Errc::malformed_csv, path + ": bad sweep header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        require(fields.size() == 5, Errc::malformed_csv, path + ": bad sweep row");
        SweepRow row;
        double gamma, seed;
        require(parse_double(fields[0], gamma) && parse_double(fields[1], seed) &&
                    parse_double(fields[2], row.val_rmse_mph) &&
                    parse_double(fields[3], row.val_mape_pct) &&
                    parse_double(fields[4], row.val_mae_mph),
                Errc::malformed_csv, path + ": non-numeric sweep cell");
        row.gamma = static_cast<int>(gamma);
        row.seed = static_cast<std::uint64_t>(seed);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace glt
