// Acceptance suite: one line per criterion, nonzero exit if any fail.
//
//  1. analytic gradients vs central finite differences on 20 random models
//  2. mask construction vs brute-force oracles on 100 random graphs
//  3. off-support weights still exactly zero after a full training run
//  4. metric golden values
//  5. quickstart convergence: runtime, validation halving, baseline bars
//  6. bit-identical checkpoints and logs across reruns
//  7. gamma sweep plumbing: ten rows, finite, re-parsable
//  8. single-equation goldens (reachability, profile distance, cell step,
//     optimizer first step)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "glt/commands.hpp"
#include "glt/config.hpp"
#include "glt/eval.hpp"
#include "glt/io.hpp"
#include "glt/rng.hpp"
#include "glt/train.hpp"

using namespace glt;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d [%s] %s\n", criterion, pass ? "pass" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <class Fn>
void guarded(int criterion, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(criterion, false, std::string("exception: ") + e.what());
    }
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "glt_acceptance";
    fs::create_directories(dir);
    return dir;
}

// --- criterion 1: gradient correctness -------------------------------------

void criterion_gradients() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    bool all_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(5000 + trial);
        const int n = 3 + static_cast<int>(rng.below(6));  // up to 8 links
        const int hops = 1 + static_cast<int>(rng.below(3));
        const int window_len = 2 + static_cast<int>(rng.below(5));  // up to 6

        Matrix adjacency(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
            for (std::size_t j = i + 1; j < static_cast<std::size_t>(n); ++j)
                if (rng.unit() < 0.4) adjacency(i, j) = adjacency(j, i) = 1.0;
        std::vector<BinaryMask> masks;
        for (int k = 1; k <= hops; ++k) {
            BinaryMask reach = k_hop_similarity(adjacency, k);
            masks.push_back(BinaryMask{std::move(reach.values), MaskKind::ultimate, k});
        }
        const GltModel model =
            init_params(n, hops, std::move(masks), 900 + static_cast<std::uint64_t>(trial), 0.3);

        Matrix values(static_cast<std::size_t>(window_len) + 3, static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < values.size(); ++i) values.data()[i] = rng.uniform(0, 1);
        auto series = std::make_shared<SpeedSeries>(SpeedSeries{std::move(values), 1440, 0});
        const WindowSet windows(series, window_len, 1);
        const std::vector<std::size_t> batch{0, 1, 2};

        const GradCheckReport check = gradient_check(model, windows, batch, 1e-5, 1e-4);
        worst = std::max(worst, check.max_rel_error);
        all_ok = all_ok && check.ok;
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "gradient check: 20 models, worst rel err %.2e (tol 1e-4), %.1f s (limit 60)",
                  worst, seconds);
    report(1, all_ok && worst < 1e-4 && seconds < 60.0, detail);
}

// --- criterion 2: graph oracles ---------------------------------------------

std::vector<int> bfs_distances(const Matrix& adjacency, std::size_t src) {
    std::vector<int> dist(adjacency.rows(), -1);
    std::deque<std::size_t> queue{src};
    dist[src] = 0;
    while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t w = 0; w < adjacency.rows(); ++w)
            if (adjacency(v, w) != 0.0 && dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
    }
    return dist;
}

void criterion_graph_oracles() {
    bool ok = true;
    Rng rng(77);
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const std::size_t n = 3 + rng.below(18);  // up to 20 nodes
        Matrix adjacency(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.unit() < 0.3) adjacency(i, j) = adjacency(j, i) = 1.0;

        // geographic masks vs breadth-first search
        std::vector<BinaryMask> geographic;
        for (int k = 1; k <= 3; ++k) {
            const BinaryMask mask = k_hop_similarity(adjacency, k);
            geographic.push_back(mask);
            for (std::size_t i = 0; i < n && ok; ++i) {
                const auto dist = bfs_distances(adjacency, i);
                for (std::size_t j = 0; j < n && ok; ++j) {
                    const bool within = dist[j] >= 0 && dist[j] <= k;
                    ok = mask.values(i, j) == (within ? 1.0 : 0.0);
                }
            }
        }

        // long-term rows vs brute-force sort with the documented tie rule
        Matrix profiles(n, 12);
        for (std::size_t i = 0; i < profiles.size(); ++i)
            profiles.data()[i] = rng.uniform(10, 70);
        const TemporalDifference q = temporal_difference(DailyProfileSet{profiles});
        const int gamma = 1 + static_cast<int>(rng.below(n - 1));
        const BinaryMask rows = long_term_row_selection(q, gamma);
        for (std::size_t i = 0; i < n && ok; ++i) {
            std::vector<std::pair<double, std::size_t>> order;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) order.push_back({q.values(i, j), j});
            std::sort(order.begin(), order.end());
            for (std::size_t j = 0; j < n && ok; ++j) {
                bool expect = false;
                for (int r = 0; r < gamma; ++r)
                    expect = expect || order[static_cast<std::size_t>(r)].second == j;
                ok = rows.values(i, j) == (expect ? 1.0 : 0.0);
            }
        }

        // ultimate support vs brute-force intersection of supports
        const BinaryMask s_lt = long_term_similarity(q, gamma);
        Matrix distance(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (adjacency(i, j) != 0.0) distance(i, j) = rng.uniform(1.0, 30.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) distance(j, i) = distance(i, j);
        const BinaryMask s_f = free_flow_reachable(distance, FreeFlowParams{});
        for (int k = 1; k <= 3 && ok; ++k) {
            const BinaryMask glt =
                glt_similarity(geographic[static_cast<std::size_t>(k - 1)], s_lt);
            const BinaryMask ultimate = ultimate_similarity(glt, s_f);
            for (std::size_t e = 0; e < ultimate.values.size() && ok; ++e) {
                const bool expect =
                    glt.values.data()[e] != 0.0 && s_f.values.data()[e] != 0.0;
                ok = ultimate.values.data()[e] == (expect ? 1.0 : 0.0);
            }
        }
    }
    report(2, ok, "graph oracles: 100 random graphs, BFS/top-gamma/intersection exact");
}

// --- criteria 3 + 5: the bundled quickstart run ------------------------------

RunConfig quickstart_config(const fs::path& dir) {
    RunConfig config = load_run_config(GLT_QUICKSTART_CFG);
    config.speed_csv = (dir / "data/speed.csv").string();
    config.adjacency_csv = (dir / "data/adjacency.csv").string();
    config.distance_csv = (dir / "data/distance.csv").string();
    config.out_dir = (dir / "out").string();
    config.quiet = true;
    return config;
}

void criteria_training_run(const fs::path& dir) {
    // the bundled dataset: 20-link chain, 7 days, fixed seed
    SynthOptions synth;
    synth.n_links = 20;
    synth.days = 7;
    synth.seed = 20260808;
    synth.topology = Topology::chain;
    cmd_synth(synth, (dir / "data").string(), true);

    RunConfig config = quickstart_config(dir);

    const auto t0 = Clock::now();
    const TrainOutcome outcome = cmd_train(config);
    const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    // criterion 3: off-support weights after the full run
    {
        Checkpoint checkpoint = load_checkpoint(outcome.checkpoint_path);
        const GltModel& model = checkpoint.model;
        bool frozen = true;
        std::size_t off_support = 0;
        for (int k = 0; k < model.n_hops; ++k) {
            const auto& mask = model.masks[static_cast<std::size_t>(k)];
            const auto& weights = model.params.hop_weights[static_cast<std::size_t>(k)];
            for (std::size_t e = 0; e < mask.values.size(); ++e)
                if (mask.values.data()[e] == 0.0) {
                    ++off_support;
                    frozen = frozen && weights.data()[e] == 0.0;
                }
        }
        const auto& top = model.masks.back();
        for (std::size_t e = 0; e < top.values.size(); ++e)
            if (top.values.data()[e] == 0.0) {
                ++off_support;
                frozen = frozen && model.params.cell_weights.data()[e] == 0.0;
            }
        char detail[160];
        std::snprintf(detail, sizeof(detail),
                      "mask conservation: %zu off-support weights exactly zero after %d epochs",
                      off_support, config.train.max_epochs);
        report(3, frozen && off_support > 0, detail);
    }

    // criterion 5: runtime, validation halving, baseline bars
    {
        const double epoch0_val = outcome.log.epochs.front().val_mse;
        const double final_val = outcome.log.epochs.back().val_mse;

        const SpeedSeries series = load_series(config);
        const DatasetSplit split = chronological_split(series, config.fractions);
        Checkpoint checkpoint = load_checkpoint(outcome.checkpoint_path);
        const MetricsReport model_report =
            evaluate(checkpoint.model, split.test, checkpoint.normalization,
                     checkpoint.window_len, checkpoint.horizon);

        const WindowSet test_ws(std::make_shared<SpeedSeries>(split.test), config.window_len,
                                config.horizon);
        const auto targets = window_targets(test_ws);
        const MetricsReport persistence = compute_metrics(
            baseline_predict(BaselineKind::persistence, split.train, test_ws), targets);
        const MetricsReport historical = compute_metrics(
            baseline_predict(BaselineKind::historical_mean, split.train, test_ws), targets);

        const bool time_ok = seconds < 300.0;
        const bool val_ok = final_val < 0.5 * epoch0_val;
        const bool persistence_ok = model_report.mae_mph <= 1.1 * persistence.mae_mph;
        const bool historical_ok = model_report.mae_mph < historical.mae_mph;
        char detail[240];
        std::snprintf(detail, sizeof(detail),
                      "convergence: %d epochs in %.0f s (limit 300); val %.2e -> %.2e "
                      "(need < 0.5x); mae %.3f vs 1.1*persistence %.3f, historical %.3f",
                      config.train.max_epochs, seconds, epoch0_val, final_val,
                      model_report.mae_mph, 1.1 * persistence.mae_mph, historical.mae_mph);
        report(5, time_ok && val_ok && persistence_ok && historical_ok, detail);
    }
}

// --- criterion 6: determinism ------------------------------------------------

void criterion_determinism(const fs::path& dir) {
    SynthOptions synth;
    synth.n_links = 10;
    synth.days = 3;
    synth.seed = 31337;
    cmd_synth(synth, (dir / "det_data").string(), true);

    RunConfig config = quickstart_config(dir);
    config.speed_csv = (dir / "det_data/speed.csv").string();
    config.adjacency_csv = (dir / "det_data/adjacency.csv").string();
    config.distance_csv = (dir / "det_data/distance.csv").string();
    config.train.max_epochs = 3;
    config.train.batch_size = 10;

    config.out_dir = (dir / "det_a").string();
    cmd_train(config);
    config.out_dir = (dir / "det_b").string();
    cmd_train(config);

    const bool checkpoints_equal =
        read_text_file((dir / "det_a/checkpoint.bin").string()) ==
        read_text_file((dir / "det_b/checkpoint.bin").string());
    const bool logs_equal = read_text_file((dir / "det_a/train_log.csv").string()) ==
                            read_text_file((dir / "det_b/train_log.csv").string());
    report(6, checkpoints_equal && logs_equal,
           "determinism: reruns give bit-identical checkpoint and log");
}

// --- criterion 7: gamma sweep plumbing ---------------------------------------

void criterion_sweep(const fs::path& dir) {
    RunConfig config = quickstart_config(dir);
    config.speed_csv = (dir / "det_data/speed.csv").string();
    config.adjacency_csv = (dir / "det_data/adjacency.csv").string();
    config.distance_csv = (dir / "det_data/distance.csv").string();
    config.out_dir = (dir / "sweep").string();
    config.train.max_epochs = 2;
    config.train.batch_size = 10;

    const auto rows = cmd_sweep_gamma(config, {2, 3, 4, 5, 6}, 2);
    bool ok = rows.size() == 10;
    for (const auto& row : rows)
        ok = ok && std::isfinite(row.val_rmse_mph) && std::isfinite(row.val_mape_pct) &&
             std::isfinite(row.val_mae_mph);
    for (std::size_t i = 1; i < rows.size() && ok; ++i)
        ok = rows[i - 1].gamma < rows[i].gamma ||
             (rows[i - 1].gamma == rows[i].gamma && rows[i - 1].seed < rows[i].seed);

    const auto reparsed = parse_sweep_table((fs::path(config.out_dir) / "sweep.csv").string());
    ok = ok && reparsed.size() == rows.size();
    for (std::size_t i = 0; i < rows.size() && ok; ++i)
        ok = reparsed[i].gamma == rows[i].gamma && reparsed[i].seed == rows[i].seed &&
             reparsed[i].val_rmse_mph == rows[i].val_rmse_mph &&
             reparsed[i].val_mape_pct == rows[i].val_mape_pct &&
             reparsed[i].val_mae_mph == rows[i].val_mae_mph;

    char detail[120];
    std::snprintf(detail, sizeof(detail),
                  "gamma sweep: %zu rows over gamma 2..6 x 2 seeds, finite, round-tripped",
                  rows.size());
    report(7, ok, detail);
}

// --- criterion 4 + 8: golden values -------------------------------------------

void criterion_metric_goldens() {
    const MetricsReport r = compute_metrics({{63.0, 27.0}}, {{60.0, 30.0}});
    const bool ok = std::abs(r.mae_mph - 3.0) <= 1e-12 && std::abs(r.rmse_mph - 3.0) <= 1e-12 &&
                    std::abs(r.mape_pct - 7.5) <= 1e-12;
    report(4, ok, "metric goldens: (63,27) vs (60,30) -> mae 3, rmse 3, mape 7.5%");
}

void criterion_equation_goldens() {
    bool ok = true;

    // free-flow reachability: 20-mile reach
    {
        Matrix d(2, 2);
        d(0, 1) = d(1, 0) = 15.0;
        ok = ok && free_flow_reachable(d, FreeFlowParams{60.0, 20.0, 1}).values(0, 1) == 1.0;
        d(0, 1) = d(1, 0) = 25.0;
        ok = ok && free_flow_reachable(d, FreeFlowParams{60.0, 20.0, 1}).values(0, 1) == 0.0;
    }
    // unit-offset profiles: sqrt(96)
    {
        Matrix p(2, 96);
        for (std::size_t b = 0; b < 96; ++b) {
            p(0, b) = 60.0;
            p(1, b) = 61.0;
        }
        const TemporalDifference q = temporal_difference(DailyProfileSet{p});
        ok = ok && std::abs(q.values(0, 1) - std::sqrt(96.0)) <= 1e-12;
    }
    // zero-weight cell step: h = 0
    {
        std::vector<BinaryMask> masks{BinaryMask{Matrix(3, 3, 1.0), MaskKind::ultimate, 1}};
        const GltModel model = GltModel::create(masks);
        const ModelState next =
            lstm_step(model, Vector(3, 0.0), ModelState{Vector(3, 0.0), Vector(3, 0.0)});
        for (double v : next.hidden) ok = ok && v == 0.0;
        for (double v : next.cell) ok = ok && v == 0.0;
    }
    // optimizer first step on a unit scalar gradient
    {
        std::vector<BinaryMask> masks{BinaryMask{Matrix(2, 2, 1.0), MaskKind::ultimate, 1}};
        GltModel model = GltModel::create(masks);
        ParamSet grads = ParamSet::zeros(2, 1);
        grads.biases[kGateInput][0] = 1.0;
        ParamSet state = ParamSet::zeros(2, 1);
        TrainConfig config;
        config.learning_rate = 1e-5;
        config.rmsprop_alpha = 0.99;
        config.rmsprop_epsilon = 1e-8;
        rmsprop_update(model, grads, state, config);
        const double delta = model.params.biases[kGateInput][0];
        const double closed_form = -1e-5 / (0.1 + 1e-8);
        ok = ok && std::abs(state.biases[kGateInput][0] - 0.01) <= 1e-15;
        ok = ok && std::abs(delta - closed_form) <= 1e-18;
        ok = ok && std::abs(delta - (-1.0e-4)) <= 2e-8;
    }
    report(8, ok, "equation goldens: S_F thresholds, sqrt(96), zero-weight step, rmsprop step");
}

}  // namespace

int main() {
    const fs::path dir = work_dir();

    guarded(1, [] { criterion_gradients(); });
    guarded(2, [] { criterion_graph_oracles(); });
    guarded(3, [&] { criteria_training_run(dir); });  // also reports criterion 5
    guarded(4, [] { criterion_metric_goldens(); });
    guarded(6, [&] { criterion_determinism(dir); });
    guarded(7, [&] { criterion_sweep(dir); });
    guarded(8, [] { criterion_equation_goldens(); });

    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
