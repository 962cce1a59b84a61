#pragma once

#include <string>
#include <vector>

#include "glt/config.hpp"
#include "glt/eval.hpp"

namespace glt {

// Subcommand implementations. All outputs are deterministic per config and
// seed; wall-clock timing goes to a sidecar so the main artifacts compare
// byte-identical across reruns.

void cmd_synth(const SynthOptions& opts, const std::string& out_dir, bool quiet);

// Writes s_g_<k>.csv, s_lt.csv, s_glt_<k>.csv, s_f.csv, s_u_<k>.csv plus
// masks_manifest.txt under <out_dir>/masks.
void cmd_build_graph(const RunConfig& config);

struct TrainOutcome {
    TrainLog log;
    std::string checkpoint_path;
    std::string log_path;
};

TrainOutcome cmd_train(const RunConfig& config);

MetricsReport cmd_evaluate(const RunConfig& config, const std::string& checkpoint_path,
                           const std::string& baseline = "");

void cmd_predict(const RunConfig& config, const std::string& checkpoint_path,
                 std::size_t link_id, std::size_t day_index, const std::string& out_path);

struct SweepRow {
    int gamma = 0;
    std::uint64_t seed = 0;
    double val_rmse_mph = 0.0;
    double val_mape_pct = 0.0;
    double val_mae_mph = 0.0;
};

std::vector<SweepRow> cmd_sweep_gamma(const RunConfig& config, std::vector<int> gammas,
                                      int repeats);

// Parser for the sweep table; cmd_sweep_gamma output must round-trip.
std::vector<SweepRow> parse_sweep_table(const std::string& path);

// Shared loading helpers.
SpeedSeries load_series(const RunConfig& config);
RoadNetworkSpec load_network(const RunConfig& config);
std::vector<BinaryMask> load_ultimate_masks(const std::string& dir, int hops);

}  // namespace glt
