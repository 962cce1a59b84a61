// Times the OpenMP kernels against their serial reference paths and checks
// that both produce bit-identical results. Run with --quick for a fast
// smoke-sized pass (used by the test suite).

#include <chrono>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <string>
#include <vector>

#include "glt/data.hpp"
#include "glt/graph.hpp"
#include "glt/model.hpp"
#include "glt/parallel.hpp"
#include "glt/train.hpp"

using namespace glt;

namespace {

using Clock = std::chrono::steady_clock;

template <class Fn>
double time_ms(Fn&& fn) {
    const auto t0 = Clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-24s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                equal ? "bit-equal" : "MISMATCH");
    if (!equal) ++failures;
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;

    const int n_links = quick ? 40 : 160;
    const int days = quick ? 2 : 4;
    std::printf("threads=%d links=%d days=%d\n\n", hardware_threads(), n_links, days);

    SynthOptions opts;
    opts.n_links = n_links;
    opts.days = days;
    opts.seed = 7;
    opts.topology = Topology::grid;
    auto [series, network] = generate_synthetic(opts);

    // k-hop reachability
    {
        BinaryMask serial_mask, parallel_mask;
        const double ts = time_ms([&] {
            serial_mask = k_hop_similarity(network.adjacency, 3, Exec::serial);
        });
        const double tp = time_ms([&] {
            parallel_mask = k_hop_similarity(network.adjacency, 3, Exec::parallel);
        });
        report("k_hop_similarity", ts, tp, serial_mask.values == parallel_mask.values);
    }

    // profile distance matrix
    const DailyProfileSet profiles = daily_profiles(series);
    {
        TemporalDifference qs, qp;
        const double ts = time_ms([&] { qs = temporal_difference(profiles, Exec::serial); });
        const double tp = time_ms([&] { qp = temporal_difference(profiles, Exec::parallel); });
        report("temporal_difference", ts, tp, qs.values == qp.values);
    }

    // all-pairs shortest distances
    {
        Matrix ds, dp;
        const double ts = time_ms([&] {
            ds = all_pairs_distances(network.distance, Exec::serial);
        });
        const double tp = time_ms([&] {
            dp = all_pairs_distances(network.distance, Exec::parallel);
        });
        report("all_pairs_distances", ts, tp, ds == dp);
    }

    // batch forward/backward through the recurrent model
    {
        GraphConfig graph_config;
        GraphBundle bundle = build_graph_bundle(network, series, graph_config, Exec::parallel);
        GltModel model = init_params(n_links, graph_config.hops, bundle.ultimate, 11);

        const NormalizationSpec norm{NormalizationSpec::Mode::max_scale, 70.0};
        auto normalized = std::make_shared<SpeedSeries>(normalize(series, norm));
        const WindowSet windows(normalized, 10, 1);
        std::vector<std::size_t> batch(quick ? 16 : 64);
        std::iota(batch.begin(), batch.end(), 0);

        BackwardResult rs, rp;
        const double ts = time_ms([&] { rs = backward(model, windows, batch, Exec::serial); });
        const double tp = time_ms([&] { rp = backward(model, windows, batch, Exec::parallel); });
        bool equal = rs.loss == rp.loss;
        auto refs_s = tensor_refs(rs.grads);
        auto refs_p = tensor_refs(rp.grads);
        for (std::size_t t = 0; t < refs_s.size() && equal; ++t)
            equal = std::memcmp(refs_s[t].data, refs_p[t].data,
                                refs_s[t].size * sizeof(double)) == 0;
        report("batch_backward", ts, tp, equal);
    }

    if (failures) {
        std::printf("\n%d kernel(s) diverged between serial and parallel paths\n", failures);
        return 1;
    }
    return 0;
}
