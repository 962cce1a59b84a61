#include "glt/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "glt/rng.hpp"

namespace glt {

void validate_train_config(const TrainConfig& config) {
    require(config.learning_rate > 0.0, Errc::bad_params, "learning rate must be positive");
    require(config.rmsprop_alpha > 0.0 && config.rmsprop_alpha < 1.0, Errc::bad_params,
            "rmsprop alpha must be in (0, 1)");
    require(config.rmsprop_epsilon > 0.0, Errc::bad_params, "rmsprop epsilon must be positive");
    require(config.batch_size >= 1, Errc::bad_params, "batch size must be >= 1");
    require(config.max_epochs >= 1, Errc::bad_params, "max epochs must be >= 1");
    require(config.early_stop_patience >= 1, Errc::bad_params, "patience must be >= 1");
    require(config.clip_norm >= 0.0, Errc::bad_params, "clip norm must be nonnegative");
}

const char* to_string(StopReason reason) {
    return reason == StopReason::max_epochs ? "max_epochs" : "early_stop";
}

double TrainLog::best_val_mse() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : epochs) best = std::min(best, e.val_mse);
    return best;
}

double mse_loss(const std::vector<Vector>& predictions, const std::vector<Vector>& targets) {
    require(!predictions.empty(), Errc::empty_batch, "no predictions");
    require(predictions.size() == targets.size(), Errc::shape_mismatch,
            "prediction/target batch sizes differ");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < predictions.size(); ++s) {
        require(predictions[s].size() == targets[s].size(), Errc::shape_mismatch,
                "prediction/target widths differ");
        for (std::size_t i = 0; i < predictions[s].size(); ++i) {
            const double r = predictions[s][i] - targets[s][i];
            sum += r * r;
        }
        n += predictions[s].size();
    }
    return sum / static_cast<double>(n);
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Everything the backward pass needs from one time step.
struct StepCache {
    Vector g_stack;        // K*N conv features
    Vector in_gate;        // post-sigmoid
    Vector forget_gate;    // post-sigmoid
    Vector out_gate;       // post-sigmoid
    Vector candidate;      // post-tanh
    Vector c_star;         // neighbourhood-mixed previous cell
    Vector cell_tanh;      // tanh(C_t)
    Vector h_prev;
    Vector c_prev;
};

// Forward pass that records caches; returns the final hidden state.
Vector forward_cached(const GltModel& model, const WindowSet& windows, std::size_t sample,
                      std::vector<StepCache>& caches) {
    const auto n = static_cast<std::size_t>(model.n_links);
    ModelState state{Vector(n, 0.0), Vector(n, 0.0)};
    caches.resize(static_cast<std::size_t>(windows.window_len()));
    for (int m = 0; m < windows.window_len(); ++m) {
        auto& cache = caches[static_cast<std::size_t>(m)];
        const auto x = windows.input_row(sample, m);
        cache.g_stack = stack_hops(model, x);
        cache.h_prev = state.hidden;
        cache.c_prev = state.cell;

        auto gate = [&](int g) {
            const auto gi = static_cast<std::size_t>(g);
            Vector pre = matvec(model.params.input_weights[gi], cache.g_stack);
            const auto& r = model.params.hidden_weights[gi];
            for (std::size_t i = 0; i < n; ++i) {
                auto row = r.row(i);
                double acc = model.params.biases[gi][i];
                for (std::size_t j = 0; j < n; ++j) acc += row[j] * state.hidden[j];
                pre[i] += acc;
            }
            return pre;
        };
        cache.in_gate = gate(kGateInput);
        cache.forget_gate = gate(kGateForget);
        cache.out_gate = gate(kGateOutput);
        cache.candidate = gate(kGateCandidate);

        const auto& index = model.mask_index.back();
        cache.c_star.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = index.row_ptr[i]; p < index.row_ptr[i + 1]; ++p)
                cache.c_star[i] +=
                    model.params.cell_weights(i, index.col[p]) * state.cell[index.col[p]];

        cache.cell_tanh.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            cache.in_gate[i] = sigmoid(cache.in_gate[i]);
            cache.forget_gate[i] = sigmoid(cache.forget_gate[i]);
            cache.out_gate[i] = sigmoid(cache.out_gate[i]);
            cache.candidate[i] = std::tanh(cache.candidate[i]);
            state.cell[i] =
                cache.forget_gate[i] * cache.c_star[i] + cache.in_gate[i] * cache.candidate[i];
            cache.cell_tanh[i] = std::tanh(state.cell[i]);
            state.hidden[i] = cache.out_gate[i] * cache.cell_tanh[i];
        }
    }
    return state.hidden;
}

// Backpropagation through time for one sample. d_hidden is dL/dh at the
// final step; gradients accumulate into grads.
void backward_sample(const GltModel& model, const WindowSet& windows, std::size_t sample,
                     const std::vector<StepCache>& caches, Vector d_hidden, ParamSet& grads) {
    const auto n = static_cast<std::size_t>(model.n_links);
    const auto kn = n * static_cast<std::size_t>(model.n_hops);
    Vector d_cell(n, 0.0);
    Vector d_pre(n), d_g(kn), d_h_prev(n), d_c_prev(n);

    for (int m = windows.window_len() - 1; m >= 0; --m) {
        const auto& cache = caches[static_cast<std::size_t>(m)];
        std::fill(d_g.begin(), d_g.end(), 0.0);
        std::fill(d_h_prev.begin(), d_h_prev.end(), 0.0);
        std::fill(d_c_prev.begin(), d_c_prev.end(), 0.0);

        // h = o * tanh(C): route dL/dh into the output gate and the cell.
        for (std::size_t i = 0; i < n; ++i)
            d_cell[i] += d_hidden[i] * cache.out_gate[i] *
                         (1.0 - cache.cell_tanh[i] * cache.cell_tanh[i]);

        auto gate_backward = [&](int g, const Vector& d_pre_gate) {
            const auto gi = static_cast<std::size_t>(g);
            outer_add(grads.input_weights[gi], d_pre_gate, cache.g_stack);
            outer_add(grads.hidden_weights[gi], d_pre_gate, cache.h_prev);
            for (std::size_t i = 0; i < n; ++i) grads.biases[gi][i] += d_pre_gate[i];
            matvec_transpose_add(model.params.input_weights[gi], d_pre_gate, d_g);
            matvec_transpose_add(model.params.hidden_weights[gi], d_pre_gate, d_h_prev);
        };

        // output gate: pre-sigmoid gradient
        for (std::size_t i = 0; i < n; ++i)
            d_pre[i] = d_hidden[i] * cache.cell_tanh[i] * cache.out_gate[i] *
                       (1.0 - cache.out_gate[i]);
        gate_backward(kGateOutput, d_pre);

        // input gate
        for (std::size_t i = 0; i < n; ++i)
            d_pre[i] = d_cell[i] * cache.candidate[i] * cache.in_gate[i] *
                       (1.0 - cache.in_gate[i]);
        gate_backward(kGateInput, d_pre);

        // forget gate (multiplies the neighbourhood-mixed cell)
        for (std::size_t i = 0; i < n; ++i)
            d_pre[i] = d_cell[i] * cache.c_star[i] * cache.forget_gate[i] *
                       (1.0 - cache.forget_gate[i]);
        gate_backward(kGateForget, d_pre);

        // candidate
        for (std::size_t i = 0; i < n; ++i)
            d_pre[i] = d_cell[i] * cache.in_gate[i] *
                       (1.0 - cache.candidate[i] * cache.candidate[i]);
        gate_backward(kGateCandidate, d_pre);

        // c_star = (W_C o S) c_prev: masked weight gradient plus the path
        // into the previous cell state.
        {
            const auto& index = model.mask_index.back();
            for (std::size_t i = 0; i < n; ++i) {
                const double d_star = d_cell[i] * cache.forget_gate[i];
                if (d_star == 0.0) continue;
                for (std::size_t p = index.row_ptr[i]; p < index.row_ptr[i + 1]; ++p) {
                    const std::size_t j = index.col[p];
                    grads.cell_weights(i, j) += d_star * cache.c_prev[j];
                    d_c_prev[j] += model.params.cell_weights(i, j) * d_star;
                }
            }
        }

        // conv blocks: g^k = (W^k o S^k) x
        const auto x = windows.input_row(sample, m);
        for (int k = 0; k < model.n_hops; ++k) {
            const auto& index = model.mask_index[static_cast<std::size_t>(k)];
            auto& w_grad = grads.hop_weights[static_cast<std::size_t>(k)];
            const double* dgk = d_g.data() + n * static_cast<std::size_t>(k);
            for (std::size_t i = 0; i < n; ++i) {
                if (dgk[i] == 0.0) continue;
                for (std::size_t p = index.row_ptr[i]; p < index.row_ptr[i + 1]; ++p)
                    w_grad(i, index.col[p]) += dgk[i] * x[index.col[p]];
            }
        }

        d_hidden = d_h_prev;
        d_cell = d_c_prev;
    }
}

void add_params(ParamSet& into, const ParamSet& from) {
    auto dst = tensor_refs(into);
    auto src = tensor_refs(const_cast<ParamSet&>(from));
    for (std::size_t t = 0; t < dst.size(); ++t)
        for (std::size_t i = 0; i < dst[t].size; ++i) dst[t].data[i] += src[t].data[i];
}

}  // namespace

BackwardResult backward(const GltModel& model, const WindowSet& windows,
                        std::span<const std::size_t> samples, Exec exec) {
    require(!samples.empty(), Errc::empty_batch, "batch is empty");
    const auto n = static_cast<std::size_t>(model.n_links);
    const double denom = static_cast<double>(samples.size()) * static_cast<double>(n);

    // Per-sample gradients land in their own slot; the reduction below runs
    // in sample order so results do not depend on the thread count.
    std::vector<ParamSet> sample_grads(samples.size());
    std::vector<double> sample_sq(samples.size(), 0.0);
    parallel_for(samples.size(), exec, [&](std::size_t s) {
        sample_grads[s] = ParamSet::zeros(model.n_links, model.n_hops);
        std::vector<StepCache> caches;
        const Vector pred = forward_cached(model, windows, samples[s], caches);
        const auto target = windows.target(samples[s]);
        Vector d_hidden(n);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = pred[i] - target[i];
            sq += r * r;
            d_hidden[i] = 2.0 * r / denom;
        }
        sample_sq[s] = sq;
        backward_sample(model, windows, samples[s], caches, std::move(d_hidden),
                        sample_grads[s]);
    });

    BackwardResult result;
    result.grads = ParamSet::zeros(model.n_links, model.n_hops);
    double sq_total = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        sq_total += sample_sq[s];
        add_params(result.grads, sample_grads[s]);
    }
    result.loss = sq_total / denom;
    require(std::isfinite(result.loss), Errc::non_finite, "loss diverged");
    return result;
}

void rmsprop_update(GltModel& model, const ParamSet& grads, ParamSet& opt_state,
                    const TrainConfig& config) {
    validate_train_config(config);
    auto theta = tensor_refs(model.params);
    auto g = tensor_refs(const_cast<ParamSet&>(grads));
    auto s = tensor_refs(opt_state);
    require(theta.size() == g.size() && theta.size() == s.size(), Errc::shape_mismatch,
            "parameter/gradient/state tensor counts differ");

    double scale = 1.0;
    if (config.clip_norm > 0.0) {
        double sq = 0.0;
        for (auto& ref : g)
            for (std::size_t i = 0; i < ref.size; ++i) sq += ref.data[i] * ref.data[i];
        const double norm = std::sqrt(sq);
        if (norm > config.clip_norm) scale = config.clip_norm / norm;
    }

    for (std::size_t t = 0; t < theta.size(); ++t) {
        require(theta[t].size == g[t].size && theta[t].size == s[t].size, Errc::shape_mismatch,
                "tensor shape mismatch in update");
        for (std::size_t i = 0; i < theta[t].size; ++i) {
            const double grad = g[t].data[i] * scale;
            double& acc = s[t].data[i];
            acc = config.rmsprop_alpha * acc + (1.0 - config.rmsprop_alpha) * grad * grad;
            theta[t].data[i] -= config.learning_rate * grad / (std::sqrt(acc) +
                                                               config.rmsprop_epsilon);
            require(std::isfinite(theta[t].data[i]), Errc::non_finite,
                    "parameter diverged in " + theta[t].name);
        }
    }
}

double validation_mse(const GltModel& model, const WindowSet& windows, Exec exec) {
    require(windows.count() > 0, Errc::empty_dataset, "no validation windows");
    const auto n = static_cast<std::size_t>(model.n_links);
    std::vector<double> sample_sq(windows.count(), 0.0);
    parallel_for(windows.count(), exec, [&](std::size_t s) {
        const Vector pred = forward(model, windows, s);
        const auto target = windows.target(s);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = pred[i] - target[i];
            sq += r * r;
        }
        sample_sq[s] = sq;
    });
    const double total = std::accumulate(sample_sq.begin(), sample_sq.end(), 0.0);
    return total / (static_cast<double>(windows.count()) * static_cast<double>(n));
}

TrainResult train(GltModel model, const WindowSet& train_windows, const WindowSet& val_windows,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
    validate_train_config(config);
    require(train_windows.count() > 0, Errc::empty_dataset, "no training windows");
    require(val_windows.count() > 0, Errc::empty_dataset, "no validation windows");

    Rng rng(config.seed);
    ParamSet opt_state = ParamSet::zeros(model.n_links, model.n_hops);
    std::vector<std::size_t> order(train_windows.count());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    result.model = model;
    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t at = 0; at < order.size();
             at += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t len =
                std::min(static_cast<std::size_t>(config.batch_size), order.size() - at);
            auto batch = std::span<const std::size_t>(order).subspan(at, len);
            BackwardResult back = backward(model, train_windows, batch, config.exec);
            rmsprop_update(model, back.grads, opt_state, config);
            loss_sum += back.loss;
            ++batches;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_mse = loss_sum / static_cast<double>(batches);
        stats.val_mse = validation_mse(model, val_windows, config.exec);
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.epochs.push_back(stats);
        if (on_epoch) on_epoch(stats);

        if (stats.val_mse < best_val) {
            best_val = stats.val_mse;
            result.log.best_epoch = epoch;
            result.model = model;  // snapshot of the best parameters
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
            if (epochs_since_best >= config.early_stop_patience) {
                result.log.stop_reason = StopReason::early_stop;
                return result;
            }
        }
    }
    result.log.stop_reason = StopReason::max_epochs;
    return result;
}

GradCheckReport gradient_check(const GltModel& model, const WindowSet& windows,
                               std::span<const std::size_t> samples, double step,
                               double tolerance) {
    const BackwardResult analytic = backward(model, windows, samples, Exec::serial);
    return gradient_check_against(model, windows, samples, step, tolerance, analytic.grads);
}

GradCheckReport gradient_check_against(const GltModel& model, const WindowSet& windows,
                                       std::span<const std::size_t> samples, double step,
                                       double tolerance, const ParamSet& analytic) {
    require(step > 0.0, Errc::bad_params, "step must be positive");
    GltModel probe = model;  // perturbed copy

    auto loss_at = [&]() {
        std::vector<Vector> preds;
        std::vector<Vector> targets;
        preds.reserve(samples.size());
        for (std::size_t s : samples) {
            preds.push_back(forward(probe, windows, s));
            auto t = windows.target(s);
            targets.emplace_back(t.begin(), t.end());
        }
        return mse_loss(preds, targets);
    };

    auto probe_refs = tensor_refs(probe.params);
    auto grad_refs = tensor_refs(const_cast<ParamSet&>(analytic));

    GradCheckReport report;
    for (std::size_t t = 0; t < probe_refs.size(); ++t) {
        GradCheckBlock block;
        block.name = probe_refs[t].name;
        for (std::size_t i = 0; i < probe_refs[t].size; ++i) {
            double& theta = probe_refs[t].data[i];
            const double saved = theta;
            theta = saved + step;
            const double up = loss_at();
            theta = saved - step;
            const double down = loss_at();
            theta = saved;
            const double fd = (up - down) / (2.0 * step);
            const double an = grad_refs[t].data[i];
            const double denom = std::max({std::abs(an), std::abs(fd), 1e-6});
            const double rel = std::abs(an - fd) / denom;
            if (rel > block.max_rel_error) {
                block.max_rel_error = rel;
                block.worst_index = i;
            }
            if (rel > tolerance) ++block.flagged;
        }
        report.max_rel_error = std::max(report.max_rel_error, block.max_rel_error);
        report.flagged += block.flagged;
        report.blocks.push_back(std::move(block));
    }
    report.ok = report.flagged == 0;
    return report;
}

}  // namespace glt
