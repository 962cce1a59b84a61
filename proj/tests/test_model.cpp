#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "glt/model.hpp"
#include "glt/rng.hpp"

using namespace glt;

namespace {

BinaryMask ultimate(Matrix values, int hop) {
    return BinaryMask{std::move(values), MaskKind::ultimate, hop};
}

std::vector<BinaryMask> all_ones_masks(std::size_t n, int hops) {
    std::vector<BinaryMask> masks;
    for (int k = 1; k <= hops; ++k) masks.push_back(ultimate(Matrix(n, n, 1.0), k));
    return masks;
}

GltModel random_model(Rng& rng, std::size_t n, int hops, double scale = 0.3) {
    std::vector<BinaryMask> masks;
    for (int k = 1; k <= hops; ++k) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (rng.unit() < 0.5) m(i, j) = 1.0;
        }
        masks.push_back(ultimate(std::move(m), k));
    }
    return init_params(static_cast<int>(n), hops, std::move(masks), rng.next(), scale);
}

// Plain textbook LSTM step, written independently of the model code.
void reference_lstm_step(const GltModel& m, const Vector& x, const Vector& h_prev,
                         const Vector& c_prev, Vector& h_out, Vector& c_out) {
    const std::size_t n = x.size();
    auto eval_gate = [&](int gate, bool is_tanh) {
        Vector out(n);
        for (std::size_t i = 0; i < n; ++i) {
            double pre = m.params.biases[static_cast<std::size_t>(gate)][i];
            for (std::size_t j = 0; j < n; ++j) {
                pre += m.params.input_weights[static_cast<std::size_t>(gate)](i, j) * x[j];
                pre += m.params.hidden_weights[static_cast<std::size_t>(gate)](i, j) *
                       h_prev[j];
            }
            out[i] = is_tanh ? std::tanh(pre) : 1.0 / (1.0 + std::exp(-pre));
        }
        return out;
    };
    const Vector i_gate = eval_gate(kGateInput, false);
    const Vector f_gate = eval_gate(kGateForget, false);
    const Vector o_gate = eval_gate(kGateOutput, false);
    const Vector c_cand = eval_gate(kGateCandidate, true);
    h_out.resize(n);
    c_out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c_out[i] = f_gate[i] * c_prev[i] + i_gate[i] * c_cand[i];
        h_out[i] = o_gate[i] * std::tanh(c_out[i]);
    }
}

}  // namespace

TEST_CASE("graph_convolve hand cases") {
    SUBCASE("all-ones weights on an all-ones mask sum the input") {
        GltModel m = GltModel::create(all_ones_masks(2, 1));
        m.params.hop_weights[0] = Matrix(2, 2, 1.0);
        const Vector g = graph_convolve(m, Vector{1.0, 2.0}, 1);
        CHECK(g[0] == 3.0);
        CHECK(g[1] == 3.0);
    }
    SUBCASE("identity mask keeps only the diagonal weight") {
        GltModel m = GltModel::create({ultimate(Matrix::identity(3), 1)});
        // weights are nonzero everywhere; the mask must hide the off-diagonal
        m.params.hop_weights[0] = Matrix(3, 3, 2.0);
        const Vector g = graph_convolve(m, Vector{1.0, 2.0, 3.0}, 1);
        CHECK(g[0] == 2.0);
        CHECK(g[1] == 4.0);
        CHECK(g[2] == 6.0);
    }
    SUBCASE("masked entries never see the input") {
        Matrix mask(2, 2, 1.0);
        mask(0, 1) = 0.0;
        GltModel m = GltModel::create({ultimate(mask, 1)});
        m.params.hop_weights[0] = Matrix(2, 2, 5.0);
        Vector x{1.0, 1.0};
        const Vector base = graph_convolve(m, x, 1);
        x[1] = 99.0;  // entry (0,1) is off-support: g[0] must not move
        const Vector bumped = graph_convolve(m, x, 1);
        CHECK(base[0] == bumped[0]);
        CHECK(base[1] != bumped[1]);
    }
    SUBCASE("hop bounds are enforced") {
        GltModel m = GltModel::create(all_ones_masks(2, 1));
        try {
            graph_convolve(m, Vector{1.0, 2.0}, 2);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::bad_hop);
        }
    }
}

TEST_CASE("stack_hops layout") {
    Rng rng(11);
    GltModel m = random_model(rng, 4, 3);
    Vector x{0.1, 0.5, 0.9, 0.3};
    const Vector stacked = stack_hops(m, x);
    CHECK(stacked.size() == 12);
    for (int k = 1; k <= 3; ++k) {
        const Vector g = graph_convolve(m, x, k);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(stacked[static_cast<std::size_t>(k - 1) * 4 + i] == g[i]);
    }

    GltModel single = GltModel::create(all_ones_masks(4, 1));
    single.params = m.params;
    single.params.hop_weights.resize(1);
    const Vector one = stack_hops(single, x);
    CHECK(one.size() == 4);
}

TEST_CASE("lstm_step zero-weight fixed point") {
    GltModel m = GltModel::create(all_ones_masks(3, 1));  // all params zero
    ModelState prev{Vector(3, 0.0), Vector(3, 0.0)};
    const Vector g = stack_hops(m, Vector{1.0, 2.0, 3.0});
    for (double v : g) CHECK(v == 0.0);
    const ModelState next = lstm_step(m, g, prev);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(next.cell[i] == 0.0);
        CHECK(next.hidden[i] == 0.0);
    }
}

TEST_CASE("lstm_step with identity cell gate matches a textbook LSTM") {
    Rng rng(19);
    const std::size_t n = 5;
    // K = 1, all-ones mask, identity conv weights: G equals the raw input.
    GltModel m = init_params(5, 1, all_ones_masks(n, 1), 3, 0.2);
    m.params.hop_weights[0] = Matrix::identity(n);
    m.params.cell_weights = Matrix::identity(n);  // c_star == c_prev

    Vector x(n), h_prev(n), c_prev(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(-1, 1);
        h_prev[i] = rng.uniform(-1, 1);
        c_prev[i] = rng.uniform(-1, 1);
    }

    const ModelState next = lstm_step(m, stack_hops(m, x), ModelState{h_prev, c_prev});
    Vector h_ref, c_ref;
    reference_lstm_step(m, x, h_prev, c_prev, h_ref, c_ref);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(next.hidden[i] - h_ref[i]) <= 1e-12);
        CHECK(std::abs(next.cell[i] - c_ref[i]) <= 1e-12);
    }
}

TEST_CASE("cell gate locality follows the hop-K mask") {
    Matrix mask(3, 3, 1.0);
    mask(0, 2) = 0.0;
    GltModel m = init_params(3, 1, {ultimate(mask, 1)}, 5, 0.3);

    Vector g(3, 0.1);
    ModelState a{Vector(3, 0.2), Vector{0.3, 0.4, 0.5}};
    ModelState b = a;
    b.cell[2] = 9.0;  // off-support w.r.t. row 0 of the mask
    const ModelState out_a = lstm_step(m, g, a);
    const ModelState out_b = lstm_step(m, g, b);
    CHECK(out_a.cell[0] == out_b.cell[0]);
    CHECK(out_a.hidden[0] == out_b.hidden[0]);
    CHECK(out_a.cell[1] != out_b.cell[1]);
}

TEST_CASE("forward basics") {
    Rng rng(23);
    GltModel m = random_model(rng, 4, 2);

    SUBCASE("M = 1 reduces to a single step") {
        Matrix window(1, 4);
        for (std::size_t j = 0; j < 4; ++j) window(0, j) = rng.uniform(0, 1);
        const Vector direct = forward(m, window);
        ModelState zero{Vector(4, 0.0), Vector(4, 0.0)};
        const ModelState step = lstm_step(m, stack_hops(m, window.row(0)), zero);
        CHECK(direct == step.hidden);
    }
    SUBCASE("zero weights predict zero for any window") {
        GltModel zero_model = GltModel::create(all_ones_masks(4, 2));
        Matrix window(6, 4, 55.0);
        for (double v : forward(zero_model, window)) CHECK(v == 0.0);
    }
    SUBCASE("outputs stay in (-1, 1)") {
        Matrix window(8, 4);
        for (std::size_t i = 0; i < window.size(); ++i) window.data()[i] = rng.uniform(0, 70);
        for (double v : forward(m, window)) CHECK(std::abs(v) < 1.0);
    }
}

TEST_CASE("relabeling links permutes the prediction") {
    Rng rng(29);
    const std::size_t n = 5;
    const int hops = 2;
    const int window_len = 4;
    GltModel m = random_model(rng, n, hops);
    Matrix window(window_len, n);
    for (std::size_t i = 0; i < window.size(); ++i) window.data()[i] = rng.uniform(0, 1);

    // permutation p maps old index -> new index
    std::vector<std::size_t> p{2, 0, 4, 1, 3};
    std::vector<BinaryMask> permuted_masks;
    for (int k = 0; k < hops; ++k) {
        Matrix pm(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                pm(p[i], p[j]) = m.masks[static_cast<std::size_t>(k)].values(i, j);
        permuted_masks.push_back(ultimate(std::move(pm), k + 1));
    }
    GltModel pm_model = GltModel::create(std::move(permuted_masks));
    for (int k = 0; k < hops; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                pm_model.params.hop_weights[static_cast<std::size_t>(k)](p[i], p[j]) =
                    m.params.hop_weights[static_cast<std::size_t>(k)](i, j);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            pm_model.params.cell_weights(p[i], p[j]) = m.params.cell_weights(i, j);
    for (int g = 0; g < kGateCount; ++g) {
        const auto gi = static_cast<std::size_t>(g);
        for (std::size_t i = 0; i < n; ++i) {
            pm_model.params.biases[gi][p[i]] = m.params.biases[gi][i];
            for (std::size_t j = 0; j < n; ++j) {
                pm_model.params.hidden_weights[gi](p[i], p[j]) =
                    m.params.hidden_weights[gi](i, j);
                for (int k = 0; k < hops; ++k)
                    pm_model.params.input_weights[gi](
                        p[i], static_cast<std::size_t>(k) * n + p[j]) =
                        m.params.input_weights[gi](i, static_cast<std::size_t>(k) * n + j);
            }
        }
    }
    Matrix permuted_window(window_len, n);
    for (std::size_t t = 0; t < static_cast<std::size_t>(window_len); ++t)
        for (std::size_t j = 0; j < n; ++j) permuted_window(t, p[j]) = window(t, j);

    const Vector base = forward(m, window);
    const Vector permuted = forward(pm_model, permuted_window);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(permuted[p[i]] - base[i]) <= 1e-12);
}

TEST_CASE("masked locality on random models, by finite differences") {
    Rng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + rng.below(4);
        const int hops = 1 + static_cast<int>(rng.below(3));
        GltModel m = random_model(rng, n, hops);
        const double h = 1e-6;

        // conv: dg^k[i]/dx[j] must vanish exactly off the hop-k support
        for (int k = 1; k <= hops; ++k) {
            const auto& mask = m.masks[static_cast<std::size_t>(k - 1)];
            Vector x(n);
            for (auto& v : x) v = rng.uniform(0, 1);
            for (std::size_t j = 0; j < n; ++j) {
                Vector up = x, down = x;
                up[j] += h;
                down[j] -= h;
                const Vector g_up = graph_convolve(m, up, k);
                const Vector g_down = graph_convolve(m, down, k);
                for (std::size_t i = 0; i < n; ++i) {
                    const double deriv = (g_up[i] - g_down[i]) / (2 * h);
                    if (mask.values(i, j) == 0.0)
                        CHECK(deriv == 0.0);
                    else
                        CHECK(std::abs(deriv - m.params.hop_weights[static_cast<std::size_t>(
                                                   k - 1)](i, j)) < 1e-6);
                }
            }
        }

        // cell gate: dc_star[i]/dc_prev[j] vanishes off the hop-K support
        const auto& top_mask = m.masks.back();
        Vector g_stack(n * static_cast<std::size_t>(hops));
        for (auto& v : g_stack) v = rng.uniform(-0.5, 0.5);
        ModelState state{Vector(n, 0.1), Vector(n)};
        for (auto& v : state.cell) v = rng.uniform(-0.5, 0.5);
        for (std::size_t j = 0; j < n; ++j) {
            ModelState bumped = state;
            bumped.cell[j] += 1.0;
            const ModelState out_base = lstm_step(m, g_stack, state);
            const ModelState out_bump = lstm_step(m, g_stack, bumped);
            for (std::size_t i = 0; i < n; ++i)
                if (top_mask.values(i, j) == 0.0) {
                    CHECK(out_base.cell[i] == out_bump.cell[i]);
                    CHECK(out_base.hidden[i] == out_bump.hidden[i]);
                }
        }
    }
}

TEST_CASE("init_params determinism and mask freezing") {
    Matrix mask(4, 4, 1.0);
    mask(0, 3) = mask(3, 0) = 0.0;
    mask(1, 2) = 0.0;
    const std::vector<BinaryMask> masks{ultimate(mask, 1)};

    const GltModel a = init_params(4, 1, masks, 99);
    const GltModel b = init_params(4, 1, masks, 99);
    const GltModel c = init_params(4, 1, masks, 100);

    auto refs_a = tensor_refs(const_cast<ParamSet&>(a.params));
    auto refs_b = tensor_refs(const_cast<ParamSet&>(b.params));
    auto refs_c = tensor_refs(const_cast<ParamSet&>(c.params));
    bool same = true;
    bool differs = false;
    for (std::size_t t = 0; t < refs_a.size(); ++t)
        for (std::size_t i = 0; i < refs_a[t].size; ++i) {
            same = same && refs_a[t].data[i] == refs_b[t].data[i];
            differs = differs || refs_a[t].data[i] != refs_c[t].data[i];
        }
    CHECK(same);
    CHECK(differs);

    CHECK(a.params.hop_weights[0](0, 3) == 0.0);
    CHECK(a.params.hop_weights[0](3, 0) == 0.0);
    CHECK(a.params.hop_weights[0](1, 2) == 0.0);
    CHECK(a.params.cell_weights(0, 3) == 0.0);
    CHECK(a.params.hop_weights[0](0, 1) != 0.0);

    SUBCASE("zero scale leaves only the forget bias") {
        const GltModel z = init_params(4, 1, masks, 1, 0.0);
        auto refs = tensor_refs(const_cast<ParamSet&>(z.params));
        for (const auto& ref : refs) {
            for (std::size_t i = 0; i < ref.size; ++i) {
                if (ref.name == "biases.forget")
                    CHECK(ref.data[i] == 1.0);
                else
                    CHECK(ref.data[i] == 0.0);
            }
        }
    }
}

TEST_CASE("checkpoint round-trip is bit-exact") {
    Rng rng(55);
    GltModel m = random_model(rng, 6, 2);
    Checkpoint original{m, 12, 1, NormalizationSpec{NormalizationSpec::Mode::max_scale, 90.0}};

    const std::string path =
        (std::filesystem::temp_directory_path() / "glt_ckpt_test.bin").string();
    save_checkpoint(path, original);
    Checkpoint loaded = load_checkpoint(path);

    CHECK(loaded.model.n_links == 6);
    CHECK(loaded.model.n_hops == 2);
    CHECK(loaded.window_len == 12);
    CHECK(loaded.horizon == 1);
    CHECK(loaded.normalization.mode == NormalizationSpec::Mode::max_scale);
    CHECK(loaded.normalization.scale == 90.0);
    for (int k = 0; k < 2; ++k)
        CHECK(loaded.model.masks[static_cast<std::size_t>(k)].values ==
              m.masks[static_cast<std::size_t>(k)].values);

    auto refs_in = tensor_refs(m.params);
    auto refs_out = tensor_refs(loaded.model.params);
    for (std::size_t t = 0; t < refs_in.size(); ++t)
        for (std::size_t i = 0; i < refs_in[t].size; ++i)
            CHECK(refs_in[t].data[i] == refs_out[t].data[i]);

    // same prediction from the reloaded model, bit for bit
    Matrix window(5, 6);
    for (std::size_t i = 0; i < window.size(); ++i) window.data()[i] = rng.uniform(0, 1);
    CHECK(forward(m, window) == forward(loaded.model, window));
}

TEST_CASE("non-finite parameters are caught in the forward pass") {
    GltModel m = GltModel::create(all_ones_masks(3, 1));
    m.params.biases[kGateOutput][0] = std::numeric_limits<double>::quiet_NaN();
    Matrix window(2, 3, 1.0);
    try {
        forward(m, window);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::non_finite);
    }
}
