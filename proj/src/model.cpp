#include "glt/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "glt/rng.hpp"

namespace glt {

MaskIndex MaskIndex::from_mask(const BinaryMask& mask) {
    const std::size_t n = mask.n();
    MaskIndex index;
    index.row_ptr.resize(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            if (mask.values(i, j) != 0.0) index.col.push_back(j);
        index.row_ptr[i + 1] = index.col.size();
    }
    return index;
}

ParamSet ParamSet::zeros(int n_links, int n_hops) {
    const auto n = static_cast<std::size_t>(n_links);
    const auto k = static_cast<std::size_t>(n_hops);
    ParamSet p;
    p.hop_weights.assign(k, Matrix(n, n));
    p.cell_weights = Matrix(n, n);
    for (int g = 0; g < kGateCount; ++g) {
        p.input_weights[static_cast<std::size_t>(g)] = Matrix(n, k * n);
        p.hidden_weights[static_cast<std::size_t>(g)] = Matrix(n, n);
        p.biases[static_cast<std::size_t>(g)] = Vector(n, 0.0);
    }
    return p;
}

std::vector<TensorRef> tensor_refs(ParamSet& params) {
    std::vector<TensorRef> refs;
    for (std::size_t k = 0; k < params.hop_weights.size(); ++k)
        refs.push_back({"hop_weights[" + std::to_string(k + 1) + "]",
                        params.hop_weights[k].data(), params.hop_weights[k].size()});
    refs.push_back({"cell_weights", params.cell_weights.data(), params.cell_weights.size()});
    for (int g = 0; g < kGateCount; ++g) {
        const auto gi = static_cast<std::size_t>(g);
        refs.push_back({std::string("input_weights.") + kGateNames[g],
                        params.input_weights[gi].data(), params.input_weights[gi].size()});
    }
    for (int g = 0; g < kGateCount; ++g) {
        const auto gi = static_cast<std::size_t>(g);
        refs.push_back({std::string("hidden_weights.") + kGateNames[g],
                        params.hidden_weights[gi].data(), params.hidden_weights[gi].size()});
    }
    for (int g = 0; g < kGateCount; ++g) {
        const auto gi = static_cast<std::size_t>(g);
        refs.push_back({std::string("biases.") + kGateNames[g], params.biases[gi].data(),
                        params.biases[gi].size()});
    }
    return refs;
}

GltModel GltModel::create(std::vector<BinaryMask> ultimate_masks) {
    require(!ultimate_masks.empty(), Errc::bad_k, "need at least one hop mask");
    const std::size_t n = ultimate_masks.front().n();
    for (std::size_t k = 0; k < ultimate_masks.size(); ++k) {
        const auto& mask = ultimate_masks[k];
        require(mask.n() == n && mask.values.cols() == n, Errc::shape_mismatch,
                "mask sizes differ across hops");
        require(mask.hop == static_cast<int>(k) + 1, Errc::bad_hop,
                "masks must be ordered by hop starting at 1");
    }

    GltModel model;
    model.n_links = static_cast<int>(n);
    model.n_hops = static_cast<int>(ultimate_masks.size());
    model.masks = std::move(ultimate_masks);
    for (const auto& mask : model.masks)
        model.mask_index.push_back(MaskIndex::from_mask(mask));
    model.params = ParamSet::zeros(model.n_links, model.n_hops);
    return model;
}

Vector graph_convolve(const GltModel& model, std::span<const double> x, int hop) {
    require(hop >= 1 && hop <= model.n_hops, Errc::bad_hop,
            "hop " + std::to_string(hop) + " outside 1..K");
    require(x.size() == static_cast<std::size_t>(model.n_links), Errc::shape_mismatch,
            "input width must equal N");

    const auto& index = model.mask_index[static_cast<std::size_t>(hop - 1)];
    const auto& weights = model.params.hop_weights[static_cast<std::size_t>(hop - 1)];
    Vector out(static_cast<std::size_t>(model.n_links), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (std::size_t p = index.row_ptr[i]; p < index.row_ptr[i + 1]; ++p)
            acc += weights(i, index.col[p]) * x[index.col[p]];
        out[i] = acc;
    }
    return out;
}

Vector stack_hops(const GltModel& model, std::span<const double> x) {
    const auto n = static_cast<std::size_t>(model.n_links);
    Vector stacked(n * static_cast<std::size_t>(model.n_hops));
    for (int k = 1; k <= model.n_hops; ++k) {
        Vector g = graph_convolve(model, x, k);
        std::copy(g.begin(), g.end(),
                  stacked.begin() + static_cast<std::ptrdiff_t>(n * (k - 1)));
    }
    return stacked;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Pre-activation of one gate: U_g G + R_g h_prev + b_g.
Vector gate_preactivation(const GltModel& model, int gate, const Vector& g_stack,
                          const Vector& h_prev) {
    const auto gi = static_cast<std::size_t>(gate);
    Vector pre = matvec(model.params.input_weights[gi], g_stack);
    const auto& r = model.params.hidden_weights[gi];
    for (std::size_t i = 0; i < pre.size(); ++i) {
        auto row = r.row(i);
        double acc = model.params.biases[gi][i];
        for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * h_prev[j];
        pre[i] += acc;
    }
    return pre;
}

// c_star = (W_C o S_U^K) c_prev
Vector neighbourhood_cell(const GltModel& model, const Vector& c_prev) {
    const auto& index = model.mask_index.back();
    const auto& weights = model.params.cell_weights;
    Vector out(c_prev.size(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (std::size_t p = index.row_ptr[i]; p < index.row_ptr[i + 1]; ++p)
            acc += weights(i, index.col[p]) * c_prev[index.col[p]];
        out[i] = acc;
    }
    return out;
}

}  // namespace

ModelState lstm_step(const GltModel& model, const Vector& g_stack, const ModelState& prev) {
    const auto n = static_cast<std::size_t>(model.n_links);
    require(g_stack.size() == n * static_cast<std::size_t>(model.n_hops), Errc::shape_mismatch,
            "stacked feature width must be K*N");
    require(prev.hidden.size() == n && prev.cell.size() == n, Errc::shape_mismatch,
            "state width must be N");

    Vector in_gate = gate_preactivation(model, kGateInput, g_stack, prev.hidden);
    Vector forget_gate = gate_preactivation(model, kGateForget, g_stack, prev.hidden);
    Vector out_gate = gate_preactivation(model, kGateOutput, g_stack, prev.hidden);
    Vector candidate = gate_preactivation(model, kGateCandidate, g_stack, prev.hidden);
    const Vector c_star = neighbourhood_cell(model, prev.cell);

    ModelState next{Vector(n), Vector(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double ig = sigmoid(in_gate[i]);
        const double fg = sigmoid(forget_gate[i]);
        const double og = sigmoid(out_gate[i]);
        const double cc = std::tanh(candidate[i]);
        next.cell[i] = fg * c_star[i] + ig * cc;
        next.hidden[i] = og * std::tanh(next.cell[i]);
    }
    require(all_finite(next.cell) && all_finite(next.hidden), Errc::non_finite,
            "state diverged to non-finite values");
    return next;
}

Vector forward(const GltModel& model, const Matrix& window) {
    require(window.cols() == static_cast<std::size_t>(model.n_links), Errc::shape_mismatch,
            "window width must equal N");
    require(window.rows() >= 1, Errc::bad_shape, "window must have at least one row");
    ModelState state{Vector(static_cast<std::size_t>(model.n_links), 0.0),
                     Vector(static_cast<std::size_t>(model.n_links), 0.0)};
    for (std::size_t t = 0; t < window.rows(); ++t)
        state = lstm_step(model, stack_hops(model, window.row(t)), state);
    return state.hidden;
}

Vector forward(const GltModel& model, const WindowSet& windows, std::size_t sample) {
    require(windows.links() == static_cast<std::size_t>(model.n_links), Errc::shape_mismatch,
            "window width must equal N");
    ModelState state{Vector(static_cast<std::size_t>(model.n_links), 0.0),
                     Vector(static_cast<std::size_t>(model.n_links), 0.0)};
    for (int m = 0; m < windows.window_len(); ++m)
        state = lstm_step(model, stack_hops(model, windows.input_row(sample, m)), state);
    return state.hidden;
}

GltModel init_params(int n_links, int n_hops, std::vector<BinaryMask> ultimate_masks,
                     std::uint64_t seed, double scale) {
    require(scale >= 0.0, Errc::bad_scale, "init scale must be nonnegative");
    require(static_cast<int>(ultimate_masks.size()) == n_hops, Errc::bad_k,
            "mask count must equal K");
    GltModel model = GltModel::create(std::move(ultimate_masks));
    require(model.n_links == n_links, Errc::shape_mismatch, "mask size must equal N");

    // Draw order is fixed: hop weights on support, cell weights on support,
    // then the dense gate tensors, so a seed fully determines the model.
    Rng rng(seed);
    for (int k = 0; k < n_hops; ++k) {
        const auto& index = model.mask_index[static_cast<std::size_t>(k)];
        auto& w = model.params.hop_weights[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_links); ++i)
            for (std::size_t p = index.row_ptr[i]; p < index.row_ptr[i + 1]; ++p)
                w(i, index.col[p]) = rng.uniform(-scale, scale);
    }
    {
        const auto& index = model.mask_index.back();
        auto& w = model.params.cell_weights;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_links); ++i)
            for (std::size_t p = index.row_ptr[i]; p < index.row_ptr[i + 1]; ++p)
                w(i, index.col[p]) = rng.uniform(-scale, scale);
    }
    for (int g = 0; g < kGateCount; ++g) {
        auto& u = model.params.input_weights[static_cast<std::size_t>(g)];
        for (std::size_t i = 0; i < u.size(); ++i) u.data()[i] = rng.uniform(-scale, scale);
    }
    for (int g = 0; g < kGateCount; ++g) {
        auto& r = model.params.hidden_weights[static_cast<std::size_t>(g)];
        for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] = rng.uniform(-scale, scale);
    }
    // Forget bias starts open so the cell path carries signal from step one.
    for (double& b : model.params.biases[kGateForget]) b = 1.0;
    return model;
}

// --- checkpoint format ------------------------------------------------------
// magic, version, N, K, M, H, norm mode, norm scale, per-hop mask coords,
// then every tensor in tensor_refs order as raw little-endian doubles.

namespace {

constexpr char kMagic[8] = {'G', 'L', 'T', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64(std::ofstream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

double read_f64(std::ifstream& in) {
    const std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), Errc::io_error, "cannot write " + path);
    out.write(kMagic, 8);
    write_u64(out, 1);  // version
    write_u64(out, static_cast<std::uint64_t>(checkpoint.model.n_links));
    write_u64(out, static_cast<std::uint64_t>(checkpoint.model.n_hops));
    write_u64(out, static_cast<std::uint64_t>(checkpoint.window_len));
    write_u64(out, static_cast<std::uint64_t>(checkpoint.horizon));
    write_u64(out, checkpoint.normalization.mode == NormalizationSpec::Mode::none ? 0 : 1);
    write_f64(out, checkpoint.normalization.scale);

    for (const auto& index : checkpoint.model.mask_index) {
        write_u64(out, index.nonzeros());
        const std::size_t n = index.row_ptr.size() - 1;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = index.row_ptr[i]; p < index.row_ptr[i + 1]; ++p) {
                write_u64(out, i);
                write_u64(out, index.col[p]);
            }
    }

    auto refs = tensor_refs(const_cast<ParamSet&>(checkpoint.model.params));
    for (const auto& ref : refs)
        for (std::size_t i = 0; i < ref.size; ++i) write_f64(out, ref.data[i]);
    require(out.good(), Errc::io_error, "write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::io_error, "cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    require(in.good() && std::memcmp(magic, kMagic, 8) == 0, Errc::malformed_csv,
            path + ": not a checkpoint file");
    const std::uint64_t version = read_u64(in);
    require(version == 1, Errc::malformed_csv, "unsupported checkpoint version");

    Checkpoint checkpoint;
    const auto n = static_cast<int>(read_u64(in));
    const auto hops = static_cast<int>(read_u64(in));
    checkpoint.window_len = static_cast<int>(read_u64(in));
    checkpoint.horizon = static_cast<int>(read_u64(in));
    checkpoint.normalization.mode = read_u64(in) == 0 ? NormalizationSpec::Mode::none
                                                      : NormalizationSpec::Mode::max_scale;
    checkpoint.normalization.scale = read_f64(in);
    require(n >= 1 && hops >= 1, Errc::malformed_csv, "corrupt checkpoint header");

    std::vector<BinaryMask> masks;
    for (int k = 1; k <= hops; ++k) {
        BinaryMask mask{Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n)),
                        MaskKind::ultimate, k};
        const std::uint64_t nnz = read_u64(in);
        for (std::uint64_t e = 0; e < nnz; ++e) {
            const std::size_t i = read_u64(in);
            const std::size_t j = read_u64(in);
            require(i < static_cast<std::size_t>(n) && j < static_cast<std::size_t>(n),
                    Errc::malformed_csv, "mask coordinate out of range");
            mask.values(i, j) = 1.0;
        }
        masks.push_back(std::move(mask));
    }

    checkpoint.model = GltModel::create(std::move(masks));
    auto refs = tensor_refs(checkpoint.model.params);
    for (auto& ref : refs)
        for (std::size_t i = 0; i < ref.size; ++i) ref.data[i] = read_f64(in);
    require(in.good(), Errc::malformed_csv, path + ": truncated checkpoint");
    return checkpoint;
}

}  // namespace glt
