#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "glt/data.hpp"
#include "glt/graph.hpp"
#include "glt/matrix.hpp"

namespace glt {

// Support of a mask in CSR form; masked matvecs, weight updates and
// checkpointing all iterate these coordinates so off-support weights are
// never touched.
struct MaskIndex {
    std::vector<std::size_t> row_ptr;  // n+1
    std::vector<std::size_t> col;

    static MaskIndex from_mask(const BinaryMask& mask);
    std::size_t nonzeros() const { return col.size(); }
};

enum Gate : int { kGateInput = 0, kGateForget = 1, kGateOutput = 2, kGateCandidate = 3 };
inline constexpr int kGateCount = 4;
inline constexpr const char* kGateNames[kGateCount] = {"input", "forget", "output",
                                                       "candidate"};

// Every trainable tensor of the model. The same struct doubles as gradient
// storage and as the optimizer's accumulator state; tensor_order() fixes
// the traversal order used for updates, checkpoints and reductions.
struct ParamSet {
    std::vector<Matrix> hop_weights;  // K of N x N, support-masked (W_g^k)
    Matrix cell_weights;              // N x N, support-masked (W_C)
    std::array<Matrix, kGateCount> input_weights;   // N x K*N (U_g)
    std::array<Matrix, kGateCount> hidden_weights;  // N x N (R_g)
    std::array<Vector, kGateCount> biases;          // N (b_g)

    static ParamSet zeros(int n_links, int n_hops);
};

struct TensorRef {
    std::string name;
    double* data;
    std::size_t size;
};

std::vector<TensorRef> tensor_refs(ParamSet& params);

struct ModelState {
    Vector hidden;  // h
    Vector cell;    // C
};

// Masked graph-convolutional recurrent model: K hop convolutions feed a
// gated cell whose previous cell state is mixed across the hop-K
// neighbourhood before the usual forget/input combination.
struct GltModel {
    int n_links = 0;
    int n_hops = 0;
    std::vector<BinaryMask> masks;       // ultimate masks, hop 1..K
    std::vector<MaskIndex> mask_index;   // support of masks[k]
    ParamSet params;

    static GltModel create(std::vector<BinaryMask> ultimate_masks);
};

// g_t^k = (W_g^k o S_U^k) x_t. Output i only sees x entries on the mask row.
Vector graph_convolve(const GltModel& model, std::span<const double> x, int hop);

// [g^1, ..., g^K] in hop order.
Vector stack_hops(const GltModel& model, std::span<const double> x);

// One step of the gated cell:
//   i,f,o = sigmoid(U G + R h + b),  c_cand = tanh(U G + R h + b)
//   c_star = (W_C o S_U^K) c_prev
//   c = f o c_star + i o c_cand,  h = o o tanh(c)
ModelState lstm_step(const GltModel& model, const Vector& g_stack, const ModelState& prev);

// Sequence-to-one pass over the M window rows from zero initial state;
// returns the final hidden vector (normalized units).
Vector forward(const GltModel& model, const Matrix& window);
Vector forward(const GltModel& model, const WindowSet& windows, std::size_t sample);

// On-support and dense weights uniform in [-scale, scale], biases zero
// except the forget gate at 1.0. Deterministic per seed.
GltModel init_params(int n_links, int n_hops, std::vector<BinaryMask> ultimate_masks,
                     std::uint64_t seed, double scale = 0.05);

// --- checkpointing ---------------------------------------------------------

// Self-describing binary checkpoint. Parameters round-trip bit-exactly.
struct Checkpoint {
    GltModel model;
    int window_len = 10;
    int horizon = 1;
    NormalizationSpec normalization;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace glt
