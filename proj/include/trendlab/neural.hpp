#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trendlab/fusion.hpp"
#include "trendlab/linalg.hpp"

namespace trendlab {

enum class CellKind { lstm, rnn };

std::string_view to_string(CellKind kind);
CellKind parse_cell_kind(std::string_view text);

enum Gate : std::size_t { kForget = 0, kInput = 1, kOutput = 2, kCandidate = 3 };
inline constexpr std::array<const char*, 4> kGateNames = {"f", "i", "o", "c"};

struct LstmLayerParameters {
  std::array<Matrix, 4> W;  // hidden x input, indexed by Gate
  std::array<Matrix, 4> U;  // hidden x hidden
  std::array<Vector, 4> b;  // hidden

  std::size_t hidden() const { return b[kForget].size(); }
  std::size_t input() const { return W[kForget].cols; }
};

/// Elman cell s_t = tanh(U x_t + W s_{t-1}); U is the input matrix, W the recurrent one.
struct RnnLayerParameters {
  Matrix U;  // hidden x input
  Matrix W;  // hidden x hidden

  std::size_t hidden() const { return W.rows; }
  std::size_t input() const { return U.cols; }
};

struct LstmState {
  Vector h;
  Vector c;
};

/// Gate activations of one cell update.
struct GateRecord {
  Vector forget;
  Vector input;
  Vector output;
  Vector candidate;  // tanh(W_c x + U_c h + b_c)
};

/// Per-layer gate activations over a sequence, row-major steps x hidden.
struct GateTrace {
  std::size_t steps = 0;
  std::size_t hidden = 0;
  std::vector<double> forget;
  std::vector<double> input;
  std::vector<double> output;
  std::vector<double> candidate;
};

struct NetworkShape {
  CellKind cell = CellKind::lstm;
  StreamLayout streams;
  std::size_t hidden = 32;
  std::size_t layers = 3;

  void validate() const;
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Named view over one contiguous parameter tensor.
struct ParamBlock {
  std::string name;
  std::span<double> values;
};
struct ConstParamBlock {
  std::string name;
  std::span<const double> values;
};

struct NetworkParameters {
  NetworkShape shape;
  FusionParameters fusion;
  std::vector<LstmLayerParameters> lstm;  // populated for CellKind::lstm
  std::vector<RnnLayerParameters> rnn;    // populated for CellKind::rnn
  Vector head_weight;                     // hidden
  double head_bias = 0.0;

  /// All-zero parameters with the given shape (also the gradient accumulator).
  static NetworkParameters zeros(const NetworkShape& shape);

  /// Tensors in a fixed order: fusion, layers bottom-up, head. Names look like
  /// "fusion.W[0]", "layer1.U_f", "head.b".
  std::vector<ParamBlock> blocks();
  std::vector<ConstParamBlock> blocks() const;
  std::size_t count() const;

  /// Throws std::invalid_argument when tensor shapes disagree with `shape`.
  void validate() const;
};

Vector sigmoid(std::span<const double> z);

/// s_t = tanh(U x_t + W s_{t-1})
Vector rnn_step(std::span<const double> x, std::span<const double> s_prev, const Matrix& U,
                const Matrix& W);

/// One memory-cell update. Throws DivergenceError when the new state is not finite.
std::pair<LstmState, GateRecord> lstm_step(std::span<const double> x, const LstmState& state,
                                           const LstmLayerParameters& params);

/// Activations retained by forward_sequence for backpropagation.
struct LayerCache {
  std::size_t steps = 0;
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::vector<double> x;       // steps x input
  std::vector<double> h;       // (steps + 1) x hidden, row 0 is the zero initial state
  std::vector<double> c;       // (steps + 1) x hidden, LSTM only
  std::vector<double> tanh_c;  // steps x hidden, LSTM only
  GateTrace gates;             // LSTM only
};

struct ForwardResult {
  double prediction = 0.0;
  std::vector<double> inputs;  // raw window, steps x input_dim
  std::vector<LayerCache> layers;

  std::size_t steps() const { return layers.empty() ? 0 : layers.front().steps; }
  std::vector<GateTrace> traces() const;
};

/// Runs a window (row-major, `steps` rows of the stream layout's input width) through
/// fusion, the stacked cells from zero state, and the affine head on the top layer's
/// final hidden state.
ForwardResult forward_sequence(std::span<const double> window, std::size_t steps,
                               const NetworkParameters& params);

/// Adds d(prediction)/d(theta) * d_prediction into `grads` (which must be shaped like `params`).
void accumulate_gradients(const ForwardResult& cache, const NetworkParameters& params,
                          double d_prediction, NetworkParameters& grads);

NetworkParameters backward_sequence(const ForwardResult& cache, const NetworkParameters& params,
                                    double d_prediction);

struct InitOptions {
  double forget_bias = 1.0;
};

/// Glorot-uniform weights, zero biases except the forget gate. Deterministic per seed.
NetworkParameters init_parameters(const NetworkShape& shape, std::uint64_t seed,
                                  const InitOptions& options = {});

/// Mean of every forget-gate coordinate across steps, layers and traces.
double mean_forget_activation(std::span<const GateTrace> traces);

}  // namespace trendlab
