#include "trendlab/neural.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "trendlab/error.hpp"

namespace trendlab {

std::string_view to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "rnn"; }

CellKind parse_cell_kind(std::string_view text) {
  if (text == "lstm") return CellKind::lstm;
  if (text == "rnn") return CellKind::rnn;
  throw ConfigError("unknown cell kind '" + std::string(text) + "'");
}

void NetworkShape::validate() const {
  streams.validate();
  if (hidden == 0) throw ConfigError("hidden size must be positive");
  if (layers == 0) throw ConfigError("layer count must be positive");
}

namespace {

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& name) {
  if (m.rows != rows || m.cols != cols || m.data.size() != rows * cols)
    throw std::invalid_argument(name + ": expected " + std::to_string(rows) + "x" +
                                std::to_string(cols) + ", got " + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols));
}

void require_size(const Vector& v, std::size_t n, const std::string& name) {
  if (v.size() != n)
    throw std::invalid_argument(name + ": expected length " + std::to_string(n) + ", got " +
                                std::to_string(v.size()));
}

template <typename Params, typename Block>
std::vector<Block> collect_blocks(Params& p) {
  std::vector<Block> out;
  const auto add = [&out](std::string name, auto& container) {
    out.push_back(Block{std::move(name), {container.data(), container.size()}});
  };
  for (std::size_t s = 0; s < p.fusion.streams.size(); ++s) {
    add("fusion.W[" + std::to_string(s) + "]", p.fusion.streams[s].weight.data);
    add("fusion.b[" + std::to_string(s) + "]", p.fusion.streams[s].bias);
  }
  for (std::size_t l = 0; l < p.lstm.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    for (std::size_t g = 0; g < 4; ++g) {
      const std::string gate = kGateNames[g];
      add(prefix + "W_" + gate, p.lstm[l].W[g].data);
      add(prefix + "U_" + gate, p.lstm[l].U[g].data);
      add(prefix + "b_" + gate, p.lstm[l].b[g]);
    }
  }
  for (std::size_t l = 0; l < p.rnn.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    add(prefix + "U", p.rnn[l].U.data);
    add(prefix + "W", p.rnn[l].W.data);
  }
  add("head.w", p.head_weight);
  out.push_back(Block{"head.b", {&p.head_bias, 1}});
  return out;
}

}  // namespace

NetworkParameters NetworkParameters::zeros(const NetworkShape& shape) {
  shape.validate();
  NetworkParameters p;
  p.shape = shape;
  const std::size_t d_i = shape.streams.projected;
  for (std::size_t d : shape.streams.dims)
    p.fusion.streams.push_back({Matrix(d_i, d), Vector(d_i, 0.0)});
  std::size_t in = shape.streams.fused_dim();
  for (std::size_t l = 0; l < shape.layers; ++l) {
    if (shape.cell == CellKind::lstm) {
      LstmLayerParameters layer;
      for (std::size_t g = 0; g < 4; ++g) {
        layer.W[g] = Matrix(shape.hidden, in);
        layer.U[g] = Matrix(shape.hidden, shape.hidden);
        layer.b[g] = Vector(shape.hidden, 0.0);
      }
      p.lstm.push_back(std::move(layer));
    } else {
      p.rnn.push_back({Matrix(shape.hidden, in), Matrix(shape.hidden, shape.hidden)});
    }
    in = shape.hidden;
  }
  p.head_weight.assign(shape.hidden, 0.0);
  return p;
}

std::vector<ParamBlock> NetworkParameters::blocks() {
  return collect_blocks<NetworkParameters, ParamBlock>(*this);
}

std::vector<ConstParamBlock> NetworkParameters::blocks() const {
  return collect_blocks<const NetworkParameters, ConstParamBlock>(*this);
}

std::size_t NetworkParameters::count() const {
  std::size_t n = 0;
  for (const auto& b : blocks()) n += b.values.size();
  return n;
}

void NetworkParameters::validate() const {
  shape.validate();
  const std::size_t d_i = shape.streams.projected;
  if (fusion.streams.size() != shape.streams.dims.size())
    throw std::invalid_argument("fusion stream count does not match the layout");
  for (std::size_t s = 0; s < fusion.streams.size(); ++s) {
    require_shape(fusion.streams[s].weight, d_i, shape.streams.dims[s], "fusion weight");
    require_size(fusion.streams[s].bias, d_i, "fusion bias");
  }
  const bool is_lstm = shape.cell == CellKind::lstm;
  if ((is_lstm ? lstm.size() : rnn.size()) != shape.layers || (is_lstm ? !rnn.empty() : !lstm.empty()))
    throw std::invalid_argument("layer count does not match the shape");
  std::size_t in = shape.streams.fused_dim();
  for (std::size_t l = 0; l < shape.layers; ++l) {
    if (is_lstm) {
      for (std::size_t g = 0; g < 4; ++g) {
        require_shape(lstm[l].W[g], shape.hidden, in, "lstm W");
        require_shape(lstm[l].U[g], shape.hidden, shape.hidden, "lstm U");
        require_size(lstm[l].b[g], shape.hidden, "lstm b");
      }
    } else {
      require_shape(rnn[l].U, shape.hidden, in, "rnn U");
      require_shape(rnn[l].W, shape.hidden, shape.hidden, "rnn W");
    }
    in = shape.hidden;
  }
  require_size(head_weight, shape.hidden, "head weight");
}

Vector sigmoid(std::span<const double> z) {
  Vector out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = logistic(z[k]);
  return out;
}

Vector rnn_step(std::span<const double> x, std::span<const double> s_prev, const Matrix& U,
                const Matrix& W) {
  if (U.cols != x.size() || W.cols != s_prev.size() || W.rows != s_prev.size() ||
      U.rows != W.rows)
    throw std::invalid_argument("rnn_step: shape mismatch");
  Vector s(U.rows, 0.0);
  gemv_acc(U, x, s);
  gemv_acc(W, s_prev, s);
  for (double& v : s) v = std::tanh(v);
  return s;
}

std::pair<LstmState, GateRecord> lstm_step(std::span<const double> x, const LstmState& state,
                                           const LstmLayerParameters& params) {
  const std::size_t hidden = params.hidden();
  if (params.input() != x.size() || state.h.size() != hidden || state.c.size() != hidden)
    throw std::invalid_argument("lstm_step: shape mismatch");
  std::array<Vector, 4> z;
  for (std::size_t g = 0; g < 4; ++g) {
    z[g] = params.b[g];
    gemv_acc(params.W[g], x, z[g]);
    gemv_acc(params.U[g], state.h, z[g]);
  }
  GateRecord rec;
  rec.forget = sigmoid(z[kForget]);
  rec.input = sigmoid(z[kInput]);
  rec.output = sigmoid(z[kOutput]);
  rec.candidate.resize(hidden);
  for (std::size_t k = 0; k < hidden; ++k) rec.candidate[k] = std::tanh(z[kCandidate][k]);

  LstmState next{Vector(hidden), Vector(hidden)};
  for (std::size_t k = 0; k < hidden; ++k) {
    next.c[k] = rec.forget[k] * state.c[k] + rec.input[k] * rec.candidate[k];
    next.h[k] = rec.output[k] * std::tanh(next.c[k]);
  }
  if (!all_finite(next.c) || !all_finite(next.h))
    throw DivergenceError("non-finite LSTM state", -1);
  return {std::move(next), std::move(rec)};
}

std::vector<GateTrace> ForwardResult::traces() const {
  std::vector<GateTrace> out;
  for (const auto& l : layers)
    if (!l.gates.forget.empty()) out.push_back(l.gates);
  return out;
}

namespace {

void forward_lstm_layer(const LstmLayerParameters& p, LayerCache& cache) {
  const std::size_t H = cache.hidden, T = cache.steps, in = cache.input;
  cache.c.assign((T + 1) * H, 0.0);
  cache.tanh_c.assign(T * H, 0.0);
  auto& g = cache.gates;
  g.steps = T;
  g.hidden = H;
  g.forget.assign(T * H, 0.0);
  g.input.assign(T * H, 0.0);
  g.output.assign(T * H, 0.0);
  g.candidate.assign(T * H, 0.0);
  std::vector<double*> dst = {g.forget.data(), g.input.data(), g.output.data(),
                              g.candidate.data()};
  for (std::size_t t = 0; t < T; ++t) {
    std::span<const double> x(cache.x.data() + t * in, in);
    std::span<const double> h_prev(cache.h.data() + t * H, H);
    for (std::size_t k = 0; k < 4; ++k) {
      std::span<double> z(dst[k] + t * H, H);
      std::copy(p.b[k].begin(), p.b[k].end(), z.begin());
      gemv_acc(p.W[k], x, z);
      gemv_acc(p.U[k], h_prev, z);
      if (k == kCandidate) {
        for (double& v : z) v = std::tanh(v);
      } else {
        for (double& v : z) v = logistic(v);
      }
    }
    const double* c_prev = cache.c.data() + t * H;
    double* c = cache.c.data() + (t + 1) * H;
    double* h = cache.h.data() + (t + 1) * H;
    double* tc = cache.tanh_c.data() + t * H;
    for (std::size_t k = 0; k < H; ++k) {
      const std::size_t i = t * H + k;
      c[k] = g.forget[i] * c_prev[k] + g.input[i] * g.candidate[i];
      tc[k] = std::tanh(c[k]);
      h[k] = g.output[i] * tc[k];
    }
  }
}

void forward_rnn_layer(const RnnLayerParameters& p, LayerCache& cache) {
  const std::size_t H = cache.hidden, T = cache.steps, in = cache.input;
  for (std::size_t t = 0; t < T; ++t) {
    std::span<double> s(cache.h.data() + (t + 1) * H, H);
    gemv_acc(p.U, std::span<const double>(cache.x.data() + t * in, in), s);
    gemv_acc(p.W, std::span<const double>(cache.h.data() + t * H, H), s);
    for (double& v : s) v = std::tanh(v);
  }
}

}  // namespace

ForwardResult forward_sequence(std::span<const double> window, std::size_t steps,
                               const NetworkParameters& params) {
  const auto& shape = params.shape;
  const std::size_t in_dim = shape.streams.input_dim();
  if (steps == 0) throw std::invalid_argument("forward_sequence: empty window");
  if (window.size() != steps * in_dim)
    throw std::invalid_argument("forward_sequence: window size does not match the input layout");

  ForwardResult out;
  out.inputs.assign(window.begin(), window.end());
  std::vector<double> layer_input;
  layer_input.reserve(steps * shape.streams.fused_dim());
  for (std::size_t t = 0; t < steps; ++t) {
    const auto fused = fuse_row(window.subspan(t * in_dim, in_dim), shape.streams, params.fusion);
    layer_input.insert(layer_input.end(), fused.begin(), fused.end());
  }

  std::size_t in = shape.streams.fused_dim();
  out.layers.resize(shape.layers);
  for (std::size_t l = 0; l < shape.layers; ++l) {
    auto& cache = out.layers[l];
    cache.steps = steps;
    cache.input = in;
    cache.hidden = shape.hidden;
    cache.x = std::move(layer_input);
    cache.h.assign((steps + 1) * shape.hidden, 0.0);
    if (shape.cell == CellKind::lstm) {
      forward_lstm_layer(params.lstm[l], cache);
    } else {
      forward_rnn_layer(params.rnn[l], cache);
    }
    layer_input.assign(cache.h.begin() + static_cast<std::ptrdiff_t>(shape.hidden), cache.h.end());
    in = shape.hidden;
  }

  const auto& top = out.layers.back();
  const double* h_last = top.h.data() + steps * shape.hidden;
  double y = params.head_bias;
  for (std::size_t k = 0; k < shape.hidden; ++k) y += params.head_weight[k] * h_last[k];
  if (!std::isfinite(y)) throw DivergenceError("non-finite prediction", -1);
  out.prediction = y;
  return out;
}

namespace {

// dh: steps x hidden upstream gradient w.r.t. this layer's outputs; returns dx (steps x input).
std::vector<double> backward_lstm_layer(const LayerCache& cache, const LstmLayerParameters& p,
                                        const std::vector<double>& dh, LstmLayerParameters& g) {
  const std::size_t H = cache.hidden, T = cache.steps, in = cache.input;
  const auto& gt = cache.gates;
  std::vector<double> dx(T * in, 0.0);
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0);
  std::array<std::vector<double>, 4> dz;
  for (auto& v : dz) v.assign(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    const double* c_prev = cache.c.data() + t * H;
    for (std::size_t k = 0; k < H; ++k) {
      const std::size_t i = t * H + k;
      const double f = gt.forget[i], in_g = gt.input[i], o = gt.output[i], cand = gt.candidate[i];
      const double tc = cache.tanh_c[i];
      const double dh_k = dh[i] + dh_next[k];
      const double dc = dc_next[k] + dh_k * o * (1.0 - tc * tc);
      dz[kOutput][k] = dh_k * tc * o * (1.0 - o);
      dz[kForget][k] = dc * c_prev[k] * f * (1.0 - f);
      dz[kInput][k] = dc * cand * in_g * (1.0 - in_g);
      dz[kCandidate][k] = dc * in_g * (1.0 - cand * cand);
      dc_next[k] = dc * f;
    }
    std::span<const double> x(cache.x.data() + t * in, in);
    std::span<const double> h_prev(cache.h.data() + t * H, H);
    std::span<double> dx_t(dx.data() + t * in, in);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
      outer_acc(dz[k], x, g.W[k]);
      outer_acc(dz[k], h_prev, g.U[k]);
      for (std::size_t j = 0; j < H; ++j) g.b[k][j] += dz[k][j];
      gemv_t_acc(p.W[k], dz[k], dx_t);
      gemv_t_acc(p.U[k], dz[k], dh_next);
    }
  }
  return dx;
}

std::vector<double> backward_rnn_layer(const LayerCache& cache, const RnnLayerParameters& p,
                                       const std::vector<double>& dh, RnnLayerParameters& g) {
  const std::size_t H = cache.hidden, T = cache.steps, in = cache.input;
  std::vector<double> dx(T * in, 0.0);
  std::vector<double> ds_next(H, 0.0), dz(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    const double* s = cache.h.data() + (t + 1) * H;
    for (std::size_t k = 0; k < H; ++k)
      dz[k] = (dh[t * H + k] + ds_next[k]) * (1.0 - s[k] * s[k]);
    std::span<const double> x(cache.x.data() + t * in, in);
    std::span<const double> s_prev(cache.h.data() + t * H, H);
    outer_acc(dz, x, g.U);
    outer_acc(dz, s_prev, g.W);
    gemv_t_acc(p.U, dz, std::span<double>(dx.data() + t * in, in));
    std::fill(ds_next.begin(), ds_next.end(), 0.0);
    gemv_t_acc(p.W, dz, ds_next);
  }
  return dx;
}

}  // namespace

void accumulate_gradients(const ForwardResult& cache, const NetworkParameters& params,
                          double d_prediction, NetworkParameters& grads) {
  const auto& shape = params.shape;
  if (cache.layers.size() != shape.layers || !(grads.shape == shape))
    throw std::invalid_argument("backward: cache or gradient shape does not match the parameters");
  const std::size_t H = shape.hidden, T = cache.steps();
  if (d_prediction == 0.0) return;

  const double* h_last = cache.layers.back().h.data() + T * H;
  for (std::size_t k = 0; k < H; ++k) grads.head_weight[k] += d_prediction * h_last[k];
  grads.head_bias += d_prediction;

  std::vector<double> dh(T * H, 0.0);
  for (std::size_t k = 0; k < H; ++k) dh[(T - 1) * H + k] = d_prediction * params.head_weight[k];

  for (std::size_t l = shape.layers; l-- > 0;) {
    if (shape.cell == CellKind::lstm) {
      dh = backward_lstm_layer(cache.layers[l], params.lstm[l], dh, grads.lstm[l]);
    } else {
      dh = backward_rnn_layer(cache.layers[l], params.rnn[l], dh, grads.rnn[l]);
    }
  }

  // dh now holds d/d(fused input), steps x fused_dim.
  const auto& layout = shape.streams;
  const std::size_t in_dim = layout.input_dim(), fused = layout.fused_dim();
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t offset = 0;
    for (std::size_t s = 0; s < layout.dims.size(); ++s) {
      std::span<const double> d(dh.data() + t * fused + s * layout.projected, layout.projected);
      std::span<const double> v(cache.inputs.data() + t * in_dim + offset, layout.dims[s]);
      outer_acc(d, v, grads.fusion.streams[s].weight);
      auto& b = grads.fusion.streams[s].bias;
      for (std::size_t k = 0; k < layout.projected; ++k) b[k] += d[k];
      offset += layout.dims[s];
    }
  }
}

NetworkParameters backward_sequence(const ForwardResult& cache, const NetworkParameters& params,
                                    double d_prediction) {
  auto grads = NetworkParameters::zeros(params.shape);
  accumulate_gradients(cache, params, d_prediction, grads);
  return grads;
}

NetworkParameters init_parameters(const NetworkShape& shape, std::uint64_t seed,
                                  const InitOptions& options) {
  auto p = NetworkParameters::zeros(shape);
  std::mt19937_64 rng(seed);
  const auto fill = [&rng](Matrix& m) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
    for (double& v : m.data) {
      // 53 random mantissa bits -> [0, 1); std::mt19937_64 output is fully specified.
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v = limit * (2.0 * u - 1.0);
    }
  };
  for (auto& s : p.fusion.streams) fill(s.weight);
  for (auto& layer : p.lstm) {
    for (std::size_t g = 0; g < 4; ++g) {
      fill(layer.W[g]);
      fill(layer.U[g]);
    }
    std::fill(layer.b[kForget].begin(), layer.b[kForget].end(), options.forget_bias);
  }
  for (auto& layer : p.rnn) {
    fill(layer.U);
    fill(layer.W);
  }
  Matrix head(1, shape.hidden);
  fill(head);
  p.head_weight = head.data;
  return p;
}

double mean_forget_activation(std::span<const GateTrace> traces) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& t : traces) {
    for (double f : t.forget) sum += f;
    n += t.forget.size();
  }
  if (n == 0) throw std::invalid_argument("mean_forget_activation: no forget-gate values");
  return sum / static_cast<double>(n);
}

}  // namespace trendlab
