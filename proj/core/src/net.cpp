#include "sersrecon/net.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "sersrecon/rng.hpp"

namespace sers {

namespace {

constexpr double kLogitClip = 30.0;

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kConv1d: return "conv1d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDense: return "dense";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "?";
}

[[noreturn]] void layer_error(int index, LayerKind kind, const std::string& what) {
  throw std::invalid_argument("layer " + std::to_string(index) + " (" +
                              kind_name(kind) + "): " + what);
}

bool is_parameterized(LayerKind k) {
  return k == LayerKind::kConv1d || k == LayerKind::kDense;
}

// Activations recorded along a forward pass: acts[i] is the input of layer
// (start + i), the last entry is the output probabilities. argmax holds the
// flat input index chosen per pooled output.
struct Tape {
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<int>> argmax;
};

void apply_layer(const LayerSpec& spec, const LayerParams* P, const Shape& in,
                 const Shape& out, const std::vector<double>& x,
                 std::vector<double>& y, std::vector<int>* amax) {
  switch (spec.kind) {
    case LayerKind::kConv1d: {
      const int ci_n = in.channels, li = in.length;
      const int co_n = out.channels, lo = out.length;
      const int k = spec.kernel_size, s = spec.stride;
      y.assign(static_cast<std::size_t>(co_n) * lo, 0.0);
      for (int co = 0; co < co_n; ++co) {
        double* yrow = y.data() + static_cast<std::size_t>(co) * lo;
        const double b = P->bias[co];
        for (int o = 0; o < lo; ++o) yrow[o] = b;
        for (int ci = 0; ci < ci_n; ++ci) {
          const double* xrow = x.data() + static_cast<std::size_t>(ci) * li;
          const double* wrow =
              P->weights.data() + (static_cast<std::size_t>(co) * ci_n + ci) * k;
          for (int kk = 0; kk < k; ++kk) {
            const double w = wrow[kk];
            for (int o = 0; o < lo; ++o) yrow[o] += w * xrow[o * s + kk];
          }
        }
      }
      break;
    }
    case LayerKind::kRelu: {
      y.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
      break;
    }
    case LayerKind::kMaxPool: {
      const int w = spec.width, c_n = in.channels, li = in.length, lo = out.length;
      y.resize(static_cast<std::size_t>(c_n) * lo);
      if (amax) amax->resize(y.size());
      for (int c = 0; c < c_n; ++c) {
        const double* xrow = x.data() + static_cast<std::size_t>(c) * li;
        for (int o = 0; o < lo; ++o) {
          int best = o * w;
          double bv = xrow[best];
          for (int j = 1; j < w; ++j)
            if (xrow[o * w + j] > bv) { best = o * w + j; bv = xrow[best]; }
          y[static_cast<std::size_t>(c) * lo + o] = bv;
          if (amax) (*amax)[static_cast<std::size_t>(c) * lo + o] = c * li + best;
        }
      }
      break;
    }
    case LayerKind::kFlatten: {
      y = x;  // layout is already row-major over (channel, position)
      break;
    }
    case LayerKind::kDense: {
      const int in_n = in.length, out_n = out.length;
      y.resize(out_n);
      for (int o = 0; o < out_n; ++o) {
        const double* wrow = P->weights.data() + static_cast<std::size_t>(o) * in_n;
        double acc = P->bias[o];
        for (int i = 0; i < in_n; ++i) acc += wrow[i] * x[i];
        y[o] = acc;
      }
      break;
    }
    case LayerKind::kSoftmax: {
      y.resize(x.size());
      double mx = -kLogitClip;
      for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::clamp(x[i], -kLogitClip, kLogitClip);
        mx = std::max(mx, y[i]);
      }
      double sum = 0.0;
      for (double& v : y) {
        v = std::exp(v - mx);
        sum += v;
      }
      for (double& v : y) v /= sum;
      break;
    }
  }
}

// dx may be null when no earlier layer needs a delta; grad may be null for
// frozen layers. Accumulates into grad.
void backward_layer(const LayerSpec& spec, const LayerParams* P, const Shape& in,
                    const Shape& out, const std::vector<double>& x,
                    const std::vector<int>& amax, const std::vector<double>& dy,
                    std::vector<double>* dx, LayerParams* grad) {
  switch (spec.kind) {
    case LayerKind::kConv1d: {
      const int ci_n = in.channels, li = in.length;
      const int co_n = out.channels, lo = out.length;
      const int k = spec.kernel_size, s = spec.stride;
      if (dx) dx->assign(x.size(), 0.0);
      for (int co = 0; co < co_n; ++co) {
        const double* dyrow = dy.data() + static_cast<std::size_t>(co) * lo;
        if (grad) {
          double db = 0.0;
          for (int o = 0; o < lo; ++o) db += dyrow[o];
          grad->bias[co] += db;
        }
        for (int ci = 0; ci < ci_n; ++ci) {
          const double* xrow = x.data() + static_cast<std::size_t>(ci) * li;
          const std::size_t wbase = (static_cast<std::size_t>(co) * ci_n + ci) * k;
          for (int kk = 0; kk < k; ++kk) {
            if (grad) {
              double dw = 0.0;
              for (int o = 0; o < lo; ++o) dw += dyrow[o] * xrow[o * s + kk];
              grad->weights[wbase + kk] += dw;
            }
            if (dx) {
              const double w = P->weights[wbase + kk];
              double* dxrow = dx->data() + static_cast<std::size_t>(ci) * li;
              for (int o = 0; o < lo; ++o) dxrow[o * s + kk] += w * dyrow[o];
            }
          }
        }
      }
      break;
    }
    case LayerKind::kRelu: {
      if (!dx) break;
      dx->resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i)
        (*dx)[i] = x[i] > 0.0 ? dy[i] : 0.0;
      break;
    }
    case LayerKind::kMaxPool: {
      if (!dx) break;
      dx->assign(x.size(), 0.0);
      for (std::size_t i = 0; i < dy.size(); ++i) (*dx)[amax[i]] += dy[i];
      break;
    }
    case LayerKind::kFlatten: {
      if (dx) *dx = dy;
      break;
    }
    case LayerKind::kDense: {
      const int in_n = in.length, out_n = out.length;
      if (grad) {
        for (int o = 0; o < out_n; ++o) {
          grad->bias[o] += dy[o];
          double* gw = grad->weights.data() + static_cast<std::size_t>(o) * in_n;
          const double g = dy[o];
          for (int i = 0; i < in_n; ++i) gw[i] += g * x[i];
        }
      }
      if (dx) {
        dx->assign(in_n, 0.0);
        for (int o = 0; o < out_n; ++o) {
          const double g = dy[o];
          const double* wrow =
              P->weights.data() + static_cast<std::size_t>(o) * in_n;
          for (int i = 0; i < in_n; ++i) (*dx)[i] += wrow[i] * g;
        }
      }
      break;
    }
    case LayerKind::kSoftmax:
      // handled by the fused cross-entropy seed in backward_sample
      break;
  }
}

struct NetPlan {
  std::vector<Shape> shapes;       // shapes[i] = input of layer i
  std::vector<int> param_index;    // per layer: index into params, or -1
  std::vector<int> param_layers;   // layer index per params entry
};

NetPlan make_plan(const NetworkConfig& cfg) {
  NetPlan plan;
  plan.shapes = propagate_shapes(cfg);
  plan.param_index.assign(cfg.layers.size(), -1);
  for (std::size_t i = 0; i < cfg.layers.size(); ++i)
    if (is_parameterized(cfg.layers[i].kind)) {
      plan.param_index[i] = static_cast<int>(plan.param_layers.size());
      plan.param_layers.push_back(static_cast<int>(i));
    }
  return plan;
}

// Runs layers [start, n) over `input`, which must be the activation entering
// layer `start`. Returns the output probabilities; records into tape if given.
std::vector<double> run_layers(const Network& net, const NetPlan& plan, int start,
                               std::vector<double> input, Tape* tape) {
  const int n = static_cast<int>(net.config.layers.size());
  if (tape) {
    tape->acts.clear();
    tape->argmax.assign(n - start, {});
  }
  std::vector<double> cur = std::move(input);
  for (int i = start; i < n; ++i) {
    std::vector<double> next;
    std::vector<int>* amax =
        tape && net.config.layers[i].kind == LayerKind::kMaxPool
            ? &tape->argmax[i - start]
            : nullptr;
    const int pi = plan.param_index[i];
    apply_layer(net.config.layers[i], pi >= 0 ? &net.params[pi] : nullptr,
                plan.shapes[i], plan.shapes[i + 1], cur, next, amax);
    if (tape) tape->acts.push_back(std::move(cur));
    cur = std::move(next);
  }
  if (tape) tape->acts.push_back(cur);
  return cur;
}

double nll(const std::vector<double>& probs, int label) {
  return -std::log(std::max(probs[label], 1e-300));
}

// Cross-entropy backward from the recorded tape; layers below `stop_layer`
// are never reached (their parameters are frozen). Gradients accumulate into
// grads for trainable layers.
void backward_sample(const Network& net, const NetPlan& plan, int start,
                     const Tape& tape, int label, int stop_layer,
                     std::vector<LayerParams>& grads) {
  const int n = static_cast<int>(net.config.layers.size());
  const std::vector<double>& logits = tape.acts[n - 1 - start];
  const std::vector<double>& probs = tape.acts[n - start];

  // Seed at the softmax input; the clip is flat outside +-kLogitClip.
  std::vector<double> delta(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double d = probs[j] - (static_cast<int>(j) == label ? 1.0 : 0.0);
    delta[j] = std::fabs(logits[j]) < kLogitClip ? d : 0.0;
  }

  for (int i = n - 2; i >= stop_layer; --i) {
    const int pi = plan.param_index[i];
    const bool want_grad = pi >= 0 && net.trainable[pi];
    const bool want_dx = i > stop_layer;
    std::vector<double> dx;
    backward_layer(net.config.layers[i], pi >= 0 ? &net.params[pi] : nullptr,
                   plan.shapes[i], plan.shapes[i + 1], tape.acts[i - start],
                   tape.argmax[i - start], delta, want_dx ? &dx : nullptr,
                   want_grad ? &grads[pi] : nullptr);
    if (want_dx) delta = std::move(dx);
  }
}

std::vector<LayerParams> zero_like(const Network& net) {
  std::vector<LayerParams> z;
  z.reserve(net.params.size());
  for (const LayerParams& p : net.params)
    z.push_back({std::vector<double>(p.weights.size(), 0.0),
                 std::vector<double>(p.bias.size(), 0.0)});
  return z;
}

int fan_in_of(const NetworkConfig& cfg, const NetPlan& plan, int layer) {
  const LayerSpec& spec = cfg.layers[layer];
  if (spec.kind == LayerKind::kConv1d)
    return plan.shapes[layer].channels * spec.kernel_size;
  return plan.shapes[layer].length;
}

void init_layer_params(LayerParams& p, const LayerSpec& spec, const Shape& in,
                       int fan_in, std::uint64_t layer_seed) {
  std::size_t w_n = 0, b_n = 0;
  if (spec.kind == LayerKind::kConv1d) {
    w_n = static_cast<std::size_t>(spec.out_channels) * in.channels *
          spec.kernel_size;
    b_n = spec.out_channels;
  } else {
    w_n = static_cast<std::size_t>(spec.out_units) * in.length;
    b_n = spec.out_units;
  }
  Rng rng(layer_seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  p.weights.resize(w_n);
  for (double& w : p.weights) w = rng.uniform(-bound, bound);
  p.bias.assign(b_n, 0.0);
}

struct AdamState {
  std::vector<LayerParams> m, v;
  long t = 0;
};

void optimizer_step(Network& net, const std::vector<LayerParams>& grads,
                    const TrainConfig& cfg, AdamState& adam) {
  if (cfg.optimizer == TrainConfig::Optimizer::kSgd) {
    for (std::size_t p = 0; p < net.params.size(); ++p) {
      if (!net.trainable[p]) continue;
      for (std::size_t k = 0; k < net.params[p].weights.size(); ++k)
        net.params[p].weights[k] -= cfg.learning_rate * grads[p].weights[k];
      for (std::size_t k = 0; k < net.params[p].bias.size(); ++k)
        net.params[p].bias[k] -= cfg.learning_rate * grads[p].bias[k];
    }
    return;
  }

  adam.t += 1;
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.t));
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.t));
  auto update = [&](std::vector<double>& theta, std::vector<double>& m,
                    std::vector<double>& v, const std::vector<double>& g) {
    for (std::size_t k = 0; k < theta.size(); ++k) {
      m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * g[k];
      v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * g[k] * g[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      theta[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
    }
  };
  for (std::size_t p = 0; p < net.params.size(); ++p) {
    if (!net.trainable[p]) continue;
    update(net.params[p].weights, adam.m[p].weights, adam.v[p].weights,
           grads[p].weights);
    update(net.params[p].bias, adam.m[p].bias, adam.v[p].bias, grads[p].bias);
  }
}

void check_dataset(const Network& net, const LabeledDataset& data) {
  if (data.features.empty())
    throw std::invalid_argument("net: dataset has no feature vectors");
  if (data.features.size() != data.labels.size())
    throw std::invalid_argument("net: features/labels length mismatch");
  if (!data.class_names.empty() &&
      static_cast<int>(data.class_names.size()) != net.config.n_classes)
    throw std::invalid_argument("net: dataset classes do not match n_classes");
  for (int label : data.labels)
    if (label < 0 || label >= net.config.n_classes)
      throw std::invalid_argument("net: label out of range");
}

}  // namespace

LayerSpec conv1d(int out_channels, int kernel_size, int stride) {
  LayerSpec s;
  s.kind = LayerKind::kConv1d;
  s.out_channels = out_channels;
  s.kernel_size = kernel_size;
  s.stride = stride;
  return s;
}
LayerSpec relu() { return LayerSpec{LayerKind::kRelu}; }
LayerSpec maxpool(int width) {
  LayerSpec s;
  s.kind = LayerKind::kMaxPool;
  s.width = width;
  return s;
}
LayerSpec flatten() { return LayerSpec{LayerKind::kFlatten}; }
LayerSpec dense(int out_units) {
  LayerSpec s;
  s.kind = LayerKind::kDense;
  s.out_units = out_units;
  return s;
}
LayerSpec softmax() { return LayerSpec{LayerKind::kSoftmax}; }

NetworkConfig default_network_config(int n_classes, int input_length) {
  NetworkConfig cfg;
  cfg.input_length = input_length;
  cfg.n_classes = n_classes;
  cfg.layers = {conv1d(8, 21),  relu(), maxpool(4), conv1d(16, 11), relu(),
                maxpool(4),     conv1d(32, 5), relu(), maxpool(4), flatten(),
                dense(128),     relu(), dense(n_classes), softmax()};
  return cfg;
}

std::vector<Shape> propagate_shapes(const NetworkConfig& cfg) {
  if (cfg.layers.empty())
    throw std::invalid_argument("network: no layers");
  if (cfg.input_length < 1)
    throw std::invalid_argument("network: input_length must be >= 1");

  std::vector<Shape> shapes;
  shapes.reserve(cfg.layers.size() + 1);
  shapes.push_back({1, cfg.input_length});
  int last_dense = -1;

  for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
    const LayerSpec& s = cfg.layers[i];
    const Shape in = shapes.back();
    Shape out = in;
    const int idx = static_cast<int>(i);
    switch (s.kind) {
      case LayerKind::kConv1d: {
        if (s.out_channels < 1 || s.kernel_size < 1 || s.stride < 1)
          layer_error(idx, s.kind, "out_channels/kernel_size/stride must be >= 1");
        if (in.length < s.kernel_size)
          layer_error(idx, s.kind, "input length " + std::to_string(in.length) +
                                       " shorter than kernel");
        out.channels = s.out_channels;
        out.length = (in.length - s.kernel_size) / s.stride + 1;
        break;
      }
      case LayerKind::kRelu:
        break;
      case LayerKind::kMaxPool: {
        if (s.width < 1) layer_error(idx, s.kind, "width must be >= 1");
        out.length = in.length / s.width;
        if (out.length < 1)
          layer_error(idx, s.kind, "input length shorter than pool width");
        break;
      }
      case LayerKind::kFlatten:
        out.channels = 1;
        out.length = in.size();
        break;
      case LayerKind::kDense: {
        if (s.out_units < 1) layer_error(idx, s.kind, "out_units must be >= 1");
        if (in.channels != 1)
          layer_error(idx, s.kind, "needs flattened input");
        out.length = s.out_units;
        last_dense = idx;
        break;
      }
      case LayerKind::kSoftmax:
        if (in.channels != 1)
          layer_error(idx, s.kind, "needs flattened input");
        break;
    }
    if (out.length < 1 || out.channels < 1)
      layer_error(idx, s.kind, "output shape not positive");
    shapes.push_back(out);
  }

  if (cfg.layers.back().kind != LayerKind::kSoftmax)
    throw std::invalid_argument("network: final layer must be softmax");
  if (last_dense < 0)
    throw std::invalid_argument("network: needs at least one dense layer");
  if (cfg.layers[last_dense].out_units != cfg.n_classes)
    layer_error(last_dense, LayerKind::kDense,
                "out_units must equal n_classes (" +
                    std::to_string(cfg.n_classes) + ")");
  if (shapes.back().length != cfg.n_classes)
    throw std::invalid_argument("network: output length != n_classes");
  return shapes;
}

std::vector<int> parameterized_layers(const NetworkConfig& cfg) {
  std::vector<int> out;
  for (std::size_t i = 0; i < cfg.layers.size(); ++i)
    if (is_parameterized(cfg.layers[i].kind)) out.push_back(static_cast<int>(i));
  return out;
}

std::size_t Network::trainable_parameter_count() const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < params.size(); ++p)
    if (trainable[p]) n += params[p].weights.size() + params[p].bias.size();
  return n;
}

Network init_network(const NetworkConfig& cfg, std::uint64_t seed) {
  const NetPlan plan = make_plan(cfg);
  Network net;
  net.config = cfg;
  net.params.resize(plan.param_layers.size());
  net.trainable.assign(plan.param_layers.size(), true);
  for (std::size_t p = 0; p < plan.param_layers.size(); ++p) {
    const int layer = plan.param_layers[p];
    init_layer_params(net.params[p], cfg.layers[layer], plan.shapes[layer],
                      fan_in_of(cfg, plan, layer),
                      derive_seed(seed, static_cast<std::uint64_t>(layer)));
  }
  return net;
}

std::vector<double> forward(const Network& net, const FeatureVector& x) {
  if (static_cast<int>(x.values.size()) != net.config.input_length)
    throw std::invalid_argument("forward: input length mismatch");
  const NetPlan plan = make_plan(net.config);
  return run_layers(net, plan, 0, x.values, nullptr);
}

int argmax_class(const std::vector<double>& probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = static_cast<int>(i);
  return best;
}

GradientResult loss_and_gradients(const Network& net,
                                  const std::vector<FeatureVector>& features,
                                  const std::vector<int>& labels) {
  if (features.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
  if (features.size() != labels.size())
    throw std::invalid_argument("loss_and_gradients: batch size mismatch");
  for (int label : labels)
    if (label < 0 || label >= net.config.n_classes)
      throw std::invalid_argument("loss_and_gradients: label out of range");

  const NetPlan plan = make_plan(net.config);
  int stop_layer = static_cast<int>(net.config.layers.size());
  for (std::size_t p = 0; p < net.params.size(); ++p)
    if (net.trainable[p]) {
      stop_layer = plan.param_layers[p];
      break;
    }

  GradientResult res;
  res.grads = zero_like(net);
  Tape tape;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (static_cast<int>(features[i].values.size()) != net.config.input_length)
      throw std::invalid_argument("loss_and_gradients: input length mismatch");
    const std::vector<double> probs =
        run_layers(net, plan, 0, features[i].values, &tape);
    res.loss += nll(probs, labels[i]);
    if (stop_layer < static_cast<int>(net.config.layers.size()))
      backward_sample(net, plan, 0, tape, labels[i], stop_layer, res.grads);
  }

  const double inv = 1.0 / static_cast<double>(features.size());
  res.loss *= inv;
  for (LayerParams& g : res.grads) {
    for (double& v : g.weights) v *= inv;
    for (double& v : g.bias) v *= inv;
  }
  return res;
}

GradCheckResult gradient_check(const Network& net, const FeatureVector& x,
                               int label, double epsilon, int max_params,
                               std::uint64_t seed) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("gradient_check: epsilon must be > 0");

  // Flat view of the trainable coordinates.
  struct Coord { std::size_t param; bool bias; std::size_t offset; };
  std::vector<Coord> coords;
  for (std::size_t p = 0; p < net.params.size(); ++p) {
    if (!net.trainable[p]) continue;
    for (std::size_t k = 0; k < net.params[p].weights.size(); ++k)
      coords.push_back({p, false, k});
    for (std::size_t k = 0; k < net.params[p].bias.size(); ++k)
      coords.push_back({p, true, k});
  }

  GradCheckResult res;
  if (coords.empty()) {
    res.nothing_to_check = true;
    return res;
  }

  std::set<std::size_t> chosen;
  if (static_cast<int>(coords.size()) <= max_params) {
    for (std::size_t i = 0; i < coords.size(); ++i) chosen.insert(i);
  } else {
    Rng rng(derive_seed(seed, 0x6c));
    while (static_cast<int>(chosen.size()) < max_params)
      chosen.insert(static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(coords.size()) - 1)));
  }

  const GradientResult analytic = loss_and_gradients(net, {x}, {label});
  const NetPlan plan = make_plan(net.config);
  Network probe = net;

  auto loss_at = [&]() {
    const std::vector<double> probs = run_layers(probe, plan, 0, x.values, nullptr);
    return nll(probs, label);
  };

  for (std::size_t ci : chosen) {
    const Coord& c = coords[ci];
    double& theta = c.bias ? probe.params[c.param].bias[c.offset]
                           : probe.params[c.param].weights[c.offset];
    const double saved = theta;
    theta = saved + epsilon;
    const double lp = loss_at();
    theta = saved - epsilon;
    const double lm = loss_at();
    theta = saved;

    const double numeric = (lp - lm) / (2.0 * epsilon);
    const double a = c.bias ? analytic.grads[c.param].bias[c.offset]
                            : analytic.grads[c.param].weights[c.offset];
    const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
    res.max_rel_error = std::max(res.max_rel_error, std::fabs(a - numeric) / denom);
    ++res.checked;
  }
  return res;
}

TrainResult train(const Network& net, const LabeledDataset& data,
                  const TrainConfig& cfg) {
  check_dataset(net, data);
  if (!(cfg.learning_rate > 0.0) || cfg.batch_size < 1 || cfg.max_epochs < 1 ||
      !(cfg.target_val_accuracy > 0.0 && cfg.target_val_accuracy <= 1.0) ||
      !(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0))
    throw std::invalid_argument("train: invalid config");

  Network model = net;
  const NetPlan plan = make_plan(model.config);
  const int n_layers = static_cast<int>(model.config.layers.size());

  // Earliest layer with trainable parameters; activations entering it are
  // fixed during training and get cached once per sample.
  int boundary = n_layers;
  for (std::size_t p = 0; p < model.params.size(); ++p)
    if (model.trainable[p]) {
      boundary = plan.param_layers[p];
      break;
    }

  const std::size_t n_samples = data.features.size();
  std::vector<std::vector<double>> cache(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    if (static_cast<int>(data.features[i].values.size()) !=
        model.config.input_length)
      throw std::invalid_argument("train: input length mismatch");
    if (boundary == 0) {
      cache[i] = data.features[i].values;
    } else {
      // Forward through the frozen prefix only.
      std::vector<double> cur = data.features[i].values;
      for (int l = 0; l < boundary; ++l) {
        std::vector<double> next;
        const int pi = plan.param_index[l];
        apply_layer(model.config.layers[l], pi >= 0 ? &model.params[pi] : nullptr,
                    plan.shapes[l], plan.shapes[l + 1], cur, next, nullptr);
        cur = std::move(next);
      }
      cache[i] = std::move(cur);
    }
  }

  // Stratified split.
  std::vector<std::vector<std::size_t>> per_class(model.config.n_classes);
  for (std::size_t i = 0; i < n_samples; ++i)
    per_class[data.labels[i]].push_back(i);

  Rng split_rng(derive_seed(cfg.seed, 101));
  std::vector<std::size_t> train_idx, val_idx;
  for (int c = 0; c < model.config.n_classes; ++c) {
    auto& idx = per_class[c];
    const std::size_t n_c = idx.size();
    const std::size_t val_n =
        static_cast<std::size_t>(std::lround(cfg.val_fraction * static_cast<double>(n_c)));
    if (n_c == 0 || val_n == 0 || val_n == n_c)
      throw std::runtime_error("train: class " + std::to_string(c) +
                               " empty after split");
    shuffle(idx, split_rng);
    val_idx.insert(val_idx.end(), idx.begin(), idx.begin() + val_n);
    train_idx.insert(train_idx.end(), idx.begin() + val_n, idx.end());
  }

  AdamState adam;
  if (cfg.optimizer == TrainConfig::Optimizer::kAdam) {
    adam.m = zero_like(model);
    adam.v = zero_like(model);
  }

  auto eval_split = [&](const std::vector<std::size_t>& idx, double& loss,
                        double& acc) {
    loss = 0.0;
    int correct = 0;
    for (std::size_t i : idx) {
      const std::vector<double> probs =
          run_layers(model, plan, boundary, cache[i], nullptr);
      loss += nll(probs, data.labels[i]);
      if (argmax_class(probs) == data.labels[i]) ++correct;
    }
    loss /= static_cast<double>(idx.size());
    acc = static_cast<double>(correct) / static_cast<double>(idx.size());
  };

  TrainHistory history;
  Rng shuffle_rng(derive_seed(cfg.seed, 202));
  std::vector<LayerParams> grads = zero_like(model);
  Tape tape;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle(train_idx, shuffle_rng);

    double epoch_loss = 0.0;
    int epoch_correct = 0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double inv = 1.0 / static_cast<double>(end - start);

      for (LayerParams& g : grads) {
        std::fill(g.weights.begin(), g.weights.end(), 0.0);
        std::fill(g.bias.begin(), g.bias.end(), 0.0);
      }
      for (std::size_t bi = start; bi < end; ++bi) {
        const std::size_t i = train_idx[bi];
        const std::vector<double> probs =
            run_layers(model, plan, boundary, cache[i], &tape);
        epoch_loss += nll(probs, data.labels[i]);
        if (argmax_class(probs) == data.labels[i]) ++epoch_correct;
        if (boundary < n_layers)
          backward_sample(model, plan, boundary, tape, data.labels[i], boundary,
                          grads);
      }
      if (boundary < n_layers) {
        for (LayerParams& g : grads) {
          for (double& v : g.weights) v *= inv;
          for (double& v : g.bias) v *= inv;
        }
        optimizer_step(model, grads, cfg, adam);
      }
    }

    history.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));
    history.train_accuracy.push_back(static_cast<double>(epoch_correct) /
                                     static_cast<double>(train_idx.size()));

    double val_loss = 0.0, val_acc = 0.0;
    eval_split(val_idx, val_loss, val_acc);
    history.val_loss.push_back(val_loss);
    history.val_accuracy.push_back(val_acc);

    if (val_acc >= cfg.target_val_accuracy) break;
  }

  return {std::move(model), std::move(history)};
}

double evaluate(const Network& net, const LabeledDataset& data) {
  check_dataset(net, data);
  const NetPlan plan = make_plan(net.config);
  int correct = 0;
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    if (static_cast<int>(data.features[i].values.size()) !=
        net.config.input_length)
      throw std::invalid_argument("evaluate: input length mismatch");
    const std::vector<double> probs =
        run_layers(net, plan, 0, data.features[i].values, nullptr);
    if (argmax_class(probs) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.features.size());
}

Network freeze_all(Network net) {
  std::fill(net.trainable.begin(), net.trainable.end(), false);
  return net;
}

Network replace_head(Network net, int n_out, std::uint64_t seed) {
  if (n_out < 1) throw std::invalid_argument("replace_head: n_out must be >= 1");
  const std::vector<int> plist = parameterized_layers(net.config);
  if (plist.empty())
    throw std::invalid_argument("replace_head: no parameterized layers");
  const int layer = plist.back();
  if (net.config.layers[layer].kind != LayerKind::kDense)
    throw std::invalid_argument("replace_head: final parameterized layer not dense");

  net.config.layers[layer].out_units = n_out;
  net.config.n_classes = n_out;
  const NetPlan plan = make_plan(net.config);  // re-validates the stack
  const std::size_t pidx = net.params.size() - 1;
  init_layer_params(net.params[pidx], net.config.layers[layer], plan.shapes[layer],
                    fan_in_of(net.config, plan, layer),
                    derive_seed(seed, static_cast<std::uint64_t>(layer)));
  net.trainable[pidx] = true;
  return net;
}

}  // namespace sers
