#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sersrecon/spectrum.hpp"
#include "sersrecon/synth.hpp"

namespace sers {

enum class LayerKind { kConv1d, kRelu, kMaxPool, kFlatten, kDense, kSoftmax };

// One stage of the network. Only the fields of the active kind are used.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  int out_channels = 0;  // conv1d
  int kernel_size = 0;   // conv1d
  int stride = 1;        // conv1d
  int width = 0;         // maxpool
  int out_units = 0;     // dense
};

LayerSpec conv1d(int out_channels, int kernel_size, int stride = 1);
LayerSpec relu();
LayerSpec maxpool(int width);
LayerSpec flatten();
LayerSpec dense(int out_units);
LayerSpec softmax();

struct NetworkConfig {
  int input_length = 3397;
  int n_classes = 2;
  std::vector<LayerSpec> layers;
};

// Small default stack: three conv/relu/pool blocks, a 128-unit hidden dense
// layer and an n_classes head, sized so full training stays in the seconds
// range on a desktop CPU.
NetworkConfig default_network_config(int n_classes, int input_length = 3397);

struct Shape {
  int channels = 1;
  int length = 0;

  int size() const { return channels * length; }
};

// Shape entering each layer plus the final output shape (layers + 1
// entries). Convolutions are valid-mode, pooling truncates remainders.
// Throws naming the offending layer on an inconsistent stack; also checks
// that the final dense width equals n_classes and the net ends in softmax.
std::vector<Shape> propagate_shapes(const NetworkConfig& cfg);

// Weight layouts: conv1d weights[out_ch][in_ch][k], dense weights[out][in],
// both row-major.
struct LayerParams {
  std::vector<double> weights;
  std::vector<double> bias;
};

struct Network {
  NetworkConfig config;
  std::vector<LayerParams> params;  // one per parameterized layer, layer order
  std::vector<bool> trainable;      // parallel to params

  std::size_t trainable_parameter_count() const;
};

// Indices into config.layers of the parameterized layers (conv1d/dense).
std::vector<int> parameterized_layers(const NetworkConfig& cfg);

// Fan-in-scaled uniform weights, zero biases, everything trainable.
Network init_network(const NetworkConfig& cfg, std::uint64_t seed);

// Softmax probabilities for one input; logits are clipped to +-30 first.
std::vector<double> forward(const Network& net, const FeatureVector& x);

// Argmax with ties broken toward the lower class index.
int argmax_class(const std::vector<double>& probs);

struct GradientResult {
  double loss = 0.0;                // mean cross-entropy over the batch
  std::vector<LayerParams> grads;   // parallel to params; zeros when frozen
};

GradientResult loss_and_gradients(const Network& net,
                                  const std::vector<FeatureVector>& features,
                                  const std::vector<int>& labels);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  bool nothing_to_check = false;  // no trainable parameters
};

// Central finite differences against the analytic gradients over a random
// subsample of trainable parameters (all of them when fewer than
// max_params). Relative error uses max(|a|, |n|, 1e-8) as denominator.
GradCheckResult gradient_check(const Network& net, const FeatureVector& x,
                               int label, double epsilon = 1e-4,
                               int max_params = 200, std::uint64_t seed = 1);

struct TrainConfig {
  enum class Optimizer { kSgd, kAdam };

  double learning_rate = 1e-3;
  int batch_size = 16;
  int max_epochs = 50;
  double target_val_accuracy = 0.90;  // early-stop threshold
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> train_accuracy;
  std::vector<double> val_loss;
  std::vector<double> val_accuracy;

  int epochs_run() const { return static_cast<int>(train_loss.size()); }
};

struct TrainResult {
  Network network;
  TrainHistory history;
};

// Mini-batch training on the trainable parameters only. The split is
// stratified per class by cfg.val_fraction; training stops at max_epochs or
// once validation accuracy reaches the target. Deterministic in cfg.seed:
// the shuffles come from the seeded generator, batches run sequentially.
TrainResult train(const Network& net, const LabeledDataset& data,
                  const TrainConfig& cfg);

// Fraction of argmax predictions matching the labels.
double evaluate(const Network& net, const LabeledDataset& data);

Network freeze_all(Network net);

// Replaces the final dense layer with a freshly initialized, trainable
// n_out-unit layer; every other parameter and mask entry is untouched.
Network replace_head(Network net, int n_out, std::uint64_t seed);

}  // namespace sers
