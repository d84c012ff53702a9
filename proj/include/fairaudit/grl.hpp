#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace fairaudit {

// ---------------------------------------------------------------------------
// Gradient reversal junction

/// Identity. λ only matters on the way back.
std::vector<double> grl_forward(std::span<const double> h, double lambda);

/// -λ * g, elementwise.
std::vector<double> grl_backward(std::span<const double> upstream, double lambda);

// ---------------------------------------------------------------------------
// Small fully connected nets

enum class OutputActivation { Linear, Logistic };

/// Rectifier on hidden layers. A Logistic net returns logits from forward();
/// its loss applies the sigmoid (binary cross-entropy on the logit).
struct TinyNet {
  std::vector<std::size_t> dims;              // input, hidden..., output
  std::vector<std::vector<double>> weights;   // weights[l]: dims[l+1] x dims[l], row-major
  std::vector<std::vector<double>> biases;    // biases[l]: dims[l+1]
  OutputActivation output = OutputActivation::Linear;

  /// He-uniform weights, zero biases.
  static TinyNet make(std::vector<std::size_t> dims, OutputActivation output,
                      std::mt19937_64& engine);

  std::size_t layers() const { return weights.size(); }
  std::size_t input_dim() const { return dims.front(); }
  std::size_t output_dim() const { return dims.back(); }
  std::size_t parameter_count() const;

  /// Input and every layer's output (rectified on hidden layers, raw on the
  /// last), kept for backward.
  struct Trace {
    std::vector<std::vector<double>> activations;
  };
  Trace forward(std::span<const double> x) const;
  std::vector<double> predict(std::span<const double> x) const;
};

struct NetGrad {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static NetGrad zeros_like(const TinyNet& net);
  NetGrad& operator+=(const NetGrad& other);
  void scale(double factor);
  std::vector<double> flatten() const;
};

/// Accumulates parameter gradients into `grad` given dL/d(output) and returns
/// dL/d(input).
std::vector<double> backward(const TinyNet& net, const TinyNet::Trace& trace,
                             std::span<const double> grad_output, NetGrad& grad);

/// Every parameter in a fixed order (weights then biases, layer by layer);
/// matches NetGrad::flatten.
std::vector<double*> parameters(TinyNet& net);

// ---------------------------------------------------------------------------
// Adversarial setup

/// Rows of features with a task label y and a protected label z.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> features;  // rows x dim
  std::vector<int> labels;
  std::vector<int> protected_labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span(features).subspan(i * dim, dim);
  }
};

void validate(const Dataset& data);

/// Encoder f, task heads standing in for the two pretraining losses, and
/// discriminators reading J(f(x)) to predict z. Both discriminators predict
/// the same protected label.
struct AdvSetup {
  TinyNet encoder;
  std::vector<TinyNet> task_heads;
  std::vector<TinyNet> discriminators;
  double lambda = 1.0;
};

struct ArchSpec {
  std::vector<std::size_t> encoder_dims{8, 8, 2};
  std::size_t task_heads = 1;
  std::vector<std::size_t> head_hidden{};
  std::size_t discriminators = 2;
  std::vector<std::size_t> discriminator_hidden{8, 8};
};

/// Builds a setup with independent init streams for encoder, heads and
/// discriminators, so adding or removing discriminators leaves the rest alone.
AdvSetup make_setup(const ArchSpec& arch, double lambda, std::uint64_t seed);

/// Throws DimensionMismatch when the nets do not chain.
void validate(const AdvSetup& setup, std::size_t input_dim);

struct SetupGrad {
  NetGrad encoder;
  std::vector<NetGrad> task_heads;
  std::vector<NetGrad> discriminators;

  std::vector<double> flatten() const;
};

struct LossBreakdown {
  double task = 0.0;       // mean over rows, summed over heads
  double adversary = 0.0;  // mean over rows, summed over discriminators
  double total() const { return task + adversary; }
};

struct LossAndGrad {
  LossBreakdown loss;
  SetupGrad grad;
};

/// Loss over the given rows and its gradient. The encoder receives the task
/// gradient plus the adversary gradient passed back through the reversal
/// junction; discriminators get their ordinary gradient. Throws
/// DimensionMismatch or NonFiniteLoss.
LossAndGrad total_loss(const AdvSetup& setup, const Dataset& data,
                       std::span<const std::size_t> rows);

/// Loss only, for finite-difference checks.
LossBreakdown evaluate_loss(const AdvSetup& setup, const Dataset& data,
                            std::span<const std::size_t> rows);

/// Every parameter of the setup, in SetupGrad::flatten order. The first
/// encoder.parameter_count() entries belong to the encoder.
std::vector<double*> parameters(AdvSetup& setup);

struct GrlConfig {
  double lambda = 1.0;
  double learning_rate = 0.05;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double holdout_fraction = 0.25;
  ArchSpec arch;
};

void validate(const GrlConfig& config);
GrlConfig grl_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const GrlConfig& config);

struct TrainReport {
  std::vector<double> task_loss;       // per epoch, training-set mean
  std::vector<double> adversary_loss;  // per epoch, training-set mean
  std::vector<double> heldout_task_accuracy;
  std::vector<double> heldout_adversary_accuracy;  // best discriminator
  double final_task_accuracy = 0.0;
  double final_adversary_accuracy = 0.0;
  double adversary_chance = 0.0;  // majority-class rate of z on the held-out rows
  std::vector<std::vector<double>> encoder_trajectory;  // encoder parameters after each epoch
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> heldout_rows;
  AdvSetup model;
};

nlohmann::json to_json(const TrainReport& report);

/// Plain SGD on total_loss. The hold-out split and the batch order come from
/// their own streams. Throws Divergence (with the epoch) on a non-finite loss.
TrainReport train_adversarial(const Dataset& data, const GrlConfig& config);

/// Encoder outputs for every row.
Dataset encode(const TinyNet& encoder, const Dataset& data);

// ---------------------------------------------------------------------------
// Post-hoc attribute probe

struct ProbeMetrics {
  double auroc = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double auprc = 0.0;
  double log_loss = 0.0;
};

struct PosthocConfig {
  std::vector<std::size_t> hidden{16, 16};
  double learning_rate = 0.05;
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

/// Trains a fresh rectifier net on frozen features to predict the protected
/// label, with k-fold cross-fitting so every row is scored by a model that
/// never saw it. Precision and recall use a 0.5 cut. Throws SingleClassInput.
ProbeMetrics posthoc_probe(const Dataset& representations, const PosthocConfig& config = {});

/// Fixed-order rendering: AUROC, Precision, Recall, AUPRC, Log Loss.
std::string render_probe_metrics(const ProbeMetrics& metrics);
nlohmann::json to_json(const ProbeMetrics& metrics);

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticDataSpec {
  std::size_t samples = 2000;
  std::size_t task_dims = 4;
  std::size_t protected_dims = 4;
  double task_shift = 1.0;
  double protected_shift = 1.0;
  double noise = 1.0;
  double correlation = 0.0;  // P(z = y) = (1 + correlation) / 2
  std::uint64_t seed = 0;
};

void validate(const SyntheticDataSpec& spec);
SyntheticDataSpec synthetic_spec_from_json(const nlohmann::json& doc);

/// y ~ Bernoulli(1/2); z agrees with y with probability (1 + correlation) / 2.
/// Task features are N(±shift, noise²) by y, protected features by z.
Dataset gen_synthetic(const SyntheticDataSpec& spec);

/// Header: label, protected, t0..., p0... (or x0... when the split is unknown).
void write_dataset_csv(std::ostream& out, const Dataset& data, std::size_t task_dims = 0);

}  // namespace fairaudit
