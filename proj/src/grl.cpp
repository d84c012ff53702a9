#include "fairaudit/grl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "fairaudit/csv.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

namespace {

// Stream ids under the config seed.
constexpr std::uint64_t kEncoderStream = 1;
constexpr std::uint64_t kHeadStream = 2;
constexpr std::uint64_t kDiscriminatorStream = 3;
constexpr std::uint64_t kSplitStream = 4;
constexpr std::uint64_t kShuffleStream = 5;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Binary cross-entropy on a logit.
double bce_with_logit(double logit, int y) {
  return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& engine) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_below(engine, i)]);
  }
}

std::vector<std::size_t> with_output(std::size_t input, const std::vector<std::size_t>& hidden,
                                     std::size_t output) {
  std::vector<std::size_t> dims{input};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output);
  return dims;
}

void sgd_step(std::vector<double*>& params, std::span<const double> grad, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) *params[i] -= lr * grad[i];
}

double accuracy(const TinyNet& net, const TinyNet* encoder, const Dataset& data,
                std::span<const std::size_t> rows, bool protected_target) {
  if (rows.empty()) return 0.0;
  std::size_t hits = 0;
  for (auto i : rows) {
    const auto x = data.row(i);
    const double logit = encoder ? net.predict(encoder->predict(x))[0] : net.predict(x)[0];
    const int y = protected_target ? data.protected_labels[i] : data.labels[i];
    hits += static_cast<int>(logit >= 0.0) == y;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

template <typename T>
T json_field(const nlohmann::json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::InvalidArgument, fmt::format("config field '{}' has the wrong type", key));
  }
}

void reject_unknown_keys(const nlohmann::json& doc, std::initializer_list<const char*> known,
                         std::string_view where) {
  if (!doc.is_object()) fail(ErrorCode::InvalidArgument, fmt::format("{} must be an object", where));
  for (const auto& [key, value] : doc.items()) {
    if (std::ranges::none_of(known, [&](const char* k) { return key == k; })) {
      fail(ErrorCode::InvalidArgument, fmt::format("unknown {} field '{}'", where, key));
    }
  }
}

}  // namespace

std::vector<double> grl_forward(std::span<const double> h, double /*lambda*/) {
  return {h.begin(), h.end()};
}

std::vector<double> grl_backward(std::span<const double> upstream, double lambda) {
  std::vector<double> out(upstream.size());
  for (std::size_t i = 0; i < upstream.size(); ++i) out[i] = -lambda * upstream[i];
  return out;
}

TinyNet TinyNet::make(std::vector<std::size_t> dims, OutputActivation output,
                      std::mt19937_64& engine) {
  if (dims.size() < 2 || std::ranges::find(dims, 0u) != dims.end()) {
    fail(ErrorCode::DimensionMismatch, "a net needs at least two non-zero layer sizes");
  }
  TinyNet net;
  net.dims = std::move(dims);
  net.output = output;
  for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(net.dims[l]));
    std::vector<double> w(net.dims[l + 1] * net.dims[l]);
    for (auto& v : w) v = (2.0 * uniform_unit(engine) - 1.0) * bound;
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(net.dims[l + 1], 0.0);
  }
  return net;
}

std::size_t TinyNet::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < layers(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

TinyNet::Trace TinyNet::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    fail(ErrorCode::DimensionMismatch,
         fmt::format("net expects {} inputs, got {}", input_dim(), x.size()));
  }
  Trace trace;
  trace.activations.reserve(layers() + 1);
  trace.activations.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layers(); ++l) {
    const auto& in = trace.activations.back();
    const std::size_t rows = dims[l + 1], cols = dims[l];
    std::vector<double> out(biases[l]);
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < cols; ++c) acc += weights[l][r * cols + c] * in[c];
      out[r] += acc;
      if (l + 1 < layers()) out[r] = std::max(out[r], 0.0);
    }
    trace.activations.push_back(std::move(out));
  }
  return trace;
}

std::vector<double> TinyNet::predict(std::span<const double> x) const {
  return std::move(forward(x).activations.back());
}

NetGrad NetGrad::zeros_like(const TinyNet& net) {
  NetGrad g;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    g.weights.emplace_back(net.weights[l].size(), 0.0);
    g.biases.emplace_back(net.biases[l].size(), 0.0);
  }
  return g;
}

NetGrad& NetGrad::operator+=(const NetGrad& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += other.weights[l][i];
    for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += other.biases[l][i];
  }
  return *this;
}

void NetGrad::scale(double factor) {
  for (auto& w : weights) for (auto& v : w) v *= factor;
  for (auto& b : biases) for (auto& v : b) v *= factor;
}

std::vector<double> NetGrad::flatten() const {
  std::vector<double> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.insert(out.end(), weights[l].begin(), weights[l].end());
    out.insert(out.end(), biases[l].begin(), biases[l].end());
  }
  return out;
}

std::vector<double> backward(const TinyNet& net, const TinyNet::Trace& trace,
                             std::span<const double> grad_output, NetGrad& grad) {
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  for (std::size_t l = net.layers(); l-- > 0;) {
    const auto& in = trace.activations[l];
    const auto& out = trace.activations[l + 1];
    const std::size_t rows = net.dims[l + 1], cols = net.dims[l];
    if (l + 1 < net.layers()) {
      for (std::size_t r = 0; r < rows; ++r) {
        if (out[r] <= 0.0) delta[r] = 0.0;
      }
    }
    std::vector<double> next(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      grad.biases[l][r] += delta[r];
      for (std::size_t c = 0; c < cols; ++c) {
        grad.weights[l][r * cols + c] += delta[r] * in[c];
        next[c] += net.weights[l][r * cols + c] * delta[r];
      }
    }
    delta = std::move(next);
  }
  return delta;
}

std::vector<double*> parameters(TinyNet& net) {
  std::vector<double*> out;
  for (std::size_t l = 0; l < net.layers(); ++l) {
    for (auto& v : net.weights[l]) out.push_back(&v);
    for (auto& v : net.biases[l]) out.push_back(&v);
  }
  return out;
}

void validate(const Dataset& data) {
  if (data.dim == 0) fail(ErrorCode::DimensionMismatch, "dataset has zero feature columns");
  if (data.features.size() != data.size() * data.dim ||
      data.protected_labels.size() != data.size()) {
    fail(ErrorCode::DimensionMismatch, "dataset columns have inconsistent lengths");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if ((data.labels[i] != 0 && data.labels[i] != 1) ||
        (data.protected_labels[i] != 0 && data.protected_labels[i] != 1)) {
      fail(ErrorCode::MalformedRow, fmt::format("row {}: labels must be 0 or 1", i));
    }
  }
}

AdvSetup make_setup(const ArchSpec& arch, double lambda, std::uint64_t seed) {
  if (arch.encoder_dims.size() < 2) {
    fail(ErrorCode::InvalidArgument, "encoder needs input and output sizes");
  }
  AdvSetup setup;
  setup.lambda = lambda;
  auto enc = stream_engine(seed, kEncoderStream);
  setup.encoder = TinyNet::make(arch.encoder_dims, OutputActivation::Linear, enc);
  const std::size_t h = arch.encoder_dims.back();
  auto heads = stream_engine(seed, kHeadStream);
  for (std::size_t i = 0; i < arch.task_heads; ++i) {
    setup.task_heads.push_back(
        TinyNet::make(with_output(h, arch.head_hidden, 1), OutputActivation::Logistic, heads));
  }
  auto discs = stream_engine(seed, kDiscriminatorStream);
  for (std::size_t i = 0; i < arch.discriminators; ++i) {
    setup.discriminators.push_back(TinyNet::make(with_output(h, arch.discriminator_hidden, 1),
                                                 OutputActivation::Logistic, discs));
  }
  return setup;
}

void validate(const AdvSetup& setup, std::size_t input_dim) {
  if (setup.encoder.input_dim() != input_dim) {
    fail(ErrorCode::DimensionMismatch, fmt::format("encoder takes {} inputs but data has {}",
                                                   setup.encoder.input_dim(), input_dim));
  }
  const std::size_t h = setup.encoder.output_dim();
  auto check = [&](const std::vector<TinyNet>& nets, std::string_view what) {
    for (std::size_t i = 0; i < nets.size(); ++i) {
      if (nets[i].input_dim() != h || nets[i].output_dim() != 1 ||
          nets[i].output != OutputActivation::Logistic) {
        fail(ErrorCode::DimensionMismatch,
             fmt::format("{} {} must map the {}-dim representation to one logit", what, i, h));
      }
    }
  };
  check(setup.task_heads, "task head");
  check(setup.discriminators, "discriminator");
  if (!(setup.lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be >= 0");
}

std::vector<double> SetupGrad::flatten() const {
  auto out = encoder.flatten();
  for (const auto& g : task_heads) {
    const auto f = g.flatten();
    out.insert(out.end(), f.begin(), f.end());
  }
  for (const auto& g : discriminators) {
    const auto f = g.flatten();
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

std::vector<double*> parameters(AdvSetup& setup) {
  auto out = parameters(setup.encoder);
  for (auto& net : setup.task_heads) {
    const auto p = parameters(net);
    out.insert(out.end(), p.begin(), p.end());
  }
  for (auto& net : setup.discriminators) {
    const auto p = parameters(net);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

LossAndGrad total_loss(const AdvSetup& setup, const Dataset& data,
                       std::span<const std::size_t> rows) {
  validate(setup, data.dim);
  if (rows.empty()) fail(ErrorCode::EmptyInput, "total_loss over zero rows");
  LossAndGrad out;
  out.grad.encoder = NetGrad::zeros_like(setup.encoder);
  for (const auto& net : setup.task_heads) out.grad.task_heads.push_back(NetGrad::zeros_like(net));
  for (const auto& net : setup.discriminators) {
    out.grad.discriminators.push_back(NetGrad::zeros_like(net));
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  const std::size_t h_dim = setup.encoder.output_dim();
  const bool reverse = setup.lambda != 0.0 && !setup.discriminators.empty();

  double task_sum = 0.0, adv_sum = 0.0;
  for (auto i : rows) {
    const auto enc = setup.encoder.forward(data.row(i));
    const auto& h = enc.activations.back();

    std::vector<double> dh(h_dim, 0.0);
    for (std::size_t k = 0; k < setup.task_heads.size(); ++k) {
      const auto tr = setup.task_heads[k].forward(h);
      const double logit = tr.activations.back()[0];
      task_sum += bce_with_logit(logit, data.labels[i]);
      const double up = (sigmoid(logit) - data.labels[i]) * inv_n;
      const auto g = backward(setup.task_heads[k], tr, std::span(&up, 1), out.grad.task_heads[k]);
      for (std::size_t d = 0; d < h_dim; ++d) dh[d] += g[d];
    }

    const auto j = grl_forward(h, setup.lambda);
    std::vector<double> dj(h_dim, 0.0);
    for (std::size_t k = 0; k < setup.discriminators.size(); ++k) {
      const auto tr = setup.discriminators[k].forward(j);
      const double logit = tr.activations.back()[0];
      adv_sum += bce_with_logit(logit, data.protected_labels[i]);
      const double up = (sigmoid(logit) - data.protected_labels[i]) * inv_n;
      const auto g =
          backward(setup.discriminators[k], tr, std::span(&up, 1), out.grad.discriminators[k]);
      for (std::size_t d = 0; d < h_dim; ++d) dj[d] += g[d];
    }
    if (reverse) {
      const auto reversed = grl_backward(dj, setup.lambda);
      for (std::size_t d = 0; d < h_dim; ++d) dh[d] += reversed[d];
    }
    backward(setup.encoder, enc, dh, out.grad.encoder);
  }
  out.loss.task = task_sum * inv_n;
  out.loss.adversary = adv_sum * inv_n;
  if (!std::isfinite(out.loss.total())) {
    fail(ErrorCode::NonFiniteLoss, fmt::format("loss is {} (task {}, adversary {})",
                                               out.loss.total(), out.loss.task,
                                               out.loss.adversary));
  }
  return out;
}

LossBreakdown evaluate_loss(const AdvSetup& setup, const Dataset& data,
                            std::span<const std::size_t> rows) {
  validate(setup, data.dim);
  LossBreakdown out;
  for (auto i : rows) {
    const auto h = setup.encoder.predict(data.row(i));
    for (const auto& net : setup.task_heads) out.task += bce_with_logit(net.predict(h)[0], data.labels[i]);
    for (const auto& net : setup.discriminators) {
      out.adversary += bce_with_logit(net.predict(h)[0], data.protected_labels[i]);
    }
  }
  if (!rows.empty()) {
    out.task /= static_cast<double>(rows.size());
    out.adversary /= static_cast<double>(rows.size());
  }
  return out;
}

void validate(const GrlConfig& config) {
  if (!(config.lambda >= 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (!(config.learning_rate > 0.0)) fail(ErrorCode::InvalidArgument, "learning_rate must be > 0");
  if (config.epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (config.batch_size < 1) fail(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (!(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "holdout_fraction must be in (0, 1)");
  }
  if (config.arch.encoder_dims.size() < 2 || config.arch.task_heads < 1) {
    fail(ErrorCode::InvalidArgument, "need an encoder with input and output sizes and a task head");
  }
}

GrlConfig grl_config_from_json(const nlohmann::json& doc) {
  reject_unknown_keys(doc,
                      {"lambda", "learning_rate", "epochs", "batch_size", "seed",
                       "holdout_fraction", "arch"},
                      "grl config");
  GrlConfig c;
  c.lambda = json_field(doc, "lambda", c.lambda);
  c.learning_rate = json_field(doc, "learning_rate", c.learning_rate);
  c.epochs = json_field(doc, "epochs", c.epochs);
  c.batch_size = json_field(doc, "batch_size", c.batch_size);
  c.seed = json_field(doc, "seed", c.seed);
  c.holdout_fraction = json_field(doc, "holdout_fraction", c.holdout_fraction);
  if (doc.contains("arch")) {
    const auto& a = doc.at("arch");
    reject_unknown_keys(a,
                        {"encoder_dims", "task_heads", "head_hidden", "discriminators",
                         "discriminator_hidden"},
                        "arch");
    c.arch.encoder_dims = json_field(a, "encoder_dims", c.arch.encoder_dims);
    c.arch.task_heads = json_field(a, "task_heads", c.arch.task_heads);
    c.arch.head_hidden = json_field(a, "head_hidden", c.arch.head_hidden);
    c.arch.discriminators = json_field(a, "discriminators", c.arch.discriminators);
    c.arch.discriminator_hidden = json_field(a, "discriminator_hidden", c.arch.discriminator_hidden);
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const GrlConfig& c) {
  return {{"lambda", c.lambda},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"holdout_fraction", c.holdout_fraction},
          {"arch",
           {{"encoder_dims", c.arch.encoder_dims},
            {"task_heads", c.arch.task_heads},
            {"head_hidden", c.arch.head_hidden},
            {"discriminators", c.arch.discriminators},
            {"discriminator_hidden", c.arch.discriminator_hidden}}}};
}

nlohmann::json to_json(const TrainReport& r) {
  return {{"epochs",
           {{"task_loss", r.task_loss},
            {"adversary_loss", r.adversary_loss},
            {"heldout_task_accuracy", r.heldout_task_accuracy},
            {"heldout_adversary_accuracy", r.heldout_adversary_accuracy}}},
          {"final_task_accuracy", r.final_task_accuracy},
          {"final_adversary_accuracy", r.final_adversary_accuracy},
          {"adversary_chance", r.adversary_chance},
          {"train_rows", r.train_rows.size()},
          {"heldout_rows", r.heldout_rows.size()}};
}

TrainReport train_adversarial(const Dataset& data, const GrlConfig& config) {
  validate(config);
  validate(data);
  if (config.arch.encoder_dims.front() != data.dim) {
    fail(ErrorCode::DimensionMismatch, fmt::format("encoder takes {} inputs but data has {}",
                                                   config.arch.encoder_dims.front(), data.dim));
  }
  const std::set<int> ys(data.labels.begin(), data.labels.end());
  const std::set<int> zs(data.protected_labels.begin(), data.protected_labels.end());
  if (ys.size() < 2 || zs.size() < 2) {
    fail(ErrorCode::SingleClassInput, "training data needs both label classes and both protected values");
  }

  TrainReport report;
  report.model = make_setup(config.arch, config.lambda, config.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  auto split_engine = stream_engine(config.seed, kSplitStream);
  shuffle(order, split_engine);
  const auto held = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(data.size()))));
  if (held >= data.size()) fail(ErrorCode::EmptyInput, "no rows left for training");
  report.heldout_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  report.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::ranges::sort(report.heldout_rows);
  std::ranges::sort(report.train_rows);

  std::size_t z_ones = 0;
  for (auto i : report.heldout_rows) z_ones += data.protected_labels[i];
  report.adversary_chance =
      static_cast<double>(std::max(z_ones, held - z_ones)) / static_cast<double>(held);

  auto& model = report.model;
  auto params = parameters(model);
  auto shuffle_engine = stream_engine(config.seed, kShuffleStream);
  auto batch_rows = report.train_rows;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(batch_rows, shuffle_engine);
    try {
      for (std::size_t start = 0; start < batch_rows.size(); start += config.batch_size) {
        const auto len = std::min(config.batch_size, batch_rows.size() - start);
        const auto step = total_loss(model, data, std::span(batch_rows).subspan(start, len));
        sgd_step(params, step.grad.flatten(), config.learning_rate);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteLoss) throw;
      fail(ErrorCode::Divergence, fmt::format("epoch {}: {}", epoch + 1, e.what()));
    }
    const auto loss = evaluate_loss(model, data, report.train_rows);
    if (!std::isfinite(loss.total())) {
      fail(ErrorCode::Divergence, fmt::format("epoch {}: non-finite training loss", epoch + 1));
    }
    report.task_loss.push_back(loss.task);
    report.adversary_loss.push_back(loss.adversary);
    report.heldout_task_accuracy.push_back(
        accuracy(model.task_heads.front(), &model.encoder, data, report.heldout_rows, false));
    double adv = 0.0;
    for (const auto& d : model.discriminators) {
      adv = std::max(adv, accuracy(d, &model.encoder, data, report.heldout_rows, true));
    }
    report.heldout_adversary_accuracy.push_back(adv);
    auto snapshot = NetGrad::zeros_like(model.encoder);
    snapshot.weights = model.encoder.weights;
    snapshot.biases = model.encoder.biases;
    report.encoder_trajectory.push_back(snapshot.flatten());
  }
  report.final_task_accuracy = report.heldout_task_accuracy.back();
  report.final_adversary_accuracy = report.heldout_adversary_accuracy.back();
  return report;
}

Dataset encode(const TinyNet& encoder, const Dataset& data) {
  Dataset out;
  out.dim = encoder.output_dim();
  out.labels = data.labels;
  out.protected_labels = data.protected_labels;
  out.features.reserve(data.size() * out.dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto h = encoder.predict(data.row(i));
    out.features.insert(out.features.end(), h.begin(), h.end());
  }
  return out;
}

ProbeMetrics posthoc_probe(const Dataset& data, const PosthocConfig& config) {
  validate(data);
  if (config.folds < 2) fail(ErrorCode::InvalidArgument, "posthoc probe needs at least 2 folds");
  const std::set<int> zs(data.protected_labels.begin(), data.protected_labels.end());
  if (zs.size() < 2) fail(ErrorCode::SingleClassInput, "protected label has a single class");

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto split_engine = stream_engine(config.seed, kSplitStream);
  shuffle(order, split_engine);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) fold_of[order[k]] = k % config.folds;

  std::vector<double> scores(n, 0.5);
  for (std::size_t fold = 0; fold < config.folds; ++fold) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == fold ? test : train).push_back(i);
    if (test.empty()) continue;

    // Standardize on the training folds only.
    std::vector<double> mean(data.dim, 0.0), sd(data.dim, 0.0);
    for (auto i : train) for (std::size_t d = 0; d < data.dim; ++d) mean[d] += data.row(i)[d];
    for (auto& m : mean) m /= static_cast<double>(train.size());
    for (auto i : train) {
      for (std::size_t d = 0; d < data.dim; ++d) sd[d] += std::pow(data.row(i)[d] - mean[d], 2);
    }
    for (auto& s : sd) s = std::sqrt(s / static_cast<double>(train.size()));
    Dataset z;
    z.dim = data.dim;
    z.labels = data.protected_labels;
    z.protected_labels = data.protected_labels;
    z.features.resize(data.features.size());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < data.dim; ++d) {
        z.features[i * data.dim + d] = sd[d] > 0 ? (data.row(i)[d] - mean[d]) / sd[d] : 0.0;
      }
    }

    auto init = stream_engine(config.seed, 100 + fold);
    AdvSetup setup;
    setup.lambda = 0.0;
    // Identity-sized linear encoder kept fixed; only the head learns.
    setup.encoder.dims = {data.dim, data.dim};
    setup.encoder.weights = {std::vector<double>(data.dim * data.dim, 0.0)};
    for (std::size_t d = 0; d < data.dim; ++d) setup.encoder.weights[0][d * data.dim + d] = 1.0;
    setup.encoder.biases = {std::vector<double>(data.dim, 0.0)};
    setup.task_heads.push_back(TinyNet::make(with_output(data.dim, config.hidden, 1),
                                             OutputActivation::Logistic, init));
    auto head_params = parameters(setup.task_heads.front());
    auto shuffle_engine = stream_engine(config.seed, 200 + fold);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      shuffle(train, shuffle_engine);
      for (std::size_t start = 0; start < train.size(); start += config.batch_size) {
        const auto len = std::min(config.batch_size, train.size() - start);
        const auto step = total_loss(setup, z, std::span(train).subspan(start, len));
        sgd_step(head_params, step.grad.task_heads.front().flatten(), config.learning_rate);
      }
    }
    for (auto i : test) scores[i] = sigmoid(setup.task_heads.front().predict(z.row(i))[0]);
  }

  ProbeMetrics m;
  m.auroc = compute_auroc(scores, data.protected_labels);
  m.auprc = compute_auprc(scores, data.protected_labels);
  const auto counts = confusion(scores, data.protected_labels, 0.5);
  m.precision = counts.tp + counts.fp > 0
                    ? static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp)
                    : 0.0;
  m.recall = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
  constexpr double kClip = 1e-15;
  double ll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::clamp(scores[i], kClip, 1.0 - kClip);
    ll -= data.protected_labels[i] ? std::log(p) : std::log1p(-p);
  }
  m.log_loss = ll / static_cast<double>(n);
  return m;
}

std::string render_probe_metrics(const ProbeMetrics& m) {
  return fmt::format(
      "| Metric | Value |\n|---|---|\n| AUROC | {:.3f} |\n| Precision | {:.3f} |\n"
      "| Recall | {:.3f} |\n| AUPRC | {:.3f} |\n| Log Loss | {:.3f} |\n",
      m.auroc, m.precision, m.recall, m.auprc, m.log_loss);
}

nlohmann::json to_json(const ProbeMetrics& m) {
  return nlohmann::json::array({{{"metric", "AUROC"}, {"value", m.auroc}},
                                {{"metric", "Precision"}, {"value", m.precision}},
                                {{"metric", "Recall"}, {"value", m.recall}},
                                {{"metric", "AUPRC"}, {"value", m.auprc}},
                                {{"metric", "Log Loss"}, {"value", m.log_loss}}});
}

void validate(const SyntheticDataSpec& spec) {
  if (spec.samples < 1) fail(ErrorCode::InvalidArgument, "samples must be >= 1");
  if (spec.task_dims + spec.protected_dims < 1) {
    fail(ErrorCode::InvalidArgument, "need at least one feature column");
  }
  if (!(spec.task_shift > 0.0) || !(spec.protected_shift > 0.0)) {
    fail(ErrorCode::InvalidArgument, "shifts must be > 0");
  }
  if (!(spec.noise >= 0.0)) fail(ErrorCode::InvalidArgument, "noise must be >= 0");
  if (!(spec.correlation >= -1.0 && spec.correlation <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "correlation must be in [-1, 1]");
  }
}

SyntheticDataSpec synthetic_spec_from_json(const nlohmann::json& doc) {
  reject_unknown_keys(doc,
                      {"samples", "task_dims", "protected_dims", "task_shift", "protected_shift",
                       "noise", "correlation", "seed"},
                      "synthetic data");
  SyntheticDataSpec s;
  s.samples = json_field(doc, "samples", s.samples);
  s.task_dims = json_field(doc, "task_dims", s.task_dims);
  s.protected_dims = json_field(doc, "protected_dims", s.protected_dims);
  s.task_shift = json_field(doc, "task_shift", s.task_shift);
  s.protected_shift = json_field(doc, "protected_shift", s.protected_shift);
  s.noise = json_field(doc, "noise", s.noise);
  s.correlation = json_field(doc, "correlation", s.correlation);
  s.seed = json_field(doc, "seed", s.seed);
  validate(s);
  return s;
}

Dataset gen_synthetic(const SyntheticDataSpec& spec) {
  validate(spec);
  auto engine = stream_engine(spec.seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset out;
  out.dim = spec.task_dims + spec.protected_dims;
  out.features.reserve(spec.samples * out.dim);
  const double agree = (1.0 + spec.correlation) / 2.0;
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const int y = uniform_unit(engine) < 0.5 ? 1 : 0;
    const int z = uniform_unit(engine) < agree ? y : 1 - y;
    out.labels.push_back(y);
    out.protected_labels.push_back(z);
    for (std::size_t d = 0; d < spec.task_dims; ++d) {
      out.features.push_back((2 * y - 1) * spec.task_shift + spec.noise * gauss(engine));
    }
    for (std::size_t d = 0; d < spec.protected_dims; ++d) {
      out.features.push_back((2 * z - 1) * spec.protected_shift + spec.noise * gauss(engine));
    }
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data, std::size_t task_dims) {
  csv::Row header{"label", "protected"};
  for (std::size_t d = 0; d < data.dim; ++d) {
    if (task_dims == 0) header.push_back(fmt::format("x{}", d));
    else if (d < task_dims) header.push_back(fmt::format("t{}", d));
    else header.push_back(fmt::format("p{}", d - task_dims));
  }
  csv::write_row(out, header);
  for (std::size_t i = 0; i < data.size(); ++i) {
    csv::Row row{std::to_string(data.labels[i]), std::to_string(data.protected_labels[i])};
    for (double v : data.row(i)) row.push_back(fmt::format("{}", v));
    csv::write_row(out, row);
  }
}

}  // namespace fairaudit
