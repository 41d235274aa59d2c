#include "neurocrf/neural.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace neurocrf {

namespace {

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionMismatch(std::string(what) + ": got dimension " + std::to_string(got) +
                            ", expected " + std::to_string(want));
  }
}

std::vector<double> concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Gradient step with weight elimination on one layer. `presynaptic` are the
// layer inputs, `delta` the backpropagated error at the layer outputs.
void apply_weight_elimination_step(DenseLayer& layer, std::span<const double> presynaptic,
                                   std::span<const double> delta, double eta, double lambda) {
  for (std::size_t j = 0; j < layer.n_out; ++j) {
    double* row = layer.weights.data() + j * layer.n_in;
    for (std::size_t i = 0; i < layer.n_in; ++i) {
      const double xi = presynaptic[i];
      if (xi == 0.0) continue;
      row[i] -= eta * xi * (delta[j] + weight_elimination_penalty(row[i], lambda));
    }
    layer.bias[j] -= eta * (delta[j] + weight_elimination_penalty(layer.bias[j], lambda));
  }
}

}  // namespace

DenseLayer::DenseLayer(std::size_t n_out_, std::size_t n_in_)
    : n_in(n_in_), n_out(n_out_), weights(n_out_ * n_in_, 0.0), bias(n_out_, 0.0) {}

void DenseLayer::forward(std::span<const double> in, std::span<double> out) const {
  check_dim(in.size(), n_in, "dense layer input");
  check_dim(out.size(), n_out, "dense layer output");
  std::copy(bias.begin(), bias.end(), out.begin());
  for (std::size_t j = 0; j < n_out; ++j) {
    const double* row = weights.data() + j * n_in;
    double acc = 0.0;
    for (std::size_t i = 0; i < n_in; ++i) {
      if (in[i] != 0.0) acc += row[i] * in[i];
    }
    out[j] += acc;
  }
}

bool DenseLayer::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(weights.begin(), weights.end(), finite) &&
         std::all_of(bias.begin(), bias.end(), finite);
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double weight_elimination_penalty(double w, double lambda) {
  const double denom = 1.0 + w * w;
  return 2.0 * lambda * w / (denom * denom);
}

void init_normal(DenseLayer& layer, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& w : layer.weights) w = dist(rng);
  for (double& b : layer.bias) b = dist(rng);
}

Mlp::Mlp(std::size_t n_in, std::size_t n_hidden, std::size_t n_out)
    : hidden(n_hidden, n_in), output(n_out, n_hidden) {}

MlpActivations mlp_forward(const Mlp& net, std::span<const double> x) {
  check_dim(x.size(), net.n_inputs(), "mlp input");
  MlpActivations act;
  act.hidden.resize(net.n_hidden());
  net.hidden.forward(x, act.hidden);
  for (double& h : act.hidden) h = sigmoid(h);
  act.scores.resize(net.n_outputs());
  net.output.forward(act.hidden, act.scores);
  return act;
}

void mlp_update(Mlp& net, std::span<const double> x, std::span<const double> target, double eta,
                double lambda) {
  check_dim(target.size(), net.n_outputs(), "mlp target");
  const MlpActivations act = mlp_forward(net, x);

  std::vector<double> delta_out(net.n_outputs());
  for (std::size_t k = 0; k < delta_out.size(); ++k) delta_out[k] = act.scores[k] - target[k];

  // Hidden deltas use the output weights before they are modified.
  std::vector<double> delta_hidden(net.n_hidden(), 0.0);
  for (std::size_t k = 0; k < net.n_outputs(); ++k) {
    for (std::size_t j = 0; j < net.n_hidden(); ++j) {
      delta_hidden[j] += net.output.weight(k, j) * delta_out[k];
    }
  }
  for (std::size_t j = 0; j < delta_hidden.size(); ++j) {
    const double h = act.hidden[j];
    delta_hidden[j] *= h * (1.0 - h);
  }

  apply_weight_elimination_step(net.output, act.hidden, delta_out, eta, lambda);
  apply_weight_elimination_step(net.hidden, x, delta_hidden, eta, lambda);
}

ElmanNet::ElmanNet(std::size_t feature_dim_, std::size_t n_hidden, std::size_t n_out)
    : net(feature_dim_ + n_hidden, n_hidden, n_out), feature_dim(feature_dim_) {}

ElmanStep elman_forward(const ElmanNet& net, std::span<const double> x,
                        std::span<const double> context) {
  check_dim(x.size(), net.feature_dim, "elman input");
  check_dim(context.size(), net.hidden_width(), "elman context");
  MlpActivations act = mlp_forward(net.net, concat(x, context));
  return ElmanStep{std::move(act.scores), std::move(act.hidden)};
}

void elman_update(ElmanNet& net, std::span<const double> x, std::span<const double> context,
                  std::span<const double> target, double eta, double lambda) {
  check_dim(x.size(), net.feature_dim, "elman input");
  check_dim(context.size(), net.hidden_width(), "elman context");
  mlp_update(net.net, concat(x, context), target, eta, lambda);
}

PerceptronNet::PerceptronNet(std::size_t feature_dim_, std::size_t num_labels_)
    : output(num_labels_, feature_dim_ + num_labels_ + 1),
      feature_dim(feature_dim_),
      num_labels(num_labels_) {}

std::vector<double> perceptron_input(std::span<const double> x, LabelIndex prev,
                                     std::size_t num_labels) {
  return concat(x, one_hot(prev, num_labels));
}

std::vector<double> perceptron_scores(const PerceptronNet& net, std::span<const double> x,
                                      LabelIndex prev) {
  check_dim(x.size(), net.feature_dim, "perceptron input");
  std::vector<double> scores(net.num_labels);
  net.output.forward(perceptron_input(x, prev, net.num_labels), scores);
  return scores;
}

void perceptron_accumulate_and_apply(PerceptronNet& net, std::span<const PerceptronError> batch,
                                     double eta) {
  if (batch.empty()) return;
  DenseLayer& layer = net.output;
  std::vector<double> weight_delta(layer.weights.size(), 0.0);
  std::vector<double> bias_delta(layer.bias.size(), 0.0);
  for (const auto& entry : batch) {
    check_dim(entry.input.size(), layer.n_in, "perceptron error input");
    check_dim(entry.predicted.size(), layer.n_out, "perceptron predicted one-hot");
    check_dim(entry.gold.size(), layer.n_out, "perceptron gold one-hot");
    for (std::size_t k = 0; k < layer.n_out; ++k) {
      const double err = entry.gold[k] - entry.predicted[k];
      if (err == 0.0) continue;
      for (std::size_t i = 0; i < layer.n_in; ++i) {
        weight_delta[k * layer.n_in + i] += err * entry.input[i];
      }
      bias_delta[k] += err;
    }
  }
  const double scale = eta / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < weight_delta.size(); ++i) layer.weights[i] += scale * weight_delta[i];
  for (std::size_t k = 0; k < bias_delta.size(); ++k) layer.bias[k] += scale * bias_delta[k];
}

}  // namespace neurocrf
