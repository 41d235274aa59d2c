#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "neurocrf/types.hpp"

namespace neurocrf {

/// Fully connected layer: out = W * in + b, with W stored row-major [n_out x n_in].
struct DenseLayer {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  DenseLayer() = default;
  DenseLayer(std::size_t n_out, std::size_t n_in);

  double& weight(std::size_t out, std::size_t in) { return weights[out * n_in + in]; }
  double weight(std::size_t out, std::size_t in) const { return weights[out * n_in + in]; }

  void forward(std::span<const double> in, std::span<double> out) const;
  bool all_finite() const;
  bool operator==(const DenseLayer&) const = default;
};

double sigmoid(double z);

/// Weight-elimination gradient term 2*lambda*w / (1 + w^2)^2.
double weight_elimination_penalty(double w, double lambda);

/// Sample every weight and bias i.i.d. from N(0, stddev).
void init_normal(DenseLayer& layer, double stddev, std::mt19937_64& rng);

/// Single hidden layer perceptron: sigmoid hidden units, linear (energy) outputs.
struct Mlp {
  DenseLayer hidden;
  DenseLayer output;

  Mlp() = default;
  Mlp(std::size_t n_in, std::size_t n_hidden, std::size_t n_out);

  std::size_t n_inputs() const noexcept { return hidden.n_in; }
  std::size_t n_hidden() const noexcept { return hidden.n_out; }
  std::size_t n_outputs() const noexcept { return output.n_out; }
  bool operator==(const Mlp&) const = default;
};

struct MlpActivations {
  std::vector<double> hidden;
  std::vector<double> scores;
};

MlpActivations mlp_forward(const Mlp& net, std::span<const double> x);

/// One backpropagation step on the square loss 1/2 * sum (score_k - target_k)^2
/// with weight elimination:
///   w_ij <- w_ij - eta * x_i * (delta_j + 2*lambda*w_ij / (1 + w_ij^2)^2)
/// where x_i is the presynaptic activation (1 for biases).
void mlp_update(Mlp& net, std::span<const double> x, std::span<const double> target, double eta,
                double lambda);

/// Elman network. The hidden layer reads [x ; context] where context holds the
/// previous step's hidden activations. Context is owned by the caller.
struct ElmanNet {
  Mlp net;
  std::size_t feature_dim = 0;

  ElmanNet() = default;
  ElmanNet(std::size_t feature_dim, std::size_t n_hidden, std::size_t n_out);

  std::size_t hidden_width() const noexcept { return net.n_hidden(); }
  std::vector<double> initial_context() const { return std::vector<double>(hidden_width(), 0.0); }
  bool operator==(const ElmanNet&) const = default;
};

struct ElmanStep {
  std::vector<double> scores;
  std::vector<double> new_context;
};

ElmanStep elman_forward(const ElmanNet& net, std::span<const double> x,
                        std::span<const double> context);

/// Single-step backprop with the context treated as a constant input (no BPTT).
void elman_update(ElmanNet& net, std::span<const double> x, std::span<const double> context,
                  std::span<const double> target, double eta, double lambda);

/// Single-layer perceptron scoring [x ; one_hot(previous label)].
struct PerceptronNet {
  DenseLayer output;
  std::size_t feature_dim = 0;
  std::size_t num_labels = 0;

  PerceptronNet() = default;
  PerceptronNet(std::size_t feature_dim, std::size_t num_labels);
  bool operator==(const PerceptronNet&) const = default;
};

std::vector<double> perceptron_input(std::span<const double> x, LabelIndex prev,
                                     std::size_t num_labels);

std::vector<double> perceptron_scores(const PerceptronNet& net, std::span<const double> x,
                                      LabelIndex prev);

/// One mispredicted position: the network input and the two label one-hots
/// (length |Y|, no START slot).
struct PerceptronError {
  std::vector<double> input;
  std::vector<double> predicted;
  std::vector<double> gold;
};

/// Applies eta * mean_b((gold_b - predicted_b) outer input_b) once. Empty batch is a no-op.
void perceptron_accumulate_and_apply(PerceptronNet& net, std::span<const PerceptronError> batch,
                                     double eta);

}  // namespace neurocrf
