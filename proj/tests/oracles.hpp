#pragma once
// Reference computations written independently of the library kernels.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "neurocrf/model.hpp"
#include "neurocrf/neural.hpp"

namespace oracle {

using neurocrf::DenseLayer;
using neurocrf::LabelIndex;

inline std::vector<double> affine(const DenseLayer& layer, const std::vector<double>& in) {
  std::vector<double> out(layer.n_out);
  for (std::size_t o = 0; o < layer.n_out; ++o) {
    long double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.n_in; ++i) acc += layer.weights[o * layer.n_in + i] * in[i];
    out[o] = static_cast<double>(acc);
  }
  return out;
}

inline std::vector<double> logistic(std::vector<double> v) {
  for (double& z : v) z = 1.0 / (1.0 + std::exp(-z));
  return v;
}

inline std::vector<double> mlp_scores(const neurocrf::Mlp& net, const std::vector<double>& x) {
  return affine(net.output, logistic(affine(net.hidden, x)));
}

inline std::vector<double> mlp_hidden(const neurocrf::Mlp& net, const std::vector<double>& x) {
  return logistic(affine(net.hidden, x));
}

inline std::vector<double> indicator(std::size_t index, std::size_t size) {
  std::vector<double> v(size, 0.0);
  v[index] = 1.0;
  return v;
}

inline std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::vector<double> values(const neurocrf::Observation& x) {
  return {x.values().begin(), x.values().end()};
}

/// Score of one label path computed straight from the network weights.
inline double path_score(const neurocrf::NeuroCrfModel& model,
                         const std::vector<neurocrf::Observation>& xs,
                         const std::vector<LabelIndex>& path) {
  const std::size_t k = model.num_labels();
  double total = 0.0;
  std::vector<double> context;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const std::size_t prev = t == 0 ? k : static_cast<std::size_t>(path[t - 1]);
    const std::size_t y = static_cast<std::size_t>(path[t]);
    const std::vector<double> x = values(xs[t]);
    if (const auto* m = std::get_if<neurocrf::CrfMlpNets>(&model.networks())) {
      total += mlp_scores(m->observation, x)[y] + mlp_scores(m->edge, indicator(prev, k + 1))[y];
    } else if (const auto* r = std::get_if<neurocrf::CrfRnnNets>(&model.networks())) {
      if (t == 0) context.assign(r->elman.hidden_width(), 0.0);
      const auto input = concat(x, context);
      total += mlp_scores(r->elman.net, input)[y];
      context = mlp_hidden(r->elman.net, input);
    } else {
      const auto& p = std::get<neurocrf::CrfPerceptronNets>(model.networks()).perceptron;
      total += affine(p.output, concat(x, indicator(prev, k + 1)))[y];
    }
  }
  return total;
}

struct BruteForce {
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<LabelIndex> best_path;
};

/// Enumerates every |Y|^n label path.
inline BruteForce brute_force(const neurocrf::NeuroCrfModel& model,
                              const std::vector<neurocrf::Observation>& xs) {
  const std::size_t k = model.num_labels();
  const std::size_t n = xs.size();
  std::size_t total = 1;
  for (std::size_t t = 0; t < n; ++t) total *= k;
  BruteForce out;
  std::vector<LabelIndex> path(n);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t t = 0; t < n; ++t) {
      path[t] = static_cast<LabelIndex>(c % k);
      c /= k;
    }
    const double s = path_score(model, xs, path);
    if (s > out.best_score) {
      out.best_score = s;
      out.best_path = path;
    }
  }
  return out;
}

inline double square_loss(const std::vector<double>& scores, const std::vector<double>& target) {
  double l = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) l += 0.5 * (scores[k] - target[k]) * (scores[k] - target[k]);
  return l;
}

/// Central differences of the square loss over every weight and bias of `net`,
/// hidden layer first, each layer as weights then biases.
inline std::vector<double> numeric_gradient(neurocrf::Mlp net, const std::vector<double>& x,
                                            const std::vector<double>& target, double eps) {
  std::vector<double> grad;
  auto loss = [&] { return square_loss(mlp_scores(net, x), target); };
  for (DenseLayer* layer : {&net.hidden, &net.output}) {
    for (std::vector<double>* params : {&layer->weights, &layer->bias}) {
      for (double& w : *params) {
        const double saved = w;
        w = saved + eps;
        const double up = loss();
        w = saved - eps;
        const double down = loss();
        w = saved;
        grad.push_back((up - down) / (2.0 * eps));
      }
    }
  }
  return grad;
}

/// Parameters flattened in the numeric_gradient order.
inline std::vector<double> flatten(const neurocrf::Mlp& net) {
  std::vector<double> out;
  for (const DenseLayer* layer : {&net.hidden, &net.output}) {
    out.insert(out.end(), layer->weights.begin(), layer->weights.end());
    out.insert(out.end(), layer->bias.begin(), layer->bias.end());
  }
  return out;
}

/// ||a - b|| / max(||a||, ||b||); zero when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

inline void randomize(DenseLayer& layer, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sd);
  for (double& w : layer.weights) w = normal(rng);
  for (double& b : layer.bias) b = normal(rng);
}

inline void randomize(neurocrf::Mlp& net, double sd, std::mt19937_64& rng) {
  randomize(net.hidden, sd, rng);
  randomize(net.output, sd, rng);
}

inline neurocrf::NeuroCrfModel random_model(neurocrf::Architecture arch, std::size_t dim,
                                            std::size_t labels, double sd,
                                            std::mt19937_64& rng) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < labels; ++i) names.push_back("L" + std::to_string(i));
  auto model = neurocrf::NeuroCrfModel::initialize(
      neurocrf::make_descriptor(arch, dim, labels), neurocrf::LabelAlphabet(names), rng());
  std::visit(
      [&](auto& nets) {
        using T = std::decay_t<decltype(nets)>;
        if constexpr (std::is_same_v<T, neurocrf::CrfMlpNets>) {
          randomize(nets.observation, sd, rng);
          randomize(nets.edge, sd, rng);
        } else if constexpr (std::is_same_v<T, neurocrf::CrfRnnNets>) {
          randomize(nets.elman.net, sd, rng);
        } else {
          randomize(nets.perceptron.output, sd, rng);
        }
      },
      model.networks());
  return model;
}

inline std::vector<neurocrf::Observation> random_observations(std::size_t n, std::size_t dim,
                                                               std::mt19937_64& rng) {
  std::bernoulli_distribution bit(0.5);
  std::vector<neurocrf::Observation> xs;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> v(dim);
    for (double& f : v) f = bit(rng) ? 1.0 : 0.0;
    xs.emplace_back(std::move(v));
  }
  return xs;
}

/// Closed-form simple regression of y on x from raw sums.
struct Ols {
  double slope = 0.0;
  double intercept = 0.0;
  double r_square = 0.0;
};

inline Ols ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const long double cov = n * sxy - sx * sy;
  const long double vx = n * sxx - sx * sx;
  const long double vy = n * syy - sy * sy;
  Ols out;
  out.slope = static_cast<double>(cov / vx);
  out.intercept = static_cast<double>((sy - out.slope * sx) / n);
  out.r_square = static_cast<double>(cov * cov / (vx * vy));
  return out;
}

}  // namespace oracle
