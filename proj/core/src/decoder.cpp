#include "neurocrf/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace neurocrf {

namespace {

void check_observation(const NeuroCrfModel& model, const Observation& x) {
  if (x.dim() != model.feature_dim()) {
    throw DimensionMismatch("observation has dimension " + std::to_string(x.dim()) +
                            ", model expects " + std::to_string(model.feature_dim()));
  }
}

AlphaColumn first_column(const FactorScorer& scorer, std::span<const double> obs) {
  AlphaColumn column(scorer.num_labels());
  const LabelIndex start = scorer.start_index();
  for (std::size_t y = 0; y < column.size(); ++y) {
    const auto to = static_cast<LabelIndex>(y);
    column[y] = AlphaEntry{to, start, obs[y] + scorer.transition(start, to)};
  }
  return column;
}

AlphaColumn recurse(const FactorScorer& scorer, std::span<const double> obs,
                    std::span<const AlphaEntry> alpha_prev) {
  AlphaColumn column(scorer.num_labels());
  for (std::size_t y = 0; y < column.size(); ++y) {
    const auto to = static_cast<LabelIndex>(y);
    LabelIndex best_from = 0;
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (const AlphaEntry& prev : alpha_prev) {
      const double candidate = prev.score + scorer.transition(prev.to, to) + obs[y];
      if (!found || candidate > best || (candidate == best && prev.to < best_from)) {
        best = candidate;
        best_from = prev.to;
        found = true;
      }
    }
    column[y] = AlphaEntry{to, best_from, best};
  }
  return column;
}

LabelIndex argmax_label(std::span<const AlphaEntry> column) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < column.size(); ++i) {
    if (column[i].score > column[best].score) best = i;
  }
  return column[best].to;
}

}  // namespace

FactorScorer::FactorScorer(const NeuroCrfModel& model)
    : model_(&model), num_labels_(model.num_labels()) {
  transitions_.assign((num_labels_ + 1) * num_labels_, 0.0);
  const auto& nets = model.networks();
  if (const auto* mlp = std::get_if<CrfMlpNets>(&nets)) {
    for (std::size_t prev = 0; prev <= num_labels_; ++prev) {
      const auto edge = mlp_forward(mlp->edge, one_hot(static_cast<LabelIndex>(prev), num_labels_));
      std::copy(edge.scores.begin(), edge.scores.end(),
                transitions_.begin() + static_cast<std::ptrdiff_t>(prev * num_labels_));
    }
  } else if (const auto* prcpt = std::get_if<CrfPerceptronNets>(&nets)) {
    const DenseLayer& layer = prcpt->perceptron.output;
    const std::size_t d = prcpt->perceptron.feature_dim;
    for (std::size_t prev = 0; prev <= num_labels_; ++prev) {
      for (std::size_t to = 0; to < num_labels_; ++to) {
        transitions_[prev * num_labels_ + to] = layer.weight(to, d + prev);
      }
    }
  }
}

DecoderState FactorScorer::initial_state() const {
  if (const auto* rnn = std::get_if<CrfRnnNets>(&model_->networks())) {
    return DecoderState{rnn->elman.initial_context()};
  }
  return {};
}

std::vector<double> FactorScorer::observation_scores(std::span<const double> x,
                                                     const DecoderState& state,
                                                     DecoderState& next) const {
  const auto& nets = model_->networks();
  if (const auto* mlp = std::get_if<CrfMlpNets>(&nets)) {
    next = state;
    return mlp_forward(mlp->observation, x).scores;
  }
  if (const auto* rnn = std::get_if<CrfRnnNets>(&nets)) {
    ElmanStep step = elman_forward(rnn->elman, x, state.context);
    next.context = std::move(step.new_context);
    return std::move(step.scores);
  }
  const auto& net = std::get<CrfPerceptronNets>(nets).perceptron;
  if (x.size() != net.feature_dim) throw DimensionMismatch("perceptron input dimension mismatch");
  next = state;
  std::vector<double> scores(net.output.bias);
  for (std::size_t to = 0; to < net.num_labels; ++to) {
    double acc = 0.0;
    for (std::size_t i = 0; i < net.feature_dim; ++i) {
      if (x[i] != 0.0) acc += net.output.weight(to, i) * x[i];
    }
    scores[to] += acc;
  }
  return scores;
}

DecoderState initial_state(const NeuroCrfModel& model) {
  return FactorScorer(model).initial_state();
}

std::vector<double> step_scores(const NeuroCrfModel& model, const Observation& x_t,
                                LabelIndex prev_label, const DecoderState& state) {
  check_observation(model, x_t);
  if (!model.alphabet().valid_predecessor(prev_label)) {
    throw std::invalid_argument("previous label out of range");
  }
  const FactorScorer scorer(model);
  DecoderState next;
  std::vector<double> scores = scorer.observation_scores(x_t.values(), state, next);
  for (std::size_t y = 0; y < scores.size(); ++y) {
    scores[y] += scorer.transition(prev_label, static_cast<LabelIndex>(y));
  }
  return scores;
}

DecoderState advance_state(const NeuroCrfModel& model, const Observation& x_t,
                           const DecoderState& state) {
  check_observation(model, x_t);
  DecoderState next;
  FactorScorer(model).observation_scores(x_t.values(), state, next);
  return next;
}

AlphaColumn initialize_alpha(const NeuroCrfModel& model, const Observation& x0,
                             const DecoderState& state) {
  check_observation(model, x0);
  const FactorScorer scorer(model);
  DecoderState next;
  return first_column(scorer, scorer.observation_scores(x0.values(), state, next));
}

AlphaColumn forward_step(const NeuroCrfModel& model, const Observation& x_t,
                         std::span<const AlphaEntry> alpha_prev, const DecoderState& state) {
  check_observation(model, x_t);
  if (alpha_prev.empty()) throw std::invalid_argument("empty previous alpha column");
  const FactorScorer scorer(model);
  DecoderState next;
  return recurse(scorer, scorer.observation_scores(x_t.values(), state, next), alpha_prev);
}

std::vector<LabelIndex> backtrack(const AlphaTable& table, LabelIndex last) {
  std::vector<LabelIndex> labels(table.steps.size());
  LabelIndex current = last;
  for (std::size_t t = table.steps.size(); t-- > 0;) {
    labels[t] = current;
    current = table.steps[t][static_cast<std::size_t>(current)].from;
  }
  return labels;
}

double sequence_probability(std::span<const AlphaEntry> alpha_final, double score) {
  if (alpha_final.empty()) throw std::invalid_argument("empty alpha column");
  double m = alpha_final.front().score;
  for (const auto& e : alpha_final) m = std::max(m, e.score);
  double denom = 0.0;
  for (const auto& e : alpha_final) denom += std::exp(e.score - m);
  return std::exp(score - m) / denom;
}

DecodeResult viterbi(const NeuroCrfModel& model, std::span<const Observation> observations) {
  AlphaTable table;
  return viterbi(model, observations, table);
}

DecodeResult viterbi(const NeuroCrfModel& model, std::span<const Observation> observations,
                     AlphaTable& table) {
  if (observations.empty()) throw std::invalid_argument("cannot decode an empty sequence");
  for (const auto& x : observations) check_observation(model, x);

  const FactorScorer scorer(model);
  DecoderState state = scorer.initial_state();
  DecoderState next;
  table.steps.clear();
  table.steps.reserve(observations.size());

  table.steps.push_back(
      first_column(scorer, scorer.observation_scores(observations[0].values(), state, next)));
  std::swap(state, next);
  for (std::size_t t = 1; t < observations.size(); ++t) {
    const auto obs = scorer.observation_scores(observations[t].values(), state, next);
    table.steps.push_back(recurse(scorer, obs, table.steps.back()));
    std::swap(state, next);
  }

  DecodeResult result;
  const AlphaColumn& final_column = table.steps.back();
  const LabelIndex last = argmax_label(final_column);
  result.labels = backtrack(table, last);
  result.score = final_column[static_cast<std::size_t>(last)].score;
  result.probability = sequence_probability(final_column, result.score);
  return result;
}

}  // namespace neurocrf
