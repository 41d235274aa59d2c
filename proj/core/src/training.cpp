#include "neurocrf/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace neurocrf {

namespace {

std::vector<double> label_target(LabelIndex label, std::size_t num_labels) {
  std::vector<double> v(num_labels, 0.0);
  v[static_cast<std::size_t>(label)] = 1.0;
  return v;
}

std::uint64_t shuffle_seed(std::uint64_t seed) {
  // splitmix64 finaliser so the shuffle stream differs from the init stream
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t count_errors(std::span<const LabelIndex> decoded, std::span<const LabelIndex> gold) {
  std::size_t errors = 0;
  for (std::size_t t = 0; t < gold.size(); ++t) errors += decoded[t] != gold[t] ? 1 : 0;
  return errors;
}

bool decodes_perfectly(const NeuroCrfModel& model, const Dataset& dataset) {
  for (const auto& seq : dataset.sequences) {
    const auto result = viterbi(model, seq.observations);
    if (count_errors(result.labels, seq.labels) != 0) return false;
  }
  return true;
}

class Trainer {
 public:
  Trainer(NeuroCrfModel& model, const TrainConfig& config, const TrainHooks& hooks)
      : model_(model), config_(config), hooks_(hooks), num_labels_(model.num_labels()) {}

  /// Decodes and updates on one sequence; returns its token error count.
  std::size_t present(const LabeledSequence& seq) {
    const DecodeResult decoded = viterbi(model_, seq.observations);
    const std::size_t errors = count_errors(decoded.labels, seq.labels);
    if (errors == 0) return 0;
    switch (model_.architecture()) {
      case Architecture::CrfMlp:
        update_mlp(seq, decoded.labels);
        break;
      case Architecture::CrfRnn:
        update_rnn(seq, decoded.labels);
        break;
      case Architecture::CrfPerceptron:
        update_perceptron(seq, decoded.labels);
        break;
    }
    return errors;
  }

  std::size_t updates() const noexcept { return updates_; }

 private:
  void update_mlp(const LabeledSequence& seq, std::span<const LabelIndex> decoded) {
    auto& nets = std::get<CrfMlpNets>(model_.networks());
    const double eta = config_.hyper.learning_rate;
    const double lambda = config_.hyper.regularization;
    for (std::size_t t = 0; t < seq.length(); ++t) {
      if (decoded[t] == seq.labels[t]) continue;
      const auto target = label_target(seq.labels[t], num_labels_);
      mlp_update(nets.observation, seq.observations[t].values(), target, eta, lambda);
      const LabelIndex prev = t == 0 ? static_cast<LabelIndex>(num_labels_) : seq.labels[t - 1];
      mlp_update(nets.edge, one_hot(prev, num_labels_), target, eta, lambda);
      ++updates_;
    }
  }

  void update_rnn(const LabeledSequence& seq, std::span<const LabelIndex> decoded) {
    auto& elman = std::get<CrfRnnNets>(model_.networks()).elman;
    // Contexts come from the observation prefix under the weights used to decode.
    std::vector<std::vector<double>> contexts;
    contexts.reserve(seq.length());
    std::vector<double> context = elman.initial_context();
    for (const auto& x : seq.observations) {
      contexts.push_back(context);
      context = elman_forward(elman, x.values(), context).new_context;
    }
    for (std::size_t t = 0; t < seq.length(); ++t) {
      if (decoded[t] == seq.labels[t]) continue;
      elman_update(elman, seq.observations[t].values(), contexts[t],
                   label_target(seq.labels[t], num_labels_), config_.hyper.learning_rate,
                   config_.hyper.regularization);
      ++updates_;
    }
  }

  void update_perceptron(const LabeledSequence& seq, std::span<const LabelIndex> decoded) {
    auto& net = std::get<CrfPerceptronNets>(model_.networks()).perceptron;
    for (std::size_t t = 0; t < seq.length(); ++t) {
      if (decoded[t] == seq.labels[t]) continue;
      const LabelIndex prev = t == 0 ? static_cast<LabelIndex>(num_labels_) : decoded[t - 1];
      pending_.push_back(PerceptronError{perceptron_input(seq.observations[t].values(), prev,
                                                          num_labels_),
                                         label_target(decoded[t], num_labels_),
                                         label_target(seq.labels[t], num_labels_)});
      if (pending_.size() == config_.hyper.minibatch) {
        if (hooks_.perceptron_batch) hooks_.perceptron_batch(pending_);
        perceptron_accumulate_and_apply(net, pending_, config_.hyper.learning_rate);
        pending_.clear();
        ++updates_;
      }
    }
  }

  NeuroCrfModel& model_;
  const TrainConfig& config_;
  const TrainHooks& hooks_;
  std::size_t num_labels_;
  std::size_t updates_ = 0;
  std::vector<PerceptronError> pending_;
};

}  // namespace

std::string to_json_line(const TraceRecord& record) {
  nlohmann::ordered_json j;
  j["sequence"] = record.sequence_counter;
  j["token_errors"] = record.token_errors;
  j["converged"] = record.converged;
  return j.dump();
}

TrainResult train(const Dataset& dataset, const TrainConfig& config, std::uint64_t seed,
                  const TrainHooks& hooks) {
  if (dataset.sequences.empty()) throw std::invalid_argument("cannot train on an empty dataset");
  dataset.validate();
  config.hyper.validate();

  HyperParams hyper = config.hyper;
  hyper.rng_seed = seed;
  const ModelDescriptor descriptor =
      make_descriptor(config.architecture, dataset.feature_dim, dataset.alphabet.size(), hyper);
  NeuroCrfModel model = NeuroCrfModel::initialize(descriptor, dataset.alphabet, seed);

  TrainConfig effective = config;
  effective.hyper = hyper;
  Trainer trainer(model, effective, hooks);

  std::mt19937_64 rng(shuffle_seed(seed));
  std::vector<std::size_t> order(dataset.sequences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  const std::size_t max_sequences = hyper.max_sgd_examples;
  while (report.sequences_consumed < max_sequences && !report.converged) {
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cycle_errors = 0;
    std::size_t cycle_length = 0;
    for (std::size_t idx : order) {
      if (report.sequences_consumed >= max_sequences) break;
      const std::size_t errors = trainer.present(dataset.sequences[idx]);
      cycle_errors += errors;
      ++cycle_length;
      ++report.sequences_consumed;
      if (config.convergence_check_period > 0 &&
          report.sequences_consumed % config.convergence_check_period == 0 &&
          decodes_perfectly(model, dataset)) {
        report.converged = true;
      }
      if (hooks.trace) hooks.trace({report.sequences_consumed, errors, report.converged});
      if (report.converged) break;
    }
    // A full cycle without errors applied no updates, so every sequence still decodes correctly.
    if (cycle_length == order.size() && cycle_errors == 0) report.converged = true;
  }

  report.updates_applied = trainer.updates();
  report.final_train_token_error = token_error_rate(model, dataset);
  if (!model.all_finite()) throw std::runtime_error("training produced non-finite weights");
  return {std::move(model), report};
}

SequenceScore score_sequence(const NeuroCrfModel& model, std::span<const Observation> observations) {
  DecodeResult r = viterbi(model, observations);
  return {r.score, r.probability, std::move(r.labels)};
}

double token_error_rate(const NeuroCrfModel& model, const Dataset& dataset) {
  std::size_t errors = 0;
  std::size_t total = 0;
  for (const auto& seq : dataset.sequences) {
    const auto result = viterbi(model, seq.observations);
    errors += count_errors(result.labels, seq.labels);
    total += seq.length();
  }
  return total == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(total);
}

}  // namespace neurocrf
