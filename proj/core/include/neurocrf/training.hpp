#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "neurocrf/decoder.hpp"
#include "neurocrf/model.hpp"
#include "neurocrf/types.hpp"

namespace neurocrf {

struct TrainConfig {
  HyperParams hyper;
  Architecture architecture = Architecture::CrfMlp;
  /// 0: check for zero training error once per full cycle through the shuffled
  /// training set, using the errors seen during that cycle. N > 0: additionally
  /// run an independent decode pass over the whole set every N sequences.
  std::size_t convergence_check_period = 0;
};

struct TrainReport {
  std::size_t sequences_consumed = 0;
  bool converged = false;
  double final_train_token_error = 0.0;
  std::size_t updates_applied = 0;
};

/// One line of the optional training trace.
struct TraceRecord {
  std::size_t sequence_counter = 0;
  std::size_t token_errors = 0;
  bool converged = false;
};

std::string to_json_line(const TraceRecord& record);

struct TrainHooks {
  std::function<void(const TraceRecord&)> trace;
  /// Called with each perceptron minibatch just before it is applied.
  std::function<void(std::span<const PerceptronError>)> perceptron_batch;
};

struct TrainResult {
  NeuroCrfModel model;
  TrainReport report;
};

/// Error-driven SGD: decode each presented sequence with Viterbi and update the
/// networks only at positions where the decoded label differs from the gold one.
TrainResult train(const Dataset& dataset, const TrainConfig& config, std::uint64_t seed,
                  const TrainHooks& hooks = {});

/// Raw (pre-softmax) Viterbi score used for calibration.
struct SequenceScore {
  double score = 0.0;
  double probability = 0.0;
  std::vector<LabelIndex> labels;
};

SequenceScore score_sequence(const NeuroCrfModel& model, std::span<const Observation> observations);

/// Fraction of wrongly decoded tokens over the dataset.
double token_error_rate(const NeuroCrfModel& model, const Dataset& dataset);

}  // namespace neurocrf
