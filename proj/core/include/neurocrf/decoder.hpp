#pragma once

#include <span>
#include <vector>

#include "neurocrf/model.hpp"
#include "neurocrf/types.hpp"

namespace neurocrf {

/// Best way to reach label `to` at one step: predecessor and log-space score.
struct AlphaEntry {
  LabelIndex to = 0;
  LabelIndex from = 0;
  double score = 0.0;
};

using AlphaColumn = std::vector<AlphaEntry>;

/// Viterbi trellis, one column per time step. Column 0 predecessors are START.
struct AlphaTable {
  std::vector<AlphaColumn> steps;
};

struct DecodeResult {
  std::vector<LabelIndex> labels;
  double score = 0.0;
  double probability = 0.0;
};

/// Architecture state carried along the sequence. Only CRF-RNN uses it (the
/// Elman context); it depends on the observations alone, never on labels.
struct DecoderState {
  std::vector<double> context;
};

/// Splits every step score into an observation part and a transition part:
///   step(prev, y) = observation(x_t, state)[y] + transition(prev, y).
/// Transition is the edge MLP for CRF-MLP, the one-hot block of the perceptron
/// weights for CRF-PRCPT and zero for CRF-RNN. Holds a reference to the model.
class FactorScorer {
 public:
  explicit FactorScorer(const NeuroCrfModel& model);

  DecoderState initial_state() const;

  /// Observation scores at this step; writes the state after consuming x into `next`.
  std::vector<double> observation_scores(std::span<const double> x, const DecoderState& state,
                                         DecoderState& next) const;

  double transition(LabelIndex prev, LabelIndex to) const {
    return transitions_[static_cast<std::size_t>(prev) * num_labels_ +
                        static_cast<std::size_t>(to)];
  }

  std::size_t num_labels() const noexcept { return num_labels_; }
  LabelIndex start_index() const noexcept { return static_cast<LabelIndex>(num_labels_); }

 private:
  const NeuroCrfModel* model_;
  std::size_t num_labels_;
  std::vector<double> transitions_;  // (|Y|+1) x |Y|, row = predecessor
};

/// Initial architecture state for a fresh sequence.
DecoderState initial_state(const NeuroCrfModel& model);

/// Additive score of every candidate label at one step given the previous label.
std::vector<double> step_scores(const NeuroCrfModel& model, const Observation& x_t,
                                LabelIndex prev_label, const DecoderState& state);

/// State after consuming x_t.
DecoderState advance_state(const NeuroCrfModel& model, const Observation& x_t,
                           const DecoderState& state);

/// First trellis column: every entry comes from START.
AlphaColumn initialize_alpha(const NeuroCrfModel& model, const Observation& x0,
                             const DecoderState& state);

/// One Viterbi recursion. Ties go to the lowest predecessor index.
AlphaColumn forward_step(const NeuroCrfModel& model, const Observation& x_t,
                         std::span<const AlphaEntry> alpha_prev, const DecoderState& state);

/// Follows the from-pointers back from `last` at the final step.
std::vector<LabelIndex> backtrack(const AlphaTable& table, LabelIndex last);

/// exp(score) / sum_y exp(alpha_y) over the final column, max-shifted.
double sequence_probability(std::span<const AlphaEntry> alpha_final, double score);

DecodeResult viterbi(const NeuroCrfModel& model, std::span<const Observation> observations);

/// Same as above, also returning the full trellis.
DecodeResult viterbi(const NeuroCrfModel& model, std::span<const Observation> observations,
                     AlphaTable& table);

}  // namespace neurocrf
