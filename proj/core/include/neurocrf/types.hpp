#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace neurocrf {

/// Raised when an input vector or model does not match the expected shape.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by text readers; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using LabelIndex = std::int32_t;

/// Ordered set of label names. Index `size()` is reserved for the START tag,
/// which is only ever used as a predecessor, never decoded.
class LabelAlphabet {
 public:
  LabelAlphabet() = default;
  explicit LabelAlphabet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  LabelIndex start_index() const noexcept { return static_cast<LabelIndex>(labels_.size()); }

  const std::string& name(LabelIndex index) const;
  LabelIndex index_of(std::string_view name) const;
  bool contains(std::string_view name) const;
  bool valid_label(LabelIndex index) const noexcept {
    return index >= 0 && index < static_cast<LabelIndex>(labels_.size());
  }
  /// Valid as a predecessor: any label or START.
  bool valid_predecessor(LabelIndex index) const noexcept {
    return index >= 0 && index <= start_index();
  }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  bool operator==(const LabelAlphabet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelIndex> lookup_;
};

/// A binary indicator vector. Stored as doubles so it feeds the networks directly.
class Observation {
 public:
  Observation() = default;
  explicit Observation(std::vector<double> features);
  static Observation from_bits(std::span<const std::uint8_t> bits);

  std::size_t dim() const noexcept { return features_.size(); }
  std::span<const double> values() const noexcept { return features_; }
  double operator[](std::size_t i) const { return features_[i]; }
  bool operator==(const Observation&) const = default;

 private:
  std::vector<double> features_;
};

struct LabeledSequence {
  std::vector<Observation> observations;
  std::vector<LabelIndex> labels;
  std::string sequence_id;

  std::size_t length() const noexcept { return observations.size(); }
};

struct Dataset {
  LabelAlphabet alphabet;
  std::vector<LabeledSequence> sequences;
  std::size_t feature_dim = 0;

  /// Throws std::invalid_argument on the first violated invariant.
  void validate() const;
  std::size_t token_count() const noexcept;
};

enum class Architecture { CrfMlp, CrfRnn, CrfPerceptron };

std::string_view to_string(Architecture arch);
/// Accepts the CLI spellings: crf-mlp, crf-rnn, crf-prcpt.
Architecture parse_architecture(std::string_view text);

struct HyperParams {
  double learning_rate = 0.5;
  double regularization = 0.001;
  std::size_t max_sgd_examples = 1000;
  double init_stddev = 0.00015;
  std::size_t minibatch = 5;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct ModelDescriptor {
  Architecture architecture = Architecture::CrfMlp;
  std::size_t feature_dim = 0;
  std::size_t num_labels = 0;
  std::size_t hidden_size = 0;
  HyperParams hyper;

  void validate() const;
};

/// Hidden layer width rule: floor((n_inputs + n_outputs) / 4), at least 1.
std::size_t hidden_size(std::size_t n_inputs, std::size_t n_outputs);

/// One-hot of length size+1; index == size is the START slot.
std::vector<double> one_hot(LabelIndex index, std::size_t size);

/// Descriptor with the default hidden width for `arch`.
ModelDescriptor make_descriptor(Architecture arch, std::size_t feature_dim, std::size_t num_labels,
                                const HyperParams& hyper = {});

}  // namespace neurocrf
