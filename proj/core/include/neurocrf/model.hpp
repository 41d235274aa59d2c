#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <variant>

#include "neurocrf/neural.hpp"
#include "neurocrf/types.hpp"

namespace neurocrf {

/// Observation MLP plus edge MLP whose input is one_hot(previous label or START).
struct CrfMlpNets {
  Mlp observation;
  Mlp edge;
  bool operator==(const CrfMlpNets&) const = default;
};

struct CrfRnnNets {
  ElmanNet elman;
  bool operator==(const CrfRnnNets&) const = default;
};

struct CrfPerceptronNets {
  PerceptronNet perceptron;
  bool operator==(const CrfPerceptronNets&) const = default;
};

using Networks = std::variant<CrfMlpNets, CrfRnnNets, CrfPerceptronNets>;

/// Allocates the networks for `descriptor` with every parameter drawn from
/// N(0, init_stddev). Same seed, same bits.
Networks init_weights(const ModelDescriptor& descriptor, std::uint64_t seed);

/// One sequence class ("self"): architecture, label alphabet and weights.
class NeuroCrfModel {
 public:
  NeuroCrfModel(ModelDescriptor descriptor, LabelAlphabet alphabet, Networks networks);

  static NeuroCrfModel initialize(const ModelDescriptor& descriptor, LabelAlphabet alphabet,
                                  std::uint64_t seed);

  const ModelDescriptor& descriptor() const noexcept { return descriptor_; }
  const LabelAlphabet& alphabet() const noexcept { return alphabet_; }
  Architecture architecture() const noexcept { return descriptor_.architecture; }
  std::size_t num_labels() const noexcept { return descriptor_.num_labels; }
  std::size_t feature_dim() const noexcept { return descriptor_.feature_dim; }

  const Networks& networks() const noexcept { return networks_; }
  Networks& networks() noexcept { return networks_; }

  bool all_finite() const;
  bool operator==(const NeuroCrfModel& other) const;

 private:
  ModelDescriptor descriptor_;
  LabelAlphabet alphabet_;
  Networks networks_;
};

/// Versioned text format; doubles are written in shortest round-trip form.
void save_model(const NeuroCrfModel& model, std::ostream& out);
NeuroCrfModel load_model(std::istream& in);

void save_model_file(const NeuroCrfModel& model, const std::filesystem::path& path);
NeuroCrfModel load_model_file(const std::filesystem::path& path);

}  // namespace neurocrf
