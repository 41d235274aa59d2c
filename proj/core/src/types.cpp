#include "neurocrf/types.hpp"

#include <algorithm>
#include <cmath>

namespace neurocrf {

LabelAlphabet::LabelAlphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("label alphabet is empty");
  lookup_.reserve(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw std::invalid_argument("empty label name");
    if (labels_[i].find('\n') != std::string::npos) {
      throw std::invalid_argument("label name contains a newline");
    }
    auto [_, inserted] = lookup_.emplace(labels_[i], static_cast<LabelIndex>(i));
    if (!inserted) throw std::invalid_argument("duplicate label name: " + labels_[i]);
  }
}

const std::string& LabelAlphabet::name(LabelIndex index) const {
  if (!valid_label(index)) throw std::out_of_range("label index out of range");
  return labels_[static_cast<std::size_t>(index)];
}

LabelIndex LabelAlphabet::index_of(std::string_view name) const {
  auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) throw std::out_of_range("unknown label: " + std::string(name));
  return it->second;
}

bool LabelAlphabet::contains(std::string_view name) const {
  return lookup_.find(std::string(name)) != lookup_.end();
}

Observation::Observation(std::vector<double> features) : features_(std::move(features)) {
  for (double v : features_) {
    if (v != 0.0 && v != 1.0) throw std::invalid_argument("observation features must be 0 or 1");
  }
}

Observation Observation::from_bits(std::span<const std::uint8_t> bits) {
  std::vector<double> values(bits.size());
  std::transform(bits.begin(), bits.end(), values.begin(),
                 [](std::uint8_t b) { return static_cast<double>(b); });
  return Observation(std::move(values));
}

void Dataset::validate() const {
  for (const auto& seq : sequences) {
    if (seq.observations.empty()) {
      throw std::invalid_argument("sequence '" + seq.sequence_id + "' is empty");
    }
    if (seq.observations.size() != seq.labels.size()) {
      throw std::invalid_argument("sequence '" + seq.sequence_id +
                                  "' has mismatched observation/label lengths");
    }
    for (const auto& obs : seq.observations) {
      if (obs.dim() != feature_dim) {
        throw DimensionMismatch("sequence '" + seq.sequence_id + "' has observation dimension " +
                                std::to_string(obs.dim()) + ", expected " +
                                std::to_string(feature_dim));
      }
    }
    for (LabelIndex label : seq.labels) {
      if (!alphabet.valid_label(label)) {
        throw std::invalid_argument("sequence '" + seq.sequence_id + "' has an invalid label index");
      }
    }
  }
}

std::size_t Dataset::token_count() const noexcept {
  std::size_t total = 0;
  for (const auto& seq : sequences) total += seq.length();
  return total;
}

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::CrfMlp:
      return "crf-mlp";
    case Architecture::CrfRnn:
      return "crf-rnn";
    case Architecture::CrfPerceptron:
      return "crf-prcpt";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "crf-mlp") return Architecture::CrfMlp;
  if (text == "crf-rnn") return Architecture::CrfRnn;
  if (text == "crf-prcpt") return Architecture::CrfPerceptron;
  throw std::invalid_argument("unknown architecture: " + std::string(text));
}

void HyperParams::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(regularization >= 0.0) || !std::isfinite(regularization)) {
    throw std::invalid_argument("regularization must be non-negative");
  }
  if (max_sgd_examples < 1) throw std::invalid_argument("max_sgd_examples must be at least 1");
  if (!(init_stddev > 0.0) || !std::isfinite(init_stddev)) {
    throw std::invalid_argument("init_stddev must be positive");
  }
  if (minibatch < 1) throw std::invalid_argument("minibatch must be at least 1");
}

void ModelDescriptor::validate() const {
  hyper.validate();
  if (feature_dim < 1) throw std::invalid_argument("feature_dim must be at least 1");
  if (num_labels < 1) throw std::invalid_argument("num_labels must be at least 1");
  if (architecture != Architecture::CrfPerceptron && hidden_size < 1) {
    throw std::invalid_argument("hidden_size must be positive for MLP-based architectures");
  }
}

std::size_t hidden_size(std::size_t n_inputs, std::size_t n_outputs) {
  return std::max<std::size_t>(1, (n_inputs + n_outputs) / 4);
}

std::vector<double> one_hot(LabelIndex index, std::size_t size) {
  if (index < 0 || static_cast<std::size_t>(index) > size) {
    throw std::invalid_argument("one_hot index out of range");
  }
  std::vector<double> v(size + 1, 0.0);
  v[static_cast<std::size_t>(index)] = 1.0;
  return v;
}

ModelDescriptor make_descriptor(Architecture arch, std::size_t feature_dim, std::size_t num_labels,
                                const HyperParams& hyper) {
  ModelDescriptor d;
  d.architecture = arch;
  d.feature_dim = feature_dim;
  d.num_labels = num_labels;
  d.hidden_size = arch == Architecture::CrfPerceptron ? 0 : hidden_size(feature_dim, num_labels);
  d.hyper = hyper;
  return d;
}

}  // namespace neurocrf
