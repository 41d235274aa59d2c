#include "neurocrf/model.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "neurocrf/numeric_text.hpp"

namespace neurocrf {

namespace {

constexpr std::string_view kMagic = "neurocrf-model";
constexpr int kFormatVersion = 1;

std::size_t edge_hidden_size(std::size_t num_labels) {
  return hidden_size(num_labels + 1, num_labels);
}

void write_layer(std::ostream& out, std::string_view name, const DenseLayer& layer) {
  out << "layer " << name << ' ' << layer.n_out << ' ' << layer.n_in << '\n';
  for (std::size_t j = 0; j < layer.n_out; ++j) {
    out << 'w';
    for (std::size_t i = 0; i < layer.n_in; ++i) out << ' ' << format_double(layer.weight(j, i));
    out << '\n';
  }
  out << 'b';
  for (double b : layer.bias) out << ' ' << format_double(b);
  out << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> tokens(std::string_view expected_key) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::vector<std::string> toks;
      for (std::string t; ss >> t;) toks.push_back(std::move(t));
      if (toks.empty()) continue;
      if (toks.front() != expected_key) {
        throw ParseError("expected '" + std::string(expected_key) + "', found '" + toks.front() +
                             "'",
                         line_no_);
      }
      return toks;
    }
    throw ParseError("unexpected end of model file, expected '" + std::string(expected_key) + "'",
                     line_no_);
  }

  /// Remainder of the next line after "key ", verbatim.
  std::string rest_of(std::string_view key) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError("unexpected end of model file", line_no_);
    ++line_no_;
    const std::string prefix = std::string(key) + " ";
    if (line.rfind(prefix, 0) != 0) {
      throw ParseError("expected '" + std::string(key) + "' line", line_no_);
    }
    return line.substr(prefix.size());
  }

  std::size_t size_value(std::string_view key) {
    auto toks = tokens(key);
    if (toks.size() != 2) throw ParseError("malformed '" + std::string(key) + "' line", line_no_);
    return to_size(toks[1]);
  }

  std::size_t to_size(const std::string& s) const {
    try {
      return static_cast<std::size_t>(parse_unsigned(s));
    } catch (const std::invalid_argument&) {
      throw ParseError("bad integer '" + s + "'", line_no_);
    }
  }

  double to_double(const std::string& s) const {
    try {
      return parse_double(s);
    } catch (const std::invalid_argument&) {
      throw ParseError("bad number '" + s + "'", line_no_);
    }
  }

  std::size_t line() const noexcept { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

DenseLayer read_layer(LineReader& reader, std::string_view name, std::size_t n_out,
                      std::size_t n_in) {
  auto header = reader.tokens("layer");
  if (header.size() != 4 || header[1] != name) {
    throw ParseError("expected layer '" + std::string(name) + "'", reader.line());
  }
  if (reader.to_size(header[2]) != n_out || reader.to_size(header[3]) != n_in) {
    throw ParseError("layer '" + std::string(name) + "' has unexpected shape", reader.line());
  }
  DenseLayer layer(n_out, n_in);
  for (std::size_t j = 0; j < n_out; ++j) {
    auto row = reader.tokens("w");
    if (row.size() != n_in + 1) throw ParseError("weight row has wrong length", reader.line());
    for (std::size_t i = 0; i < n_in; ++i) layer.weight(j, i) = reader.to_double(row[i + 1]);
  }
  auto bias = reader.tokens("b");
  if (bias.size() != n_out + 1) throw ParseError("bias row has wrong length", reader.line());
  for (std::size_t j = 0; j < n_out; ++j) layer.bias[j] = reader.to_double(bias[j + 1]);
  return layer;
}

}  // namespace

Networks init_weights(const ModelDescriptor& descriptor, std::uint64_t seed) {
  descriptor.validate();
  std::mt19937_64 rng(seed);
  const double sd = descriptor.hyper.init_stddev;
  const std::size_t d = descriptor.feature_dim;
  const std::size_t y = descriptor.num_labels;
  switch (descriptor.architecture) {
    case Architecture::CrfMlp: {
      CrfMlpNets nets{Mlp(d, descriptor.hidden_size, y), Mlp(y + 1, edge_hidden_size(y), y)};
      init_normal(nets.observation.hidden, sd, rng);
      init_normal(nets.observation.output, sd, rng);
      init_normal(nets.edge.hidden, sd, rng);
      init_normal(nets.edge.output, sd, rng);
      return nets;
    }
    case Architecture::CrfRnn: {
      CrfRnnNets nets{ElmanNet(d, descriptor.hidden_size, y)};
      init_normal(nets.elman.net.hidden, sd, rng);
      init_normal(nets.elman.net.output, sd, rng);
      return nets;
    }
    case Architecture::CrfPerceptron: {
      CrfPerceptronNets nets{PerceptronNet(d, y)};
      init_normal(nets.perceptron.output, sd, rng);
      return nets;
    }
  }
  throw std::invalid_argument("unknown architecture");
}

NeuroCrfModel::NeuroCrfModel(ModelDescriptor descriptor, LabelAlphabet alphabet, Networks networks)
    : descriptor_(std::move(descriptor)),
      alphabet_(std::move(alphabet)),
      networks_(std::move(networks)) {
  descriptor_.validate();
  if (alphabet_.size() != descriptor_.num_labels) {
    throw std::invalid_argument("alphabet size does not match descriptor num_labels");
  }
  const auto expected_index = [&] {
    switch (descriptor_.architecture) {
      case Architecture::CrfMlp:
        return std::size_t{0};
      case Architecture::CrfRnn:
        return std::size_t{1};
      case Architecture::CrfPerceptron:
        return std::size_t{2};
    }
    return std::size_t{3};
  }();
  if (networks_.index() != expected_index) {
    throw std::invalid_argument("networks do not match descriptor architecture");
  }
}

NeuroCrfModel NeuroCrfModel::initialize(const ModelDescriptor& descriptor, LabelAlphabet alphabet,
                                        std::uint64_t seed) {
  return NeuroCrfModel(descriptor, std::move(alphabet), init_weights(descriptor, seed));
}

bool NeuroCrfModel::all_finite() const {
  return std::visit(
      [](const auto& nets) {
        using T = std::decay_t<decltype(nets)>;
        if constexpr (std::is_same_v<T, CrfMlpNets>) {
          return nets.observation.hidden.all_finite() && nets.observation.output.all_finite() &&
                 nets.edge.hidden.all_finite() && nets.edge.output.all_finite();
        } else if constexpr (std::is_same_v<T, CrfRnnNets>) {
          return nets.elman.net.hidden.all_finite() && nets.elman.net.output.all_finite();
        } else {
          return nets.perceptron.output.all_finite();
        }
      },
      networks_);
}

bool NeuroCrfModel::operator==(const NeuroCrfModel& other) const {
  const auto& a = descriptor_;
  const auto& b = other.descriptor_;
  return a.architecture == b.architecture && a.feature_dim == b.feature_dim &&
         a.num_labels == b.num_labels && a.hidden_size == b.hidden_size &&
         alphabet_ == other.alphabet_ && networks_ == other.networks_;
}

void save_model(const NeuroCrfModel& model, std::ostream& out) {
  const auto& d = model.descriptor();
  const auto& h = d.hyper;
  out << kMagic << " v" << kFormatVersion << '\n';
  out << "architecture " << to_string(d.architecture) << '\n';
  out << "feature_dim " << d.feature_dim << '\n';
  out << "num_labels " << d.num_labels << '\n';
  out << "hidden_size " << d.hidden_size << '\n';
  out << "hyper " << format_double(h.learning_rate) << ' ' << format_double(h.regularization)
      << ' ' << h.max_sgd_examples << ' ' << format_double(h.init_stddev) << ' ' << h.minibatch
      << ' ' << h.rng_seed << '\n';
  for (const auto& label : model.alphabet().labels()) out << "label " << label << '\n';
  std::visit(
      [&](const auto& nets) {
        using T = std::decay_t<decltype(nets)>;
        if constexpr (std::is_same_v<T, CrfMlpNets>) {
          write_layer(out, "observation.hidden", nets.observation.hidden);
          write_layer(out, "observation.output", nets.observation.output);
          write_layer(out, "edge.hidden", nets.edge.hidden);
          write_layer(out, "edge.output", nets.edge.output);
        } else if constexpr (std::is_same_v<T, CrfRnnNets>) {
          write_layer(out, "elman.hidden", nets.elman.net.hidden);
          write_layer(out, "elman.output", nets.elman.net.output);
        } else {
          write_layer(out, "perceptron.output", nets.perceptron.output);
        }
      },
      model.networks());
  out << "end\n";
}

NeuroCrfModel load_model(std::istream& in) {
  LineReader reader(in);
  auto magic = reader.tokens(kMagic);
  if (magic.size() != 2 || magic[1] != "v" + std::to_string(kFormatVersion)) {
    throw ParseError("unsupported model format version", reader.line());
  }
  ModelDescriptor d;
  auto arch = reader.tokens("architecture");
  if (arch.size() != 2) throw ParseError("malformed architecture line", reader.line());
  try {
    d.architecture = parse_architecture(arch[1]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), reader.line());
  }
  d.feature_dim = reader.size_value("feature_dim");
  d.num_labels = reader.size_value("num_labels");
  d.hidden_size = reader.size_value("hidden_size");
  auto hyper = reader.tokens("hyper");
  if (hyper.size() != 7) throw ParseError("malformed hyper line", reader.line());
  d.hyper.learning_rate = reader.to_double(hyper[1]);
  d.hyper.regularization = reader.to_double(hyper[2]);
  d.hyper.max_sgd_examples = reader.to_size(hyper[3]);
  d.hyper.init_stddev = reader.to_double(hyper[4]);
  d.hyper.minibatch = reader.to_size(hyper[5]);
  d.hyper.rng_seed = reader.to_size(hyper[6]);
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), reader.line());
  }

  std::vector<std::string> labels;
  for (std::size_t i = 0; i < d.num_labels; ++i) labels.push_back(reader.rest_of("label"));

  const std::size_t dim = d.feature_dim;
  const std::size_t y = d.num_labels;
  Networks nets;
  switch (d.architecture) {
    case Architecture::CrfMlp: {
      CrfMlpNets m;
      m.observation.hidden = read_layer(reader, "observation.hidden", d.hidden_size, dim);
      m.observation.output = read_layer(reader, "observation.output", y, d.hidden_size);
      const std::size_t eh = edge_hidden_size(y);
      m.edge.hidden = read_layer(reader, "edge.hidden", eh, y + 1);
      m.edge.output = read_layer(reader, "edge.output", y, eh);
      nets = std::move(m);
      break;
    }
    case Architecture::CrfRnn: {
      CrfRnnNets r;
      r.elman.feature_dim = dim;
      r.elman.net.hidden = read_layer(reader, "elman.hidden", d.hidden_size, dim + d.hidden_size);
      r.elman.net.output = read_layer(reader, "elman.output", y, d.hidden_size);
      nets = std::move(r);
      break;
    }
    case Architecture::CrfPerceptron: {
      CrfPerceptronNets p;
      p.perceptron.feature_dim = dim;
      p.perceptron.num_labels = y;
      p.perceptron.output = read_layer(reader, "perceptron.output", y, dim + y + 1);
      nets = std::move(p);
      break;
    }
  }
  reader.tokens("end");
  return NeuroCrfModel(d, LabelAlphabet(std::move(labels)), std::move(nets));
}

void save_model_file(const NeuroCrfModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  save_model(model, out);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

NeuroCrfModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return load_model(in);
}

}  // namespace neurocrf
