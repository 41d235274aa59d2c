#include "neurocrf_cli/sequence_file.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "neurocrf/numeric_text.hpp"

namespace neurocrf::cli {

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

Observation parse_bits(const std::vector<std::string>& tokens, std::size_t first,
                       std::size_t line_no) {
  std::vector<double> values;
  values.reserve(tokens.size() - first);
  for (std::size_t i = first; i < tokens.size(); ++i) {
    if (tokens[i] == "0") {
      values.push_back(0.0);
    } else if (tokens[i] == "1") {
      values.push_back(1.0);
    } else {
      throw ParseError("feature value '" + tokens[i] + "' is not 0 or 1", line_no);
    }
  }
  if (values.empty()) throw ParseError("observation has no feature values", line_no);
  return Observation(std::move(values));
}

template <typename OnLine>
void scan_blocks(std::istream& in, OnLine on_line, auto on_block_end) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = tokens_of(line);
    if (!tokens.empty() && tokens.front().starts_with('#')) continue;
    if (tokens.empty()) {
      on_block_end();
      continue;
    }
    on_line(tokens, line_no);
  }
  on_block_end();
}

}  // namespace

std::vector<std::vector<Observation>> read_observation_sequences(std::istream& in) {
  std::vector<std::vector<Observation>> out;
  std::vector<Observation> current;
  std::size_t dim = 0;
  scan_blocks(
      in,
      [&](const std::vector<std::string>& tokens, std::size_t line_no) {
        auto obs = parse_bits(tokens, 0, line_no);
        if (dim == 0) dim = obs.dim();
        if (obs.dim() != dim) {
          throw ParseError("expected " + std::to_string(dim) + " feature values, found " +
                               std::to_string(obs.dim()),
                           line_no);
        }
        current.push_back(std::move(obs));
      },
      [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
      });
  if (out.empty()) throw ParseError("no sequences found", 0);
  return out;
}

LabeledSequenceFile read_labeled_sequences(std::istream& in) {
  LabeledSequenceFile out;
  std::vector<std::string> labels;
  std::vector<Observation> current;
  std::size_t dim = 0;
  scan_blocks(
      in,
      [&](const std::vector<std::string>& tokens, std::size_t line_no) {
        if (tokens.size() < 2) throw ParseError("expected a label followed by 0/1 values", line_no);
        auto obs = parse_bits(tokens, 1, line_no);
        if (dim == 0) dim = obs.dim();
        if (obs.dim() != dim) {
          throw ParseError("expected " + std::to_string(dim) + " feature values, found " +
                               std::to_string(obs.dim()),
                           line_no);
        }
        labels.push_back(tokens.front());
        current.push_back(std::move(obs));
      },
      [&] {
        if (!current.empty()) {
          out.labels.push_back(std::move(labels));
          out.observations.push_back(std::move(current));
        }
        labels.clear();
        current.clear();
      });
  if (out.observations.empty()) throw ParseError("no sequences found", 0);
  return out;
}

Dataset to_dataset(const LabeledSequenceFile& file) {
  std::set<std::string> names;
  for (const auto& seq : file.labels) names.insert(seq.begin(), seq.end());
  Dataset data;
  data.alphabet = LabelAlphabet(std::vector<std::string>(names.begin(), names.end()));
  data.feature_dim = file.observations.front().front().dim();
  for (std::size_t s = 0; s < file.observations.size(); ++s) {
    LabeledSequence seq;
    seq.observations = file.observations[s];
    for (const auto& name : file.labels[s]) seq.labels.push_back(data.alphabet.index_of(name));
    seq.sequence_id = "seq" + std::to_string(s);
    data.sequences.push_back(std::move(seq));
  }
  data.validate();
  return data;
}

void write_observation_sequences(std::ostream& out,
                                 const std::vector<std::vector<Observation>>& sequences) {
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (s > 0) out << '\n';
    for (const auto& obs : sequences[s]) {
      for (std::size_t i = 0; i < obs.dim(); ++i) {
        if (i > 0) out << ' ';
        out << (obs[i] != 0.0 ? '1' : '0');
      }
      out << '\n';
    }
  }
}

ScoreSets read_score_file(std::istream& in) {
  ScoreSets out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    auto tokens = tokens_of(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 2) throw ParseError("expected two fields: score and class", line_no);
    double score = 0.0;
    try {
      score = parse_double(tokens[0]);
    } catch (const std::invalid_argument&) {
      if (line_no == 1) continue;  // header
      throw ParseError("bad score '" + tokens[0] + "'", line_no);
    }
    if (tokens[1] == "1") {
      out.self.push_back(score);
    } else if (tokens[1] == "0") {
      out.nonself.push_back(score);
    } else {
      throw ParseError("class must be 1 or 0, found '" + tokens[1] + "'", line_no);
    }
  }
  if (out.self.empty() || out.nonself.empty()) {
    throw ParseError("score file needs both self (1) and non-self (0) rows", 0);
  }
  return out;
}

}  // namespace neurocrf::cli
