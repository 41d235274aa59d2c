#include "neurocrf/session_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "neurocrf/numeric_text.hpp"
#include "neurocrf/ocr_data.hpp"

namespace neurocrf {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      if (!current.empty() || was_quoted) throw ParseError("unexpected quote inside field", line_no);
      in_quotes = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
      was_quoted = false;
    } else if (c == '\r' && i + 1 == line.size()) {
      break;
    } else {
      if (was_quoted) throw ParseError("text after closing quote", line_no);
      current += c;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(current));
  return fields;
}

std::vector<SessionEvent> read_event_log(std::istream& in) {
  std::vector<SessionEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line_no == 1 && line.rfind("user,", 0) == 0) continue;
    auto fields = split_csv_line(line, line_no);
    if (fields.size() != 4) {
      throw ParseError("expected 4 fields (user,timestamp,label,text), found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    SessionEvent e;
    e.user = std::move(fields[0]);
    try {
      e.timestamp = parse_integer(fields[1]);
    } catch (const std::invalid_argument&) {
      throw ParseError("bad timestamp '" + fields[1] + "'", line_no);
    }
    if (e.timestamp < 0) throw ParseError("negative timestamp", line_no);
    if (e.user.empty()) throw ParseError("empty user", line_no);
    if (fields[2].empty()) throw ParseError("empty label", line_no);
    e.label = std::move(fields[2]);
    e.text = std::move(fields[3]);
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<SessionEvent> load_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open event log '" + path.string() + "'");
  return read_event_log(in);
}

namespace {

std::string quote_csv(const std::string& field) {
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_event_log(std::ostream& out, std::span<const SessionEvent> events) {
  out << "user,timestamp,label,text\n";
  for (const auto& e : events) {
    out << e.user << ',' << e.timestamp << ',' << e.label << ',' << quote_csv(e.text) << '\n';
  }
}

std::map<std::string, std::vector<SessionEvent>> group_by_user(
    std::span<const SessionEvent> events) {
  std::map<std::string, std::vector<SessionEvent>> users;
  for (const auto& e : events) users[e.user].push_back(e);
  for (auto& [_, list] : users) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  }
  return users;
}

std::vector<Session> segment_sessions(std::vector<SessionEvent> events, std::int64_t gap_seconds) {
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  std::vector<Session> sessions;
  for (auto& e : events) {
    if (sessions.empty() || e.timestamp - sessions.back().events.back().timestamp > gap_seconds) {
      sessions.push_back(Session{e.user, {}});
    }
    sessions.back().events.push_back(std::move(e));
  }
  return sessions;
}

std::vector<EventSequence> sessions_to_sequences(std::span<const Session> sessions,
                                                 std::size_t min_len, std::size_t max_len) {
  if (min_len > max_len) throw std::invalid_argument("min_len exceeds max_len");
  std::vector<EventSequence> out;
  for (const auto& s : sessions) {
    if (s.events.size() < min_len) continue;
    const std::size_t keep = std::min(max_len, s.events.size());
    out.emplace_back(s.events.begin(), s.events.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  return out;
}

std::vector<std::string> extract_ngrams(std::string_view text, std::size_t n_min,
                                        std::size_t n_max) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));

  std::vector<std::string> grams;
  for (std::size_t n = std::max<std::size_t>(1, n_min); n <= n_max; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (std::size_t k = 1; k < n; ++k) g += ' ' + tokens[i + k];
      grams.push_back(std::move(g));
    }
  }
  return grams;
}

NgramVocabulary::NgramVocabulary(std::map<std::string, std::vector<std::string>> per_label,
                                 std::size_t n_min, std::size_t n_max)
    : per_label_(std::move(per_label)), n_min_(n_min), n_max_(n_max) {
  for (const auto& [_, grams] : per_label_) {
    for (const auto& g : grams) {
      if (index_.emplace(g, ordered_.size()).second) ordered_.push_back(g);
    }
  }
}

long NgramVocabulary::index_of(const std::string& ngram) const {
  auto it = index_.find(ngram);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

void NgramVocabulary::write(std::ostream& out) const {
  out << "# ngram vocabulary n=" << n_min_ << ".." << n_max_ << '\n';
  for (const auto& [label, grams] : per_label_) {
    for (const auto& g : grams) out << label << '\t' << g << '\t' << index_.at(g) << '\n';
  }
}

NgramVocabulary build_ngram_vocab(std::span<const SessionEvent> events, std::size_t n_min,
                                  std::size_t n_max, std::size_t cap_per_label) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& e : events) {
    auto& label_counts = counts[e.label];
    for (auto& g : extract_ngrams(e.text, n_min, n_max)) ++label_counts[g];
  }
  std::map<std::string, std::vector<std::string>> per_label;
  for (const auto& [label, label_counts] : counts) {
    std::vector<std::pair<std::string, std::size_t>> ranked(label_counts.begin(),
                                                            label_counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    auto& kept = per_label[label];
    for (std::size_t i = 0; i < ranked.size() && i < cap_per_label; ++i) {
      kept.push_back(ranked[i].first);
    }
  }
  return NgramVocabulary(std::move(per_label), n_min, n_max);
}

std::size_t hour_of_day(std::int64_t timestamp) {
  const std::int64_t secs = ((timestamp % 86400) + 86400) % 86400;
  return static_cast<std::size_t>(secs / 3600);
}

std::size_t day_of_week(std::int64_t timestamp) {
  std::int64_t days = timestamp / 86400;
  if (timestamp % 86400 < 0) --days;
  // 1970-01-01 was a Thursday (index 3 with Monday = 0).
  return static_cast<std::size_t>(((days + 3) % 7 + 7) % 7);
}

std::size_t session_feature_dim(const NgramVocabulary& vocab) {
  return kHourBins + kDayBins + vocab.size();
}

Observation featurize_event(const SessionEvent& event, const NgramVocabulary& vocab) {
  std::vector<double> features(session_feature_dim(vocab), 0.0);
  features[hour_of_day(event.timestamp)] = 1.0;
  features[kHourBins + day_of_week(event.timestamp)] = 1.0;
  for (const auto& g : extract_ngrams(event.text, vocab.n_min(), vocab.n_max())) {
    const long idx = vocab.index_of(g);
    if (idx >= 0) features[kHourBins + kDayBins + static_cast<std::size_t>(idx)] = 1.0;
  }
  return Observation(std::move(features));
}

std::pair<std::vector<EventSequence>, std::vector<EventSequence>> temporal_split(
    std::vector<EventSequence> sequences, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  }
  if (sequences.size() < 2) throw InsufficientDataError("temporal split needs at least 2 sequences");
  for (const auto& s : sequences) {
    if (s.empty()) throw std::invalid_argument("empty event sequence");
  }
  std::stable_sort(sequences.begin(), sequences.end(), [](const auto& a, const auto& b) {
    return a.front().timestamp < b.front().timestamp;
  });
  const std::size_t n_train =
      std::min(fraction_count(train_fraction, sequences.size()), sequences.size() - 1);
  std::vector<EventSequence> train(sequences.begin(),
                                   sequences.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<EventSequence> test(sequences.begin() + static_cast<std::ptrdiff_t>(n_train),
                                  sequences.end());
  return {std::move(train), std::move(test)};
}

double shannon_entropy(const std::map<std::string, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  if (total == 0) throw std::invalid_argument("entropy of an empty distribution");
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double label_entropy_at_position(std::span<const std::vector<std::string>> label_sequences,
                                 std::size_t position) {
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : label_sequences) {
    if (position < seq.size()) ++counts[seq[position]];
  }
  if (counts.empty()) throw std::invalid_argument("no sequence reaches the requested position");
  return shannon_entropy(counts);
}

double label_entropy_for_length(std::span<const std::vector<std::string>> label_sequences,
                                std::size_t length) {
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : label_sequences) {
    if (seq.size() != length) continue;
    for (const auto& l : seq) ++counts[l];
  }
  if (counts.empty()) throw std::invalid_argument("no sequence has the requested length");
  return shannon_entropy(counts);
}

std::vector<std::string> labels_of(const EventSequence& events) {
  std::vector<std::string> labels;
  labels.reserve(events.size());
  for (const auto& e : events) labels.push_back(e.label);
  return labels;
}

std::vector<SessionLengthRow> session_length_table(std::span<const Session> sessions,
                                                   std::size_t max_exact) {
  std::vector<std::vector<std::string>> labels;
  for (const auto& s : sessions) labels.push_back(labels_of(s.events));

  std::vector<SessionLengthRow> rows;
  for (std::size_t len = 1; len <= max_exact; ++len) {
    SessionLengthRow row;
    row.length = std::to_string(len);
    std::set<std::string> unique;
    for (const auto& l : labels) {
      if (l.size() != len) continue;
      ++row.sessions;
      unique.insert(l.begin(), l.end());
    }
    row.unique_labels = unique.size();
    row.entropy = row.sessions > 0 ? label_entropy_for_length(labels, len) : 0.0;
    rows.push_back(std::move(row));
  }
  SessionLengthRow longer;
  longer.length = ">" + std::to_string(max_exact);
  std::set<std::string> unique;
  for (const auto& l : labels) {
    if (l.size() <= max_exact) continue;
    ++longer.sessions;
    unique.insert(l.begin(), l.end());
  }
  longer.unique_labels = unique.size();
  longer.entropy = std::nan("");
  rows.push_back(std::move(longer));
  return rows;
}

LabeledSequence to_labeled_sequence(const EventSequence& events, const NgramVocabulary& vocab,
                                    const LabelAlphabet& alphabet, std::string sequence_id) {
  LabeledSequence seq;
  seq.sequence_id = std::move(sequence_id);
  for (const auto& e : events) {
    seq.observations.push_back(featurize_event(e, vocab));
    seq.labels.push_back(alphabet.index_of(e.label));
  }
  return seq;
}

}  // namespace neurocrf
