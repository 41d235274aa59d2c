#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "neurocrf/types.hpp"

namespace neurocrf {

struct SessionEvent {
  std::string user;
  std::int64_t timestamp = 0;  // seconds since the epoch, UTC
  std::string label;           // category, e.g. a subreddit
  std::string text;            // subject header
  bool operator==(const SessionEvent&) const = default;
};

struct Session {
  std::string user;
  std::vector<SessionEvent> events;
};

using EventSequence = std::vector<SessionEvent>;

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Splits one comma-separated line, honouring double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no);

/// Lines of user,timestamp,label,text. A first line starting with "user," is a header.
std::vector<SessionEvent> read_event_log(std::istream& in);
std::vector<SessionEvent> load_event_log(const std::filesystem::path& path);
void write_event_log(std::ostream& out, std::span<const SessionEvent> events);

/// Events per user, each list in stable timestamp order. Users sorted by name.
std::map<std::string, std::vector<SessionEvent>> group_by_user(std::span<const SessionEvent> events);

inline constexpr std::int64_t kDefaultSessionGapSeconds = 3600;

/// Sorts by timestamp (stable) and starts a new session whenever the gap to the
/// previous event exceeds gap_seconds.
std::vector<Session> segment_sessions(std::vector<SessionEvent> events,
                                      std::int64_t gap_seconds = kDefaultSessionGapSeconds);

/// Drops sessions shorter than min_len; keeps the first max_len events of longer ones.
std::vector<EventSequence> sessions_to_sequences(std::span<const Session> sessions,
                                                 std::size_t min_len = 4, std::size_t max_len = 6);

/// Lowercased whitespace tokens joined into word n-grams for n in [n_min, n_max].
std::vector<std::string> extract_ngrams(std::string_view text, std::size_t n_min = 1,
                                        std::size_t n_max = 2);

/// Most common subject n-grams per label, with one feature index per distinct n-gram.
class NgramVocabulary {
 public:
  NgramVocabulary() = default;
  NgramVocabulary(std::map<std::string, std::vector<std::string>> per_label, std::size_t n_min,
                  std::size_t n_max);

  std::size_t size() const noexcept { return ordered_.size(); }
  std::size_t n_min() const noexcept { return n_min_; }
  std::size_t n_max() const noexcept { return n_max_; }
  const std::map<std::string, std::vector<std::string>>& per_label() const noexcept {
    return per_label_;
  }
  /// n-grams in feature-index order.
  const std::vector<std::string>& ngrams() const noexcept { return ordered_; }
  /// Feature index of the n-gram within the n-gram block, or -1.
  long index_of(const std::string& ngram) const;

  /// Deterministic text form: "label<TAB>ngram" lines in index order.
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::vector<std::string>> per_label_;
  std::vector<std::string> ordered_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t n_min_ = 1;
  std::size_t n_max_ = 2;
};

/// Ties in frequency are broken lexicographically.
NgramVocabulary build_ngram_vocab(std::span<const SessionEvent> events, std::size_t n_min = 1,
                                  std::size_t n_max = 2, std::size_t cap_per_label = 100);

inline constexpr std::size_t kHourBins = 24;
inline constexpr std::size_t kDayBins = 7;

std::size_t hour_of_day(std::int64_t timestamp);
/// Monday = 0 ... Sunday = 6.
std::size_t day_of_week(std::int64_t timestamp);

/// [24 hour one-hot | 7 day one-hot | n-gram indicators].
Observation featurize_event(const SessionEvent& event, const NgramVocabulary& vocab);
std::size_t session_feature_dim(const NgramVocabulary& vocab);

/// Earliest ceil(fraction * N) sequences by first-event timestamp train, the rest test.
/// Stable for equal timestamps; the test side always keeps at least one sequence.
std::pair<std::vector<EventSequence>, std::vector<EventSequence>> temporal_split(
    std::vector<EventSequence> sequences, double train_fraction = 0.9);

/// Shannon entropy in bits of a label histogram.
double shannon_entropy(const std::map<std::string, std::size_t>& counts);

/// Entropy of the labels found at `position` across all sequences that reach it.
double label_entropy_at_position(std::span<const std::vector<std::string>> label_sequences,
                                 std::size_t position);

/// Entropy of all labels pooled over the sequences of exactly `length` events.
double label_entropy_for_length(std::span<const std::vector<std::string>> label_sequences,
                                std::size_t length);

std::vector<std::string> labels_of(const EventSequence& events);

struct SessionLengthRow {
  std::string length;  // "1".."6" or ">6"
  double entropy = 0.0;
  std::size_t sessions = 0;
  std::size_t unique_labels = 0;
};

/// Session-length characteristics over every user's sessions.
std::vector<SessionLengthRow> session_length_table(std::span<const Session> sessions,
                                                   std::size_t max_exact = 6);

LabeledSequence to_labeled_sequence(const EventSequence& events, const NgramVocabulary& vocab,
                                    const LabelAlphabet& alphabet, std::string sequence_id);

}  // namespace neurocrf
