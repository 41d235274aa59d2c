#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "neurocrf/types.hpp"

namespace neurocrf {

inline constexpr std::size_t kOcrRows = 16;
inline constexpr std::size_t kOcrCols = 8;
inline constexpr std::size_t kOcrPixels = kOcrRows * kOcrCols;

/// One letter image of the handwritten-word corpus.
struct OcrRecord {
  long letter_id = 0;
  char letter = 'a';
  long next_id = -1;  // -1 ends the word
  long word_id = 0;
  long position = 0;
  long fold = 0;
  std::array<std::uint8_t, kOcrPixels> pixels{};
};

/// Broken next_id chains, cycles, duplicated ids.
class OcrStructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tab-separated: id, letter, next_id, word_id, position, fold, 128 pixels.
OcrRecord parse_ocr_record(std::string_view line, std::size_t line_no);
std::vector<OcrRecord> read_ocr_records(std::istream& in);
void write_ocr_records(std::ostream& out, std::span<const OcrRecord> records);

/// The a-z alphabet used by every OCR dataset.
LabelAlphabet ocr_alphabet();

struct OcrCorpus {
  Dataset words;  // one sequence per word instance, in file order of first letters
  std::size_t record_count = 0;
};

/// Groups records into words by following next_id chains.
OcrCorpus assemble_words(std::span<const OcrRecord> records);
OcrCorpus load_ocr(std::istream& in);
OcrCorpus load_ocr(const std::filesystem::path& path);

std::string word_text(const LabeledSequence& sequence, const LabelAlphabet& alphabet);

/// Word text -> indices of its instances in `words.sequences`.
std::map<std::string, std::vector<std::size_t>> group_by_word(const Dataset& words);

struct WordLengthRow {
  std::size_t length = 0;
  std::size_t distinct_words = 0;
  std::size_t instances = 0;
  bool operator==(const WordLengthRow&) const = default;
};

/// Per word length: number of distinct words and of instances.
std::vector<WordLengthRow> word_length_table(const Dataset& words);

/// The word-length characteristics of the published corpus (52152 letters, 55 words).
std::vector<WordLengthRow> published_word_length_table();
inline constexpr std::size_t kPublishedLetterCount = 52152;

/// No other word shares the length of the modelled word.
class ExperimentSkip : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WordPartition {
  std::vector<LabeledSequence> train;
  std::vector<LabeledSequence> self_test;
  std::vector<LabeledSequence> nonself;
  bool nonself_shortfall = false;  // fewer peers available than requested
};

/// Seeded shuffle; the first ceil(ratio * N) instances train, the rest test.
/// Non-self: up to nonself_count instances drawn without replacement from peers.
WordPartition partition_word_experiment(std::span<const LabeledSequence> word_instances,
                                        std::span<const LabeledSequence> other_words_same_length,
                                        double ratio, std::size_t nonself_count,
                                        std::uint64_t seed);

/// ceil(fraction * n) guarded against representation error (2/3 * 150 is 100).
std::size_t fraction_count(double fraction, std::size_t n);

}  // namespace neurocrf
