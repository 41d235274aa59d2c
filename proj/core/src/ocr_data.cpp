#include "neurocrf/ocr_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "neurocrf/numeric_text.hpp"

namespace neurocrf {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t end = line.find('\t', start);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  // Tolerate trailing tabs and a CR from DOS line endings.
  while (!fields.empty() && (fields.back().empty() || fields.back() == "\r")) fields.pop_back();
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().remove_suffix(1);
  }
  return fields;
}

long field_integer(std::string_view text, const char* name, std::size_t line_no) {
  try {
    return static_cast<long>(parse_integer(text));
  } catch (const std::invalid_argument&) {
    throw ParseError(std::string("bad ") + name + " field '" + std::string(text) + "'", line_no);
  }
}

}  // namespace

OcrRecord parse_ocr_record(std::string_view line, std::size_t line_no) {
  const auto fields = split_tabs(line);
  if (fields.size() != 6 + kOcrPixels) {
    throw ParseError("expected " + std::to_string(6 + kOcrPixels) + " tab-separated fields, found " +
                         std::to_string(fields.size()),
                     line_no);
  }
  OcrRecord r;
  r.letter_id = field_integer(fields[0], "id", line_no);
  if (fields[1].size() != 1 || fields[1][0] < 'a' || fields[1][0] > 'z') {
    throw ParseError("letter field must be a single lowercase letter", line_no);
  }
  r.letter = fields[1][0];
  r.next_id = field_integer(fields[2], "next_id", line_no);
  r.word_id = field_integer(fields[3], "word_id", line_no);
  r.position = field_integer(fields[4], "position", line_no);
  r.fold = field_integer(fields[5], "fold", line_no);
  for (std::size_t i = 0; i < kOcrPixels; ++i) {
    const auto f = fields[6 + i];
    if (f == "0") {
      r.pixels[i] = 0;
    } else if (f == "1") {
      r.pixels[i] = 1;
    } else {
      throw ParseError("pixel " + std::to_string(i) + " is not 0 or 1", line_no);
    }
  }
  return r;
}

std::vector<OcrRecord> read_ocr_records(std::istream& in) {
  std::vector<OcrRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    records.push_back(parse_ocr_record(line, line_no));
  }
  return records;
}

void write_ocr_records(std::ostream& out, std::span<const OcrRecord> records) {
  for (const auto& r : records) {
    out << r.letter_id << '\t' << r.letter << '\t' << r.next_id << '\t' << r.word_id << '\t'
        << r.position << '\t' << r.fold;
    for (auto p : r.pixels) out << '\t' << static_cast<int>(p);
    out << '\n';
  }
}

LabelAlphabet ocr_alphabet() {
  std::vector<std::string> letters;
  for (char c = 'a'; c <= 'z'; ++c) letters.emplace_back(1, c);
  return LabelAlphabet(std::move(letters));
}

OcrCorpus assemble_words(std::span<const OcrRecord> records) {
  std::unordered_map<long, std::size_t> by_id;
  by_id.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!by_id.emplace(records[i].letter_id, i).second) {
      throw OcrStructureError("duplicate letter id " + std::to_string(records[i].letter_id));
    }
  }
  std::vector<bool> referenced(records.size(), false);
  for (const auto& r : records) {
    if (r.next_id == -1) continue;
    auto it = by_id.find(r.next_id);
    if (it == by_id.end()) {
      throw OcrStructureError("letter " + std::to_string(r.letter_id) +
                              " points to missing next_id " + std::to_string(r.next_id));
    }
    if (referenced[it->second]) {
      throw OcrStructureError("letter " + std::to_string(r.next_id) +
                              " is the successor of more than one letter");
    }
    referenced[it->second] = true;
  }

  OcrCorpus corpus;
  corpus.record_count = records.size();
  corpus.words.alphabet = ocr_alphabet();
  corpus.words.feature_dim = kOcrPixels;
  std::vector<bool> visited(records.size(), false);
  for (std::size_t head = 0; head < records.size(); ++head) {
    if (referenced[head]) continue;
    LabeledSequence seq;
    seq.sequence_id = std::to_string(records[head].word_id) + ":" +
                      std::to_string(records[head].letter_id);
    std::size_t current = head;
    while (true) {
      if (visited[current]) throw OcrStructureError("cycle in next_id chain");
      visited[current] = true;
      const OcrRecord& r = records[current];
      seq.observations.push_back(Observation::from_bits(r.pixels));
      seq.labels.push_back(static_cast<LabelIndex>(r.letter - 'a'));
      if (r.next_id == -1) break;
      current = by_id.at(r.next_id);
    }
    corpus.words.sequences.push_back(std::move(seq));
  }
  if (std::find(visited.begin(), visited.end(), false) != visited.end()) {
    throw OcrStructureError("next_id chains contain a cycle with no word start");
  }
  if (corpus.words.token_count() != records.size()) {
    throw OcrStructureError("assembled words do not account for every letter record");
  }
  return corpus;
}

OcrCorpus load_ocr(std::istream& in) {
  const auto records = read_ocr_records(in);
  return assemble_words(records);
}

OcrCorpus load_ocr(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open OCR file '" + path.string() + "'");
  return load_ocr(in);
}

std::string word_text(const LabeledSequence& sequence, const LabelAlphabet& alphabet) {
  std::string text;
  for (LabelIndex l : sequence.labels) text += alphabet.name(l);
  return text;
}

std::map<std::string, std::vector<std::size_t>> group_by_word(const Dataset& words) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < words.sequences.size(); ++i) {
    groups[word_text(words.sequences[i], words.alphabet)].push_back(i);
  }
  return groups;
}

std::vector<WordLengthRow> word_length_table(const Dataset& words) {
  std::map<std::size_t, WordLengthRow> rows;
  for (const auto& [text, instances] : group_by_word(words)) {
    auto& row = rows[text.size()];
    row.length = text.size();
    row.distinct_words += 1;
    row.instances += instances.size();
  }
  std::vector<WordLengthRow> out;
  for (const auto& [_, row] : rows) out.push_back(row);
  return out;
}

std::vector<WordLengthRow> published_word_length_table() {
  return {{3, 9, 1283}, {5, 4, 568}, {6, 6, 768},  {7, 5, 695},  {8, 6, 750},  {9, 8, 1047},
          {10, 5, 584}, {11, 3, 304}, {12, 2, 298}, {13, 3, 313}, {14, 3, 266}};
}

std::size_t fraction_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

WordPartition partition_word_experiment(std::span<const LabeledSequence> word_instances,
                                        std::span<const LabeledSequence> other_words_same_length,
                                        double ratio, std::size_t nonself_count,
                                        std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ratio must lie in (0, 1)");
  if (word_instances.empty()) throw std::invalid_argument("no instances of the modelled word");
  if (other_words_same_length.empty()) {
    throw ExperimentSkip("no other words of the same length");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(word_instances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  WordPartition p;
  const std::size_t n_train = std::min(fraction_count(ratio, order.size()), order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? p.train : p.self_test).push_back(word_instances[order[i]]);
  }

  std::vector<std::size_t> pool(other_words_same_length.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::size_t take = std::min(nonself_count, pool.size());
  p.nonself_shortfall = take < nonself_count;
  for (std::size_t i = 0; i < take; ++i) p.nonself.push_back(other_words_same_length[pool[i]]);
  return p;
}

}  // namespace neurocrf
