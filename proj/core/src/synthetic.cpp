#include "neurocrf/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace neurocrf {

std::vector<OcrRecord> synthetic_ocr_records(const SyntheticOcrSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution on(spec.glyph_density);
  std::array<std::array<std::uint8_t, kOcrPixels>, 26> glyphs{};
  for (auto& g : glyphs) {
    for (auto& p : g) p = on(rng) ? 1 : 0;
  }

  std::bernoulli_distribution flip(spec.flip_probability);
  std::vector<OcrRecord> records;
  long next_letter_id = 1;
  long word_id = 1;
  // Interleave words so instances of one word are not contiguous in the file.
  for (std::size_t instance = 0; instance < spec.instances_per_word; ++instance) {
    for (const auto& word : spec.words) {
      for (std::size_t pos = 0; pos < word.size(); ++pos) {
        OcrRecord r;
        r.letter_id = next_letter_id++;
        r.letter = word[pos];
        r.next_id = pos + 1 < word.size() ? r.letter_id + 1 : -1;
        r.word_id = word_id;
        r.position = static_cast<long>(pos) + 1;
        r.fold = static_cast<long>(instance % 10);
        const auto& glyph = glyphs[static_cast<std::size_t>(word[pos] - 'a')];
        for (std::size_t i = 0; i < kOcrPixels; ++i) {
          r.pixels[i] = static_cast<std::uint8_t>(glyph[i] ^ (flip(rng) ? 1 : 0));
        }
        records.push_back(r);
      }
      ++word_id;
    }
  }
  return records;
}

namespace {

const std::array<const char*, 10> kFiller = {"the", "a",  "my",   "this", "is",
                                             "of",  "on", "what", "new",  "just"};

std::string topic_word(std::size_t label, std::size_t k) {
  return "topic" + std::to_string(label) + "w" + std::to_string(k);
}

std::string signature_word(std::size_t user, std::size_t k) {
  return "sig" + std::to_string(user) + "w" + std::to_string(k);
}

}  // namespace

std::vector<SessionEvent> synthetic_session_events(const SyntheticSessionSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<SessionEvent> events;
  const std::size_t per_user = std::min(spec.labels_per_user, spec.total_labels);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t u = 0; u < spec.users; ++u) {
    const std::string user = "user" + std::to_string(u);
    // Neighbouring users share part of their label repertoire.
    std::vector<std::size_t> labels;
    for (std::size_t k = 0; k < per_user; ++k) labels.push_back((u * 2 + k) % spec.total_labels);
    std::vector<std::size_t> habit(labels.size());
    for (std::size_t k = 0; k < habit.size(); ++k) habit[k] = k;
    std::shuffle(habit.begin(), habit.end(), rng);  // preferred successor order

    const int peak_hour = static_cast<int>((u * 5 + 8) % 24);
    std::array<bool, 7> preferred_day{};
    for (std::size_t k = 0; k < 3; ++k) preferred_day[(u * 2 + k * 2) % 7] = true;

    std::normal_distribution<double> hour_jitter(0.0, 1.2);
    std::uniform_int_distribution<int> minute(0, 59);
    std::uniform_int_distribution<std::int64_t> in_session_gap(120, 2400);
    std::discrete_distribution<int> session_length({3, 2, 2, 3, 3, 3, 2, 1, 1});
    std::uniform_int_distribution<std::size_t> pick_label(0, labels.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_topic(0, 7);
    std::uniform_int_distribution<std::size_t> pick_sig(0, 5);
    std::uniform_int_distribution<std::size_t> pick_filler(0, kFiller.size() - 1);
    std::uniform_int_distribution<int> topic_words(1, 3);

    std::int64_t day = spec.start_timestamp / 86400 + static_cast<std::int64_t>(u);
    for (std::size_t s = 0; s < spec.sessions_per_user; ++s) {
      // Advance to a day the user likes (occasionally any day).
      do {
        ++day;
      } while (!preferred_day[static_cast<std::size_t>((day + 3) % 7)] && unit(rng) < 0.85);
      const int hour = ((peak_hour + static_cast<int>(std::lround(hour_jitter(rng)))) % 24 + 24) % 24;
      std::int64_t t = day * 86400 + hour * 3600 + minute(rng) * 60;

      const int length = session_length(rng) + 1;
      std::size_t current = pick_label(rng);
      for (int e = 0; e < length; ++e) {
        if (e > 0) {
          t += in_session_gap(rng);
          current = unit(rng) < spec.follow_habit_probability
                        ? habit[current]
                        : pick_label(rng);
        }
        const std::size_t label = labels[current];
        std::string text = kFiller[pick_filler(rng)];
        const int n_topic = topic_words(rng);
        for (int k = 0; k < n_topic; ++k) text += " " + topic_word(label, pick_topic(rng));
        if (unit(rng) < 0.7) text += " " + signature_word(u, pick_sig(rng));
        events.push_back({user, t, "r/label" + std::to_string(label), text});
      }
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return events;
}

}  // namespace neurocrf
