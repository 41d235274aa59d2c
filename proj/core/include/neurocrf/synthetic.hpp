#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neurocrf/ocr_data.hpp"
#include "neurocrf/session_data.hpp"

namespace neurocrf {

/// Letter images drawn from one fixed random glyph per letter with per-pixel flip noise.
struct SyntheticOcrSpec {
  std::vector<std::string> words{"the", "and", "for", "cat", "dog", "sun"};
  std::size_t instances_per_word = 30;
  double glyph_density = 0.35;
  double flip_probability = 0.08;
  std::uint64_t seed = 7;
};

/// Records with valid next_id chains, letter ids starting at 1.
std::vector<OcrRecord> synthetic_ocr_records(const SyntheticOcrSpec& spec);

/// Event logs of users with distinct habits: each user favours a few labels in a
/// preferred order, posts around a personal hour on preferred days, and mixes
/// personal signature words into label-topic subject lines.
struct SyntheticSessionSpec {
  std::size_t users = 5;
  std::size_t sessions_per_user = 80;
  std::size_t total_labels = 12;
  std::size_t labels_per_user = 4;
  double follow_habit_probability = 0.75;
  std::int64_t start_timestamp = 1577836800;  // 2020-01-01T00:00:00Z
  std::uint64_t seed = 11;
};

std::vector<SessionEvent> synthetic_session_events(const SyntheticSessionSpec& spec);

}  // namespace neurocrf
