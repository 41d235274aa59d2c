#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "neurocrf/types.hpp"

namespace neurocrf::cli {

/// Unlabeled sequence file: one observation per line as whitespace-separated
/// 0/1 values, a blank line between sequences, '#' starts a comment line.
std::vector<std::vector<Observation>> read_observation_sequences(std::istream& in);

/// Labeled sequence file: same layout, each line led by its label name.
struct LabeledSequenceFile {
  std::vector<std::vector<std::string>> labels;
  std::vector<std::vector<Observation>> observations;
};
LabeledSequenceFile read_labeled_sequences(std::istream& in);

/// Dataset over the sorted set of labels found in the file.
Dataset to_dataset(const LabeledSequenceFile& file);

void write_observation_sequences(std::ostream& out,
                                 const std::vector<std::vector<Observation>>& sequences);

/// Score file for calibration: "score,class" or "score<TAB>class" with class 1
/// (self) or 0 (non-self). A first line that does not parse is a header.
struct ScoreSets {
  std::vector<double> self;
  std::vector<double> nonself;
};
ScoreSets read_score_file(std::istream& in);

}  // namespace neurocrf::cli
