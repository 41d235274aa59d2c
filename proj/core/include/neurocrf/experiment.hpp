#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neurocrf/evaluation.hpp"
#include "neurocrf/ocr_data.hpp"
#include "neurocrf/session_data.hpp"
#include "neurocrf/training.hpp"
#include "neurocrf/types.hpp"

namespace neurocrf {

struct SeedManifestRow {
  std::string model_id;
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::vector<Architecture> architectures{Architecture::CrfMlp, Architecture::CrfRnn,
                                          Architecture::CrfPerceptron};
  std::size_t iterations = 5;
  std::uint64_t base_seed = 1;
  HyperParams hyper;
  std::size_t workers = 1;

  // OCR word models
  double train_ratio = 2.0 / 3.0;
  std::size_t nonself_count = 100;
  std::vector<std::size_t> word_lengths;  // empty: every length
  std::vector<std::string> words;         // empty: every word

  // Session models
  std::int64_t session_gap_seconds = kDefaultSessionGapSeconds;
  std::size_t min_session_length = 4;
  std::size_t max_session_length = 6;
  double temporal_train_fraction = 0.9;
  std::size_t min_sequences_per_user = 5;
  std::size_t ngram_cap_per_label = 100;

  /// When non-empty, run exactly these (model, iteration, seed) units instead of
  /// deriving them; used to re-derive rows from a written seed manifest.
  std::vector<SeedManifestRow> replay;

  void validate() const;
};

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view text);

/// Seed of one (model, iteration) unit: base_seed + iteration mixed with the model id hash.
std::uint64_t unit_seed(std::string_view model_id, std::size_t iteration, std::uint64_t base_seed);

/// One trained-and-evaluated model.
struct ResultRow {
  std::string model_id;
  Architecture architecture = Architecture::CrfMlp;
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  TrainReport train;
  CalibrationModel calibration;
  std::vector<double> self_scores;
  std::vector<double> nonself_scores;
};

struct MetricsSummary {
  MetricsReport mean;
  MetricsReport stddev;
};

struct ModelAverageRow {
  std::string model_id;
  Architecture architecture = Architecture::CrfMlp;
  std::size_t iterations = 0;
  MetricsReport mean;
};

struct AggregateRow {
  Architecture architecture = Architecture::CrfMlp;
  std::size_t models = 0;
  MetricsSummary summary;
};

/// Paired two-sided t-test over per-model averages.
struct SignificanceRow {
  Architecture first = Architecture::CrfMlp;
  Architecture second = Architecture::CrfMlp;
  std::string metric;
  std::size_t pairs = 0;
  double mean_difference = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
};

struct ResultsTable {
  std::vector<ResultRow> rows;  // sorted by (model_id, architecture, iteration)
  std::vector<ModelAverageRow> per_model;
  std::vector<AggregateRow> aggregates;
  std::vector<SignificanceRow> significance;
  std::vector<SeedManifestRow> manifest;
  std::vector<std::string> notices;

  const AggregateRow* aggregate(Architecture arch) const;
};

/// Fills per_model, aggregates and significance from rows.
void summarize(ResultsTable& table);

struct PairedTTest {
  double mean_difference = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
};
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

// ---- OCR word authentication -------------------------------------------------

/// Runs every architecture on one (word, iteration) unit.
std::vector<ResultRow> run_ocr_unit(const Dataset& words, const std::string& word,
                                    std::size_t iteration, std::uint64_t seed,
                                    const ExperimentConfig& config);

using ProgressSink = std::function<void(const std::string&)>;

ResultsTable run_ocr_benchmark(const Dataset& words, const ExperimentConfig& config,
                               const ProgressSink& progress = {});

// ---- Session authentication --------------------------------------------------

/// Per-user sequences after segmentation, filtering and temporal split.
struct UserSequences {
  std::string user;
  std::vector<EventSequence> train;
  std::vector<EventSequence> test;
};

struct SessionCorpus {
  std::vector<UserSequences> users;  // sorted by user
  LabelAlphabet alphabet;            // every label of every kept sequence, sorted
  std::vector<std::string> notices;
};

SessionCorpus prepare_session_corpus(std::span<const SessionEvent> events,
                                     const ExperimentConfig& config);

/// Datasets for one user's model: vocabulary from the user's training events only.
struct UserExperiment {
  NgramVocabulary vocab;
  Dataset train;
  std::vector<LabeledSequence> self_test;
  std::vector<LabeledSequence> nonself;
};

UserExperiment build_user_experiment(const SessionCorpus& corpus, std::size_t user_index,
                                     const ExperimentConfig& config);

std::vector<ResultRow> run_session_unit(const SessionCorpus& corpus, const std::string& user,
                                        std::size_t iteration, std::uint64_t seed,
                                        const ExperimentConfig& config);

ResultsTable run_session_benchmark(std::span<const SessionEvent> events,
                                   const ExperimentConfig& config,
                                   const ProgressSink& progress = {});

// ---- Output ------------------------------------------------------------------

void write_results_csv(std::ostream& out, const ResultsTable& table);
void write_per_model_csv(std::ostream& out, const ResultsTable& table);
void write_aggregate_csv(std::ostream& out, const ResultsTable& table);
void write_significance_csv(std::ostream& out, const ResultsTable& table);
void write_seed_manifest(std::ostream& out, const ResultsTable& table);
std::vector<SeedManifestRow> read_seed_manifest(std::istream& in);

/// results.csv, per_model.csv, aggregate.csv, significance.csv, seeds.csv,
/// notices.txt and plot_data/<model>__<arch>__it<k>.tsv (score, class) files.
void write_results_directory(const std::filesystem::path& dir, const ResultsTable& table);

/// Human-readable aggregate table.
void print_aggregate(std::ostream& out, const ResultsTable& table);

}  // namespace neurocrf
