#include "neurocrf/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "neurocrf/numeric_text.hpp"

namespace neurocrf {

void ExperimentConfig::validate() const {
  if (architectures.empty()) throw std::invalid_argument("at least one architecture is required");
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
  hyper.validate();
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw std::invalid_argument("train ratio must lie in (0, 1)");
  }
  if (!(temporal_train_fraction > 0.0 && temporal_train_fraction < 1.0)) {
    throw std::invalid_argument("temporal train fraction must lie in (0, 1)");
  }
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t unit_seed(std::string_view model_id, std::size_t iteration,
                        std::uint64_t base_seed) {
  std::uint64_t z = stable_hash(model_id) ^ (base_seed + iteration);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const AggregateRow* ResultsTable::aggregate(Architecture arch) const {
  for (const auto& a : aggregates) {
    if (a.architecture == arch) return &a;
  }
  return nullptr;
}

namespace {

constexpr std::array kMetricNames = {"frr",      "far",            "accuracy",
                                     "r_square", "token_accuracy", "f_score"};

std::array<double, 6> metric_values(const MetricsReport& m) {
  return {m.frr, m.far, m.accuracy, m.r_square, m.token_accuracy, m.f_score};
}

MetricsReport from_values(const std::array<double, 6>& v) {
  MetricsReport m;
  m.frr = v[0];
  m.far = v[1];
  m.accuracy = v[2];
  m.r_square = v[3];
  m.token_accuracy = v[4];
  m.f_score = v[5];
  return m;
}

MetricsSummary summarize_metrics(const std::vector<MetricsReport>& reports) {
  std::array<double, 6> mean{};
  for (const auto& r : reports) {
    const auto v = metric_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  const double n = static_cast<double>(reports.size());
  for (double& m : mean) m /= n;
  std::array<double, 6> var{};
  for (const auto& r : reports) {
    const auto v = metric_values(r);
    for (std::size_t i = 0; i < v.size(); ++i) var[i] += (v[i] - mean[i]) * (v[i] - mean[i]);
  }
  for (double& s : var) s = reports.size() > 1 ? std::sqrt(s / (n - 1.0)) : 0.0;
  return {from_values(mean), from_values(var)};
}

std::vector<ResultRow> train_and_evaluate(const Dataset& train_set,
                                          std::span<const LabeledSequence> self_test,
                                          std::span<const LabeledSequence> nonself,
                                          const std::string& model_id, std::size_t iteration,
                                          std::uint64_t seed, const ExperimentConfig& config) {
  std::vector<ResultRow> rows;
  for (Architecture arch : config.architectures) {
    TrainConfig tc;
    tc.hyper = config.hyper;
    tc.architecture = arch;
    TrainResult trained = train(train_set, tc, seed);
    ModelEvaluation eval = evaluate_model_detailed(trained.model, self_test, nonself);
    ResultRow row;
    row.model_id = model_id;
    row.architecture = arch;
    row.iteration = iteration;
    row.seed = seed;
    row.metrics = eval.metrics;
    row.train = trained.report;
    row.calibration = eval.calibration;
    row.self_scores = std::move(eval.self_scores);
    row.nonself_scores = std::move(eval.nonself_scores);
    rows.push_back(std::move(row));
  }
  return rows;
}

using WordGroups = std::map<std::string, std::vector<std::size_t>>;

std::vector<ResultRow> ocr_unit(const Dataset& words, const WordGroups& groups,
                                const std::string& word, std::size_t iteration, std::uint64_t seed,
                                const ExperimentConfig& config) {
  auto it = groups.find(word);
  if (it == groups.end()) throw std::invalid_argument("word '" + word + "' not in corpus");
  std::vector<LabeledSequence> instances;
  for (std::size_t idx : it->second) instances.push_back(words.sequences[idx]);
  std::vector<LabeledSequence> peers;
  for (const auto& [other, indices] : groups) {
    if (other == word || other.size() != word.size()) continue;
    for (std::size_t idx : indices) peers.push_back(words.sequences[idx]);
  }
  WordPartition part =
      partition_word_experiment(instances, peers, config.train_ratio, config.nonself_count, seed);
  if (part.self_test.empty()) throw ExperimentSkip("word '" + word + "' has no test instances");
  Dataset train_set;
  train_set.alphabet = words.alphabet;
  train_set.feature_dim = words.feature_dim;
  train_set.sequences = std::move(part.train);
  return train_and_evaluate(train_set, part.self_test, part.nonself, word, iteration, seed, config);
}

struct Unit {
  std::string model_id;
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
};

/// Runs units on a bounded worker pool; the output order follows `units`.
template <typename Fn>
std::vector<std::vector<ResultRow>> run_units(const std::vector<Unit>& units, std::size_t workers,
                                              Fn&& fn) {
  std::vector<std::vector<ResultRow>> results(units.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= units.size()) return;
      try {
        results[i] = fn(units[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(workers, std::max<std::size_t>(1, units.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

void finish_table(ResultsTable& table, std::vector<std::vector<ResultRow>> results,
                  const std::vector<Unit>& units) {
  for (auto& rows : results) {
    for (auto& r : rows) table.rows.push_back(std::move(r));
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.model_id != b.model_id) return a.model_id < b.model_id;
    if (a.architecture != b.architecture) return a.architecture < b.architecture;
    return a.iteration < b.iteration;
  });
  for (const auto& u : units) table.manifest.push_back({u.model_id, u.iteration, u.seed});
  std::sort(table.manifest.begin(), table.manifest.end(), [](const auto& a, const auto& b) {
    return a.model_id != b.model_id ? a.model_id < b.model_id : a.iteration < b.iteration;
  });
  summarize(table);
}

std::string sanitize(std::string_view id) {
  std::string out;
  for (char c : id) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
  }
  return out;
}

}  // namespace

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in size");
  if (a.size() < 2) throw std::invalid_argument("paired t-test needs at least two pairs");
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  PairedTTest out;
  out.mean_difference = mean;
  if (sd == 0.0) {
    out.t_statistic = mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
    out.p_value = mean == 0.0 ? 1.0 : 0.0;
    return out;
  }
  out.t_statistic = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(n - 1.0);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t_statistic)));
  return out;
}

void summarize(ResultsTable& table) {
  table.per_model.clear();
  table.aggregates.clear();
  table.significance.clear();

  std::map<std::pair<std::string, Architecture>, std::vector<MetricsReport>> by_model;
  for (const auto& r : table.rows) by_model[{r.model_id, r.architecture}].push_back(r.metrics);
  for (const auto& [key, reports] : by_model) {
    ModelAverageRow row;
    row.model_id = key.first;
    row.architecture = key.second;
    row.iterations = reports.size();
    row.mean = summarize_metrics(reports).mean;
    table.per_model.push_back(std::move(row));
  }

  std::map<Architecture, std::vector<MetricsReport>> by_arch;
  std::map<Architecture, std::map<std::string, MetricsReport>> model_means;
  for (const auto& pm : table.per_model) {
    by_arch[pm.architecture].push_back(pm.mean);
    model_means[pm.architecture][pm.model_id] = pm.mean;
  }
  for (const auto& [arch, reports] : by_arch) {
    table.aggregates.push_back({arch, reports.size(), summarize_metrics(reports)});
  }

  std::vector<Architecture> archs;
  for (const auto& [arch, _] : by_arch) archs.push_back(arch);
  for (std::size_t i = 0; i < archs.size(); ++i) {
    for (std::size_t j = i + 1; j < archs.size(); ++j) {
      for (const char* metric : {"accuracy", "token_accuracy"}) {
        std::vector<double> a;
        std::vector<double> b;
        for (const auto& [model, m] : model_means[archs[i]]) {
          auto other = model_means[archs[j]].find(model);
          if (other == model_means[archs[j]].end()) continue;
          const bool acc = std::string_view(metric) == "accuracy";
          a.push_back(acc ? m.accuracy : m.token_accuracy);
          b.push_back(acc ? other->second.accuracy : other->second.token_accuracy);
        }
        if (a.size() < 2) continue;
        const PairedTTest t = paired_t_test(a, b);
        table.significance.push_back(
            {archs[i], archs[j], metric, a.size(), t.mean_difference, t.t_statistic, t.p_value});
      }
    }
  }
}

std::vector<ResultRow> run_ocr_unit(const Dataset& words, const std::string& word,
                                    std::size_t iteration, std::uint64_t seed,
                                    const ExperimentConfig& config) {
  config.validate();
  return ocr_unit(words, group_by_word(words), word, iteration, seed, config);
}

ResultsTable run_ocr_benchmark(const Dataset& words, const ExperimentConfig& config,
                               const ProgressSink& progress) {
  config.validate();
  const WordGroups groups = group_by_word(words);
  ResultsTable table;

  std::map<std::size_t, std::size_t> words_per_length;
  for (const auto& [word, _] : groups) ++words_per_length[word.size()];

  std::vector<Unit> units;
  for (const auto& r : config.replay) {
    if (groups.find(r.model_id) == groups.end()) {
      throw std::invalid_argument("manifest word '" + r.model_id + "' not in corpus");
    }
    units.push_back({r.model_id, r.iteration, r.seed});
  }
  for (const auto& [word, _] : groups) {
    if (!config.replay.empty()) break;
    if (!config.word_lengths.empty() &&
        std::find(config.word_lengths.begin(), config.word_lengths.end(), word.size()) ==
            config.word_lengths.end()) {
      continue;
    }
    if (!config.words.empty() &&
        std::find(config.words.begin(), config.words.end(), word) == config.words.end()) {
      continue;
    }
    if (words_per_length[word.size()] < 2) {
      table.notices.push_back("skipped word '" + word + "': no other words of length " +
                              std::to_string(word.size()));
      continue;
    }
    for (std::size_t it = 0; it < config.iterations; ++it) {
      units.push_back({word, it, unit_seed(word, it, config.base_seed)});
    }
  }

  std::mutex progress_mutex;
  std::set<std::string> skipped;
  auto results = run_units(units, config.workers, [&](const Unit& u) {
    std::vector<ResultRow> rows;
    try {
      rows = ocr_unit(words, groups, u.model_id, u.iteration, u.seed, config);
    } catch (const ExperimentSkip& e) {
      std::lock_guard lock(progress_mutex);
      skipped.insert("skipped word '" + u.model_id + "': " + e.what());
      return rows;
    }
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress("word " + u.model_id + " iteration " + std::to_string(u.iteration) + " done");
    }
    return rows;
  });
  table.notices.insert(table.notices.end(), skipped.begin(), skipped.end());
  finish_table(table, std::move(results), units);
  return table;
}

SessionCorpus prepare_session_corpus(std::span<const SessionEvent> events,
                                     const ExperimentConfig& config) {
  config.validate();
  SessionCorpus corpus;
  std::set<std::string> labels;
  for (auto& [user, user_events] : group_by_user(events)) {
    auto sessions = segment_sessions(user_events, config.session_gap_seconds);
    auto sequences =
        sessions_to_sequences(sessions, config.min_session_length, config.max_session_length);
    if (sequences.size() < std::max<std::size_t>(2, config.min_sequences_per_user)) {
      corpus.notices.push_back("skipped user '" + user + "': " + std::to_string(sequences.size()) +
                               " sequences of length >= " +
                               std::to_string(config.min_session_length));
      continue;
    }
    auto [train, test] = temporal_split(std::move(sequences), config.temporal_train_fraction);
    for (const auto* part : {&train, &test}) {
      for (const auto& seq : *part) {
        for (const auto& e : seq) labels.insert(e.label);
      }
    }
    corpus.users.push_back({user, std::move(train), std::move(test)});
  }
  if (!labels.empty()) {
    corpus.alphabet = LabelAlphabet(std::vector<std::string>(labels.begin(), labels.end()));
  }
  return corpus;
}

UserExperiment build_user_experiment(const SessionCorpus& corpus, std::size_t user_index,
                                     const ExperimentConfig& config) {
  const UserSequences& self = corpus.users.at(user_index);
  if (corpus.users.size() < 2) throw ExperimentSkip("no other users to act as non-self");
  std::vector<SessionEvent> train_events;
  for (const auto& seq : self.train) train_events.insert(train_events.end(), seq.begin(), seq.end());

  UserExperiment ex;
  ex.vocab = build_ngram_vocab(train_events, 1, 2, config.ngram_cap_per_label);
  ex.train.alphabet = corpus.alphabet;
  ex.train.feature_dim = session_feature_dim(ex.vocab);
  for (std::size_t i = 0; i < self.train.size(); ++i) {
    ex.train.sequences.push_back(to_labeled_sequence(self.train[i], ex.vocab, corpus.alphabet,
                                                     self.user + ":train:" + std::to_string(i)));
  }
  for (std::size_t i = 0; i < self.test.size(); ++i) {
    ex.self_test.push_back(to_labeled_sequence(self.test[i], ex.vocab, corpus.alphabet,
                                               self.user + ":test:" + std::to_string(i)));
  }
  for (std::size_t u = 0; u < corpus.users.size(); ++u) {
    if (u == user_index) continue;
    const auto& other = corpus.users[u];
    for (std::size_t i = 0; i < other.test.size(); ++i) {
      ex.nonself.push_back(to_labeled_sequence(other.test[i], ex.vocab, corpus.alphabet,
                                               other.user + ":test:" + std::to_string(i)));
    }
  }
  return ex;
}

std::vector<ResultRow> run_session_unit(const SessionCorpus& corpus, const std::string& user,
                                        std::size_t iteration, std::uint64_t seed,
                                        const ExperimentConfig& config) {
  config.validate();
  for (std::size_t u = 0; u < corpus.users.size(); ++u) {
    if (corpus.users[u].user != user) continue;
    const UserExperiment ex = build_user_experiment(corpus, u, config);
    return train_and_evaluate(ex.train, ex.self_test, ex.nonself, user, iteration, seed, config);
  }
  throw std::invalid_argument("user '" + user + "' not in session corpus");
}

ResultsTable run_session_benchmark(std::span<const SessionEvent> events,
                                   const ExperimentConfig& config, const ProgressSink& progress) {
  const SessionCorpus corpus = prepare_session_corpus(events, config);
  ResultsTable table;
  table.notices = corpus.notices;
  if (corpus.users.size() < 2) {
    table.notices.push_back("fewer than two usable users; nothing to evaluate");
    summarize(table);
    return table;
  }

  std::vector<Unit> units;
  for (const auto& r : config.replay) units.push_back({r.model_id, r.iteration, r.seed});
  for (const auto& u : corpus.users) {
    if (!config.replay.empty()) break;
    for (std::size_t it = 0; it < config.iterations; ++it) {
      units.push_back({u.user, it, unit_seed(u.user, it, config.base_seed)});
    }
  }
  std::vector<UserExperiment> experiments;
  for (std::size_t u = 0; u < corpus.users.size(); ++u) {
    experiments.push_back(build_user_experiment(corpus, u, config));
  }
  std::map<std::string, std::size_t> user_index;
  for (std::size_t u = 0; u < corpus.users.size(); ++u) user_index[corpus.users[u].user] = u;

  std::mutex progress_mutex;
  for (const auto& u : units) {
    if (user_index.find(u.model_id) == user_index.end()) {
      throw std::invalid_argument("manifest user '" + u.model_id + "' not in session corpus");
    }
  }
  auto results = run_units(units, config.workers, [&](const Unit& u) {
    const UserExperiment& ex = experiments[user_index.at(u.model_id)];
    auto rows = train_and_evaluate(ex.train, ex.self_test, ex.nonself, u.model_id, u.iteration,
                                   u.seed, config);
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress("user " + u.model_id + " iteration " + std::to_string(u.iteration) + " done");
    }
    return rows;
  });
  finish_table(table, std::move(results), units);
  return table;
}

void write_results_csv(std::ostream& out, const ResultsTable& table) {
  out << "model_id,architecture,iteration,seed,frr,far,accuracy,r_square,token_accuracy,f_score,"
         "degenerate,threshold,sequences_consumed,converged\n";
  for (const auto& r : table.rows) {
    const auto v = metric_values(r.metrics);
    out << r.model_id << ',' << to_string(r.architecture) << ',' << r.iteration << ',' << r.seed;
    for (double x : v) out << ',' << format_double(x);
    out << ',' << (r.metrics.degenerate ? 1 : 0) << ',' << format_double(r.calibration.threshold)
        << ',' << r.train.sequences_consumed << ',' << (r.train.converged ? 1 : 0) << '\n';
  }
}

void write_per_model_csv(std::ostream& out, const ResultsTable& table) {
  out << "model_id,architecture,iterations";
  for (const char* name : kMetricNames) out << ',' << name;
  out << '\n';
  for (const auto& r : table.per_model) {
    out << r.model_id << ',' << to_string(r.architecture) << ',' << r.iterations;
    for (double x : metric_values(r.mean)) out << ',' << format_double(x);
    out << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const ResultsTable& table) {
  out << "architecture,models";
  for (const char* name : kMetricNames) out << ',' << name << "_mean," << name << "_std";
  out << '\n';
  for (const auto& a : table.aggregates) {
    out << to_string(a.architecture) << ',' << a.models;
    const auto mean = metric_values(a.summary.mean);
    const auto sd = metric_values(a.summary.stddev);
    for (std::size_t i = 0; i < mean.size(); ++i) {
      out << ',' << format_double(mean[i]) << ',' << format_double(sd[i]);
    }
    out << '\n';
  }
}

void write_significance_csv(std::ostream& out, const ResultsTable& table) {
  out << "first,second,metric,pairs,mean_difference,t_statistic,p_value\n";
  for (const auto& s : table.significance) {
    out << to_string(s.first) << ',' << to_string(s.second) << ',' << s.metric << ',' << s.pairs
        << ',' << format_double(s.mean_difference) << ',' << format_double(s.t_statistic) << ','
        << format_double(s.p_value) << '\n';
  }
}

void write_seed_manifest(std::ostream& out, const ResultsTable& table) {
  out << "model_id,iteration,seed\n";
  for (const auto& m : table.manifest) {
    out << m.model_id << ',' << m.iteration << ',' << m.seed << '\n';
  }
}

std::vector<SeedManifestRow> read_seed_manifest(std::istream& in) {
  std::vector<SeedManifestRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line_no == 1 && line.rfind("model_id,", 0) == 0)) continue;
    auto fields = split_csv_line(line, line_no);
    if (fields.size() != 3) throw ParseError("expected model_id,iteration,seed", line_no);
    try {
      rows.push_back({fields[0], static_cast<std::size_t>(parse_unsigned(fields[1])),
                      parse_unsigned(fields[2])});
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return rows;
}

void write_results_directory(const std::filesystem::path& dir, const ResultsTable& table) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "plot_data");
  auto open = [&](const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    return out;
  };
  {
    auto out = open(dir / "results.csv");
    write_results_csv(out, table);
  }
  {
    auto out = open(dir / "per_model.csv");
    write_per_model_csv(out, table);
  }
  {
    auto out = open(dir / "aggregate.csv");
    write_aggregate_csv(out, table);
  }
  {
    auto out = open(dir / "significance.csv");
    write_significance_csv(out, table);
  }
  {
    auto out = open(dir / "seeds.csv");
    write_seed_manifest(out, table);
  }
  {
    auto out = open(dir / "notices.txt");
    for (const auto& n : table.notices) out << n << '\n';
  }
  for (const auto& r : table.rows) {
    const std::string name = sanitize(r.model_id) + "__" + std::string(to_string(r.architecture)) +
                             "__it" + std::to_string(r.iteration) + ".tsv";
    auto out = open(dir / "plot_data" / name);
    out << "score\tclass\n";
    for (double s : r.self_scores) out << format_double(s) << "\t1\n";
    for (double s : r.nonself_scores) out << format_double(s) << "\t0\n";
  }
}

void print_aggregate(std::ostream& out, const ResultsTable& table) {
  out << std::left << std::setw(11) << "method" << std::setw(8) << "models" << std::setw(17)
      << "FRR(%)" << std::setw(17) << "FAR(%)" << std::setw(17) << "Acc.(%)" << std::setw(14)
      << "R^2" << std::setw(17) << "TokenAcc.(%)" << "F-score\n";
  auto cell = [](double mean, double sd, int digits) {
    return format_fixed(mean, digits) + "+-" + format_fixed(sd, digits);
  };
  for (const auto& a : table.aggregates) {
    const auto& m = a.summary.mean;
    const auto& s = a.summary.stddev;
    out << std::left << std::setw(11) << to_string(a.architecture) << std::setw(8) << a.models
        << std::setw(17) << cell(m.frr, s.frr, 2) << std::setw(17) << cell(m.far, s.far, 2)
        << std::setw(17) << cell(m.accuracy, s.accuracy, 2) << std::setw(14)
        << cell(m.r_square, s.r_square, 2) << std::setw(17)
        << cell(m.token_accuracy, s.token_accuracy, 2) << cell(m.f_score, s.f_score, 2) << '\n';
  }
  for (const auto& sig : table.significance) {
    out << "paired t-test " << to_string(sig.first) << " vs " << to_string(sig.second) << " on "
        << sig.metric << ": n=" << sig.pairs << " diff=" << format_fixed(sig.mean_difference, 2)
        << " t=" << format_fixed(sig.t_statistic, 3) << " p=" << format_fixed(sig.p_value, 4)
        << '\n';
  }
}

}  // namespace neurocrf
