#include "neurocrf_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "neurocrf/decoder.hpp"
#include "neurocrf/evaluation.hpp"
#include "neurocrf/experiment.hpp"
#include "neurocrf/model.hpp"
#include "neurocrf/numeric_text.hpp"
#include "neurocrf/ocr_data.hpp"
#include "neurocrf/session_data.hpp"
#include "neurocrf/synthetic.hpp"
#include "neurocrf/training.hpp"
#include "neurocrf_cli/sequence_file.hpp"

namespace neurocrf::cli {

namespace fs = std::filesystem;

namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kArchNames{"crf-mlp", "crf-rnn", "crf-prcpt"};

struct CommonOptions {
  std::vector<std::string> archs;
  std::uint64_t seed = 1;
  std::size_t iterations = 5;
  double eta = HyperParams{}.learning_rate;
  double lambda = HyperParams{}.regularization;
  std::size_t max_examples = HyperParams{}.max_sgd_examples;
  std::string out_dir;
  std::size_t workers = 1;

  HyperParams hyper() const {
    HyperParams h;
    h.learning_rate = eta;
    h.regularization = lambda;
    h.max_sgd_examples = max_examples;
    return h;
  }

  std::vector<Architecture> architectures() const {
    std::vector<Architecture> out;
    for (const auto& a : archs) {
      const Architecture arch = parse_architecture(a);
      if (std::find(out.begin(), out.end(), arch) == out.end()) out.push_back(arch);
    }
    return out;
  }
};

void add_hyper_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "Seed (training seed, or base seed for benchmarks)")
      ->capture_default_str();
  cmd->add_option("--eta", o.eta, "Learning rate")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "Weight-elimination strength")->capture_default_str();
  cmd->add_option("--max-examples", o.max_examples, "Sequence presentations before stopping")
      ->capture_default_str();
}

void add_single_arch(CLI::App* cmd, CommonOptions& o) {
  o.archs = {"crf-mlp"};
  cmd->add_option("--arch", o.archs, "Architecture")
      ->expected(1)
      ->check(CLI::IsMember(kArchNames))
      ->capture_default_str();
}

void add_benchmark_options(CLI::App* cmd, CommonOptions& o) {
  o.archs = kArchNames;
  cmd->add_option("--arch", o.archs, "Architectures (repeat or comma-separate)")
      ->delimiter(',')
      ->check(CLI::IsMember(kArchNames));
  add_hyper_options(cmd, o);
  cmd->add_option("--iterations", o.iterations, "Iterations per model")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--out-dir", o.out_dir, "Directory for result tables and plot data");
  cmd->add_option("--workers", o.workers, "Parallel experiment units")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw InputError("cannot open '" + path + "': no such file");
}

std::ifstream open_input(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

// Parse failures are reported with the file they came from.
template <typename Parse>
auto read_file(const std::string& path, Parse&& parse) {
  auto in = open_input(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw InputError("'" + path + "': " + e.what());
  } catch (const OcrStructureError& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

OcrCorpus load_ocr_file(const std::string& path) {
  return read_file(path, [](std::istream& in) { return load_ocr(in); });
}

std::vector<SessionEvent> load_events_file(const std::string& path) {
  return read_file(path, [](std::istream& in) { return read_event_log(in); });
}

NeuroCrfModel read_model_file(const std::string& path) {
  return read_file(path, [](std::istream& in) { return load_model(in); });
}

Dataset ocr_word_dataset(const OcrCorpus& corpus, const std::string& word) {
  const auto groups = group_by_word(corpus.words);
  auto it = groups.find(word);
  if (it == groups.end()) throw InputError("word '" + word + "' does not occur in the OCR file");
  Dataset data;
  data.alphabet = corpus.words.alphabet;
  data.feature_dim = corpus.words.feature_dim;
  for (std::size_t i : it->second) data.sequences.push_back(corpus.words.sequences[i]);
  return data;
}

std::string join_labels(const LabelAlphabet& alphabet, std::span<const LabelIndex> labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += ' ';
    out += alphabet.name(labels[i]);
  }
  return out;
}

void check_dimensions(const NeuroCrfModel& model, std::size_t dim, const std::string& source) {
  if (dim != model.feature_dim()) {
    throw MismatchError(source + " has " + std::to_string(dim) +
                        " features per observation but the model expects " +
                        std::to_string(model.feature_dim()));
  }
}

void print_metrics(std::ostream& out, const CalibrationModel& cal, const MetricsReport& m) {
  out << "slope " << format_double(cal.slope) << '\n'
      << "intercept " << format_double(cal.intercept) << '\n'
      << "threshold " << format_double(cal.threshold) << '\n'
      << "r_square " << format_double(m.r_square) << '\n'
      << "frr " << format_double(m.frr) << '\n'
      << "far " << format_double(m.far) << '\n'
      << "accuracy " << format_double(m.accuracy) << '\n'
      << "degenerate " << (m.degenerate ? "true" : "false") << '\n';
}

MetricsReport calibrate_scores(std::span<const double> self, std::span<const double> nonself,
                               CalibrationModel& cal) {
  MetricsReport m;
  try {
    cal = fit_calibration(self, nonself);
    const ErrorRates rates = frr_far(self, nonself, cal);
    m.frr = rates.frr;
    m.far = rates.far;
    m.r_square = cal.r_square;
  } catch (const DegenerateFitError&) {
    cal = {};
    m.frr = 0.0;
    m.far = 100.0;
    m.degenerate = true;
  }
  m.accuracy = accuracy_from_rates(m.frr, m.far);
  return m;
}

std::vector<SeedManifestRow> load_manifest(const std::string& path) {
  return read_file(path, [](std::istream& in) { return read_seed_manifest(in); });
}

void finish_benchmark(const ResultsTable& table, const CommonOptions& o, std::ostream& out,
                      std::ostream& err) {
  for (const auto& n : table.notices) err << "notice: " << n << '\n';
  if (table.rows.empty()) throw InputError("no experiment produced results");
  print_aggregate(out, table);
  if (!o.out_dir.empty()) {
    write_results_directory(o.out_dir, table);
    out << "results written to " << o.out_dir << '\n';
  }
}

// ---- commands ---------------------------------------------------------------

struct TrainOptions {
  CommonOptions common;
  std::string ocr;
  std::string word;
  std::string sequences;
  std::string model;
  std::string report;
  std::string trace;
};

int cmd_train(const TrainOptions& o, std::ostream& out) {
  Dataset data;
  if (!o.ocr.empty()) {
    if (o.word.empty()) throw InputError("--ocr needs --word to select the modelled word");
    data = ocr_word_dataset(load_ocr_file(o.ocr), o.word);
  } else {
    data = to_dataset(
        read_file(o.sequences, [](std::istream& in) { return read_labeled_sequences(in); }));
  }

  TrainConfig config;
  config.architecture = parse_architecture(o.common.archs.front());
  config.hyper = o.common.hyper();

  std::ofstream trace_out;
  TrainHooks hooks;
  if (!o.trace.empty()) {
    trace_out = open_output(o.trace);
    hooks.trace = [&](const TraceRecord& r) { trace_out << to_json_line(r) << '\n'; };
  }
  TrainResult result = train(data, config, o.common.seed, hooks);
  save_model_file(result.model, o.model);

  nlohmann::ordered_json report;
  report["architecture"] = std::string(to_string(config.architecture));
  report["seed"] = o.common.seed;
  report["sequences"] = data.sequences.size();
  report["sequences_consumed"] = result.report.sequences_consumed;
  report["converged"] = result.report.converged;
  report["updates_applied"] = result.report.updates_applied;
  report["final_train_token_error"] = result.report.final_train_token_error;
  report["model"] = o.model;
  if (!o.report.empty()) {
    auto rep = open_output(o.report);
    rep << report.dump(2) << '\n';
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

struct DecodeOptions {
  std::string model;
  std::string sequences;
  std::string ocr;
  std::string word;
};

int cmd_decode(const DecodeOptions& o, std::ostream& out) {
  require_file(o.model);
  const NeuroCrfModel model = read_model_file(o.model);

  std::vector<std::string> ids;
  std::vector<std::vector<Observation>> sequences;
  if (!o.ocr.empty()) {
    const OcrCorpus corpus = load_ocr_file(o.ocr);
    check_dimensions(model, corpus.words.feature_dim, o.ocr);
    for (const auto& seq : corpus.words.sequences) {
      if (!o.word.empty() && word_text(seq, corpus.words.alphabet) != o.word) continue;
      ids.push_back(seq.sequence_id);
      sequences.push_back(seq.observations);
    }
    if (sequences.empty()) throw InputError("no words selected from '" + o.ocr + "'");
  } else {
    sequences = read_file(o.sequences,
                          [](std::istream& in) { return read_observation_sequences(in); });
    check_dimensions(model, sequences.front().front().dim(), o.sequences);
    for (std::size_t i = 0; i < sequences.size(); ++i) ids.push_back(std::to_string(i));
  }

  out << "sequence\tlabels\tscore\tprobability\n";
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const DecodeResult r = viterbi(model, sequences[i]);
    out << ids[i] << '\t' << join_labels(model.alphabet(), r.labels) << '\t'
        << format_double(r.score) << '\t' << format_double(r.probability) << '\n';
  }
  return kExitOk;
}

struct CalibrateOptions {
  std::string scores;
  std::string model;
  std::string self;
  std::string nonself;
};

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out) {
  std::vector<double> self;
  std::vector<double> nonself;
  if (!o.scores.empty()) {
    ScoreSets sets = read_file(o.scores, [](std::istream& in) { return read_score_file(in); });
    self = std::move(sets.self);
    nonself = std::move(sets.nonself);
  } else {
    if (o.model.empty() || o.self.empty() || o.nonself.empty()) {
      throw InputError("calibrate needs --scores, or --model with --self and --nonself");
    }
    require_file(o.model);
    const NeuroCrfModel model = read_model_file(o.model);
    auto score_file = [&](const std::string& path, std::vector<double>& dest) {
      const auto sequences =
          read_file(path, [](std::istream& in) { return read_observation_sequences(in); });
      for (const auto& seq : sequences) {
        check_dimensions(model, seq.front().dim(), path);
        dest.push_back(viterbi(model, seq).score);
      }
    };
    score_file(o.self, self);
    score_file(o.nonself, nonself);
  }
  CalibrationModel cal;
  const MetricsReport m = calibrate_scores(self, nonself, cal);
  out << "self " << self.size() << '\n' << "nonself " << nonself.size() << '\n';
  print_metrics(out, cal, m);
  return kExitOk;
}

struct OcrBenchmarkOptions {
  CommonOptions common;
  std::string ocr;
  std::vector<std::size_t> lengths;
  std::vector<std::string> words;
  std::size_t nonself_count = 100;
  std::string manifest;
  bool progress = false;
};

int cmd_benchmark_ocr(const OcrBenchmarkOptions& o, std::ostream& out, std::ostream& err) {
  const OcrCorpus corpus = load_ocr_file(o.ocr);
  ExperimentConfig config;
  config.architectures = o.common.architectures();
  config.iterations = o.common.iterations;
  config.base_seed = o.common.seed;
  config.hyper = o.common.hyper();
  config.workers = o.common.workers;
  config.nonself_count = o.nonself_count;
  config.word_lengths = o.lengths;
  config.words = o.words;
  if (!o.manifest.empty()) config.replay = load_manifest(o.manifest);

  ProgressSink progress;
  if (o.progress) progress = [&](const std::string& msg) { err << msg << '\n'; };
  const ResultsTable table = run_ocr_benchmark(corpus.words, config, progress);
  finish_benchmark(table, o.common, out, err);
  return kExitOk;
}

struct SessionBenchmarkOptions {
  CommonOptions common;
  std::string events;
  std::int64_t gap = kDefaultSessionGapSeconds;
  std::size_t min_length = 4;
  std::size_t max_length = 6;
  std::size_t min_sequences = 5;
  std::string manifest;
  bool progress = false;
};

void write_session_manifests(const fs::path& dir, const SessionCorpus& corpus,
                             const ExperimentConfig& config) {
  fs::create_directories(dir / "vocab");
  fs::create_directories(dir / "splits");
  for (std::size_t u = 0; u < corpus.users.size(); ++u) {
    const auto& user = corpus.users[u];
    std::string name;
    for (char c : user.user) name += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    {
      auto out = open_output((dir / "vocab" / (name + ".tsv")).string());
      build_user_experiment(corpus, u, config).vocab.write(out);
    }
    auto out = open_output((dir / "splits" / (name + ".tsv")).string());
    out << "set\tindex\tfirst_timestamp\tlabels\n";
    auto emit = [&](const char* set, const std::vector<EventSequence>& seqs) {
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        out << set << '\t' << i << '\t' << seqs[i].front().timestamp << '\t';
        const auto labels = labels_of(seqs[i]);
        for (std::size_t k = 0; k < labels.size(); ++k) out << (k ? " " : "") << labels[k];
        out << '\n';
      }
    };
    emit("train", user.train);
    emit("test", user.test);
  }
}

int cmd_benchmark_sessions(const SessionBenchmarkOptions& o, std::ostream& out,
                           std::ostream& err) {
  const auto events = load_events_file(o.events);
  ExperimentConfig config;
  config.architectures = o.common.architectures();
  config.iterations = o.common.iterations;
  config.base_seed = o.common.seed;
  config.hyper = o.common.hyper();
  config.workers = o.common.workers;
  config.session_gap_seconds = o.gap;
  config.min_session_length = o.min_length;
  config.max_session_length = o.max_length;
  config.min_sequences_per_user = o.min_sequences;
  if (!o.manifest.empty()) config.replay = load_manifest(o.manifest);

  ProgressSink progress;
  if (o.progress) progress = [&](const std::string& msg) { err << msg << '\n'; };
  const ResultsTable table = run_session_benchmark(events, config, progress);
  finish_benchmark(table, o.common, out, err);
  if (!o.common.out_dir.empty()) {
    write_session_manifests(o.common.out_dir, prepare_session_corpus(events, config), config);
  }
  return kExitOk;
}

struct StatsOptions {
  std::string ocr;
  std::string events;
  std::int64_t gap = kDefaultSessionGapSeconds;
};

int cmd_stats(const StatsOptions& o, std::ostream& out) {
  if (o.ocr.empty() == o.events.empty()) {
    throw InputError("stats needs exactly one of --ocr or --events");
  }
  if (!o.ocr.empty()) {
    const OcrCorpus corpus = load_ocr_file(o.ocr);
    out << "letters " << corpus.record_count << '\n'
        << "word_instances " << corpus.words.sequences.size() << '\n'
        << "distinct_words " << group_by_word(corpus.words).size() << '\n'
        << "length\twords\tinstances\n";
    for (const auto& row : word_length_table(corpus.words)) {
      out << row.length << '\t' << row.distinct_words << '\t' << row.instances << '\n';
    }
    return kExitOk;
  }

  const auto events = load_events_file(o.events);
  std::vector<Session> sessions;
  for (auto& [user, user_events] : group_by_user(events)) {
    auto s = segment_sessions(user_events, o.gap);
    sessions.insert(sessions.end(), std::make_move_iterator(s.begin()),
                    std::make_move_iterator(s.end()));
  }
  out << "events " << events.size() << '\n'
      << "sessions " << sessions.size() << '\n'
      << "length\tentropy\tsessions\tunique_labels\n";
  for (const auto& row : session_length_table(sessions)) {
    out << row.length << '\t' << (std::isnan(row.entropy) ? "-" : format_fixed(row.entropy, 4))
        << '\t' << row.sessions << '\t' << row.unique_labels << '\n';
  }
  std::vector<std::vector<std::string>> label_sequences;
  for (const auto& s : sessions) label_sequences.push_back(labels_of(s.events));
  out << "position\tentropy\n";
  for (std::size_t p = 0; p < 6; ++p) {
    bool reached = false;
    for (const auto& l : label_sequences) reached = reached || l.size() > p;
    out << p + 1 << '\t'
        << (reached ? format_fixed(label_entropy_at_position(label_sequences, p), 4) : "-")
        << '\n';
  }
  return kExitOk;
}

struct SynthOptions {
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t count = 0;
};

int cmd_synth_ocr(const SynthOptions& o, std::ostream& out) {
  SyntheticOcrSpec spec;
  if (o.seed_given) spec.seed = o.seed;
  if (o.count > 0) spec.instances_per_word = o.count;
  const auto records = synthetic_ocr_records(spec);
  auto file = open_output(o.out);
  write_ocr_records(file, records);
  out << records.size() << " letter records written to " << o.out << '\n';
  return kExitOk;
}

int cmd_synth_sessions(const SynthOptions& o, std::ostream& out) {
  SyntheticSessionSpec spec;
  if (o.seed_given) spec.seed = o.seed;
  if (o.count > 0) spec.users = o.count;
  const auto events = synthetic_session_events(spec);
  auto file = open_output(o.out);
  write_event_log(file, events);
  out << events.size() << " events written to " << o.out << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural conditional random fields for sequence authentication", "neurocrf"};
  app.require_subcommand(1);

  TrainOptions train_o;
  auto* train_cmd = app.add_subcommand("train", "Train one model and save it");
  add_single_arch(train_cmd, train_o.common);
  add_hyper_options(train_cmd, train_o.common);
  auto* train_ocr = train_cmd->add_option("--ocr", train_o.ocr, "OCR letter file");
  train_cmd->add_option("--word", train_o.word, "Word to model (with --ocr)")->needs(train_ocr);
  auto* train_seq =
      train_cmd->add_option("--sequences", train_o.sequences, "Labeled sequence file");
  train_ocr->excludes(train_seq);
  train_cmd->add_option("--model", train_o.model, "Output model file")->required();
  train_cmd->add_option("--report", train_o.report, "Write the train report as JSON");
  train_cmd->add_option("--trace", train_o.trace, "Write one JSON line per presented sequence");

  DecodeOptions decode_o;
  auto* decode_cmd = app.add_subcommand("decode", "Decode sequences with a saved model");
  decode_cmd->add_option("--model", decode_o.model, "Model file")->required();
  auto* dec_seq = decode_cmd->add_option("--sequences", decode_o.sequences,
                                         "Unlabeled sequence file");
  auto* dec_ocr = decode_cmd->add_option("--ocr", decode_o.ocr, "OCR letter file");
  decode_cmd->add_option("--word", decode_o.word, "Only decode this word (with --ocr)")
      ->needs(dec_ocr);
  dec_seq->excludes(dec_ocr);

  CalibrateOptions cal_o;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit a score threshold and report FRR/FAR");
  cal_cmd->add_option("--scores", cal_o.scores, "score,class file (class 1 self, 0 non-self)");
  cal_cmd->add_option("--model", cal_o.model, "Model used to score --self and --nonself");
  cal_cmd->add_option("--self", cal_o.self, "Unlabeled self sequences");
  cal_cmd->add_option("--nonself", cal_o.nonself, "Unlabeled non-self sequences");

  OcrBenchmarkOptions ocr_o;
  auto* ocr_cmd = app.add_subcommand("benchmark-ocr", "Per-word models on the OCR corpus");
  add_benchmark_options(ocr_cmd, ocr_o.common);
  ocr_cmd->add_option("--ocr", ocr_o.ocr, "OCR letter file")->required();
  ocr_cmd->add_option("--lengths", ocr_o.lengths, "Only words of these lengths")->delimiter(',');
  ocr_cmd->add_option("--words", ocr_o.words, "Only these words")->delimiter(',');
  ocr_cmd->add_option("--nonself-count", ocr_o.nonself_count, "Non-self test instances per word")
      ->capture_default_str();
  ocr_cmd->add_option("--manifest", ocr_o.manifest, "Re-run exactly the units of a seeds.csv");
  ocr_cmd->add_flag("--progress", ocr_o.progress, "Report finished units on stderr");

  SessionBenchmarkOptions ses_o;
  auto* ses_cmd = app.add_subcommand("benchmark-sessions", "Per-user models on an event log");
  add_benchmark_options(ses_cmd, ses_o.common);
  ses_cmd->add_option("--events", ses_o.events, "Event log (user,timestamp,label,text)")
      ->required();
  ses_cmd->add_option("--gap", ses_o.gap, "Session gap in seconds")->capture_default_str();
  ses_cmd->add_option("--min-length", ses_o.min_length, "Shortest kept session")
      ->capture_default_str();
  ses_cmd->add_option("--max-length", ses_o.max_length, "Sessions are truncated to this length")
      ->capture_default_str();
  ses_cmd->add_option("--min-sequences", ses_o.min_sequences, "Users with fewer are skipped")
      ->capture_default_str();
  ses_cmd->add_option("--manifest", ses_o.manifest, "Re-run exactly the units of a seeds.csv");
  ses_cmd->add_flag("--progress", ses_o.progress, "Report finished units on stderr");

  StatsOptions stats_o;
  auto* stats_cmd = app.add_subcommand("stats", "Corpus characteristics");
  stats_cmd->add_option("--ocr", stats_o.ocr, "OCR letter file: words per length");
  stats_cmd->add_option("--events", stats_o.events, "Event log: sessions per length, entropy");
  stats_cmd->add_option("--gap", stats_o.gap, "Session gap in seconds")->capture_default_str();

  SynthOptions synth_ocr_o;
  auto* synth_ocr_cmd = app.add_subcommand("synth-ocr", "Write a synthetic OCR letter file");
  synth_ocr_cmd->add_option("--out", synth_ocr_o.out, "Output file")->required();
  auto* so_seed = synth_ocr_cmd->add_option("--seed", synth_ocr_o.seed, "Generator seed");
  synth_ocr_cmd->add_option("--instances", synth_ocr_o.count, "Instances per word");

  SynthOptions synth_ses_o;
  auto* synth_ses_cmd = app.add_subcommand("synth-sessions", "Write a synthetic event log");
  synth_ses_cmd->add_option("--out", synth_ses_o.out, "Output file")->required();
  auto* ss_seed = synth_ses_cmd->add_option("--seed", synth_ses_o.seed, "Generator seed");
  synth_ses_cmd->add_option("--users", synth_ses_o.count, "Number of users");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'neurocrf " << sub->get_name() << " --help' for usage\n";
    } else {
      err << "run 'neurocrf --help' for usage\n";
    }
    return kExitInputError;
  }

  try {
    if (train_cmd->parsed()) {
      if (train_o.ocr.empty() && train_o.sequences.empty()) {
        throw InputError("train needs --ocr FILE --word WORD or --sequences FILE");
      }
      return cmd_train(train_o, out);
    }
    if (decode_cmd->parsed()) {
      if (decode_o.ocr.empty() && decode_o.sequences.empty()) {
        throw InputError("decode needs --sequences FILE or --ocr FILE");
      }
      return cmd_decode(decode_o, out);
    }
    if (cal_cmd->parsed()) return cmd_calibrate(cal_o, out);
    if (ocr_cmd->parsed()) return cmd_benchmark_ocr(ocr_o, out, err);
    if (ses_cmd->parsed()) return cmd_benchmark_sessions(ses_o, out, err);
    if (stats_cmd->parsed()) return cmd_stats(stats_o, out);
    if (synth_ocr_cmd->parsed()) {
      synth_ocr_o.seed_given = so_seed->count() > 0;
      return cmd_synth_ocr(synth_ocr_o, out);
    }
    if (synth_ses_cmd->parsed()) {
      synth_ses_o.seed_given = ss_seed->count() > 0;
      return cmd_synth_sessions(synth_ses_o, out);
    }
  } catch (const MismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const OcrStructureError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InsufficientDataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace neurocrf::cli
