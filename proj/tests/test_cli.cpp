#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "neurocrf/decoder.hpp"
#include "neurocrf/model.hpp"
#include "neurocrf/numeric_text.hpp"
#include "neurocrf_cli/cli.hpp"
#include "neurocrf_cli/sequence_file.hpp"

using namespace neurocrf;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = NEUROCRF_FIXTURE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::vector<double> vec(const Observation& x) { return {x.values().begin(), x.values().end()}; }

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, '\t')) out.push_back(field);
  return out;
}

}  // namespace

TEST_CASE("sequence files") {
  std::ifstream obs(kFixtures + "/observations.txt");
  const auto seqs = cli::read_observation_sequences(obs);
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].size() == 2);
  CHECK(seqs[1].size() == 3);
  CHECK(vec(seqs[1][1]) == std::vector<double>{1, 1, 1});

  std::stringstream round;
  cli::write_observation_sequences(round, seqs);
  const auto back = cli::read_observation_sequences(round);
  REQUIRE(back.size() == 2);
  CHECK(vec(back[1][2]) == vec(seqs[1][2]));

  std::ifstream lab(kFixtures + "/labeled.txt");
  const auto dataset = cli::to_dataset(cli::read_labeled_sequences(lab));
  CHECK(dataset.alphabet.labels() == std::vector<std::string>{"x", "y"});
  CHECK(dataset.sequences.size() == 2);
  CHECK(dataset.sequences[0].labels == std::vector<LabelIndex>{0, 1, 0});

  std::stringstream bad("1 0\n0 2\n");
  try {
    cli::read_observation_sequences(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::stringstream ragged("1 0\n0 1 1\n");
  CHECK_THROWS_AS(cli::read_observation_sequences(ragged), ParseError);

  std::stringstream scores("score,class\n2,1\n3,1\n0,0\n1\t0\n");
  const auto sets = cli::read_score_file(scores);
  CHECK(sets.self == std::vector<double>{2, 3});
  CHECK(sets.nonself == std::vector<double>{0, 1});
}

TEST_CASE("exit codes and diagnostics") {
  TempDir tmp("neurocrf_cli_errors");
  const std::string missing = tmp.file("nowhere.txt");

  auto r = run({"decode", "--model", missing, "--sequences", kFixtures + "/observations.txt"});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find(missing) != std::string::npos);

  r = run({"train", "--sequences", missing, "--model", tmp.file("m.txt")});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find(missing) != std::string::npos);

  r = run({"train", "--arch", "crf-bogus", "--sequences", kFixtures + "/labeled.txt", "--model",
           tmp.file("m.txt")});
  CHECK(r.code == cli::kExitInputError);

  r = run({"no-such-command"});
  CHECK(r.code == cli::kExitInputError);

  write_text(tmp.file("bad.txt"), "x 1 0\ny 1 q\n");
  r = run({"train", "--sequences", tmp.file("bad.txt"), "--model", tmp.file("m.txt")});
  CHECK(r.code == cli::kExitInputError);
  CHECK(r.err.find("bad.txt") != std::string::npos);

  // A model of dimension 2 cannot decode 3-dimensional observations.
  r = run({"train", "--sequences", kFixtures + "/labeled.txt", "--model", tmp.file("m.txt")});
  REQUIRE(r.code == cli::kExitOk);
  r = run({"decode", "--model", tmp.file("m.txt"), "--sequences", kFixtures + "/observations.txt"});
  CHECK(r.code == cli::kExitMismatch);

  write_text(tmp.file("corrupt_model.txt"), "garbage\n");
  r = run({"decode", "--model", tmp.file("corrupt_model.txt"), "--sequences",
           kFixtures + "/observations.txt"});
  CHECK(r.code == cli::kExitInputError);

  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("train then decode agrees with the library") {
  TempDir tmp("neurocrf_cli_decode");
  for (const char* arch : {"crf-mlp", "crf-rnn", "crf-prcpt"}) {
    CAPTURE(arch);
    const std::string model_path = tmp.file(std::string(arch) + ".model");
    auto r = run({"train", "--arch", arch, "--seed", "17", "--sequences", kFixtures + "/labeled.txt",
                  "--model", model_path, "--report", tmp.file("report.json"), "--trace",
                  tmp.file("trace.jsonl")});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("\"converged\"") != std::string::npos);
    CHECK(slurp(tmp.file("trace.jsonl")).find("\"token_errors\"") != std::string::npos);

    write_text(tmp.file("obs.txt"), "1 0\n0 1\n\n0 1\n0 1\n1 0\n");
    r = run({"decode", "--model", model_path, "--sequences", tmp.file("obs.txt")});
    REQUIRE(r.code == cli::kExitOk);

    std::ifstream model_in(model_path);
    const NeuroCrfModel model = load_model(model_in);
    std::ifstream obs_in(tmp.file("obs.txt"));
    const auto seqs = cli::read_observation_sequences(obs_in);

    std::stringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "sequence\tlabels\tscore\tprobability");
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      REQUIRE(std::getline(lines, line));
      const auto fields = split_tabs(line);
      REQUIRE(fields.size() == 4);
      const auto expected = viterbi(model, seqs[i]);
      CHECK(parse_double(fields[2]) == expected.score);
      const double p = parse_double(fields[3]);
      CHECK(p == expected.probability);
      CHECK(p > 0.0);
      CHECK(p <= 1.0);
      std::string labels;
      for (auto l : expected.labels) labels += (labels.empty() ? "" : " ") + model.alphabet().name(l);
      CHECK(fields[1] == labels);
    }
  }
}

TEST_CASE("a repeated seed writes identical model files") {
  TempDir tmp("neurocrf_cli_seed");
  for (const char* name : {"a.model", "b.model"}) {
    REQUIRE(run({"train", "--seed", "99", "--sequences", kFixtures + "/labeled.txt", "--model",
                 tmp.file(name)})
                .code == cli::kExitOk);
  }
  CHECK(slurp(tmp.file("a.model")) == slurp(tmp.file("b.model")));
  REQUIRE(run({"train", "--seed", "100", "--sequences", kFixtures + "/labeled.txt", "--model",
               tmp.file("c.model")})
              .code == cli::kExitOk);
  CHECK(slurp(tmp.file("a.model")) != slurp(tmp.file("c.model")));
}

TEST_CASE("calibrate") {
  TempDir tmp("neurocrf_cli_calibrate");
  write_text(tmp.file("scores.csv"), "score,class\n2,1\n3,1\n0,0\n1,0\n");
  auto r = run({"calibrate", "--scores", tmp.file("scores.csv")});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("threshold 1.5") != std::string::npos);
  CHECK(r.out.find("frr 0") != std::string::npos);
  CHECK(r.out.find("far 0") != std::string::npos);

  write_text(tmp.file("one_class.csv"), "2,1\n3,1\n");
  CHECK(run({"calibrate", "--scores", tmp.file("one_class.csv")}).code == cli::kExitInputError);

  REQUIRE(run({"train", "--sequences", kFixtures + "/labeled.txt", "--model", tmp.file("m")}).code ==
          cli::kExitOk);
  write_text(tmp.file("self.txt"), "1 0\n0 1\n\n1 0\n");
  write_text(tmp.file("other.txt"), "0 0\n0 0\n\n0 1\n");
  r = run({"calibrate", "--model", tmp.file("m"), "--self", tmp.file("self.txt"), "--nonself",
           tmp.file("other.txt")});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("self 2") != std::string::npos);
}

TEST_CASE("stats and benchmarks") {
  TempDir tmp("neurocrf_cli_bench");
  auto r = run({"stats", "--ocr", kFixtures + "/two_words.tsv"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("word_instances 2") != std::string::npos);

  r = run({"stats", "--events", kFixtures + "/sessions.csv"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("sessions 3") != std::string::npos);

  REQUIRE(run({"synth-ocr", "--out", tmp.file("ocr.tsv"), "--instances", "9"}).code == cli::kExitOk);
  r = run({"benchmark-ocr", "--ocr", tmp.file("ocr.tsv"), "--words", "cat", "--iterations", "1",
           "--max-examples", "30", "--out-dir", tmp.file("ocr_out"), "--workers", "1"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(fs::exists(tmp.file("ocr_out") + "/results.csv"));
  CHECK(fs::exists(tmp.file("ocr_out") + "/seeds.csv"));

  r = run({"benchmark-ocr", "--ocr", tmp.file("ocr.tsv"), "--manifest",
           tmp.file("ocr_out") + "/seeds.csv", "--max-examples", "30", "--out-dir",
           tmp.file("ocr_replay")});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(slurp(tmp.file("ocr_out") + "/results.csv") == slurp(tmp.file("ocr_replay") + "/results.csv"));

  REQUIRE(run({"synth-sessions", "--out", tmp.file("events.csv"), "--users", "3"}).code ==
          cli::kExitOk);
  r = run({"benchmark-sessions", "--events", tmp.file("events.csv"), "--arch", "crf-prcpt",
           "--iterations", "1", "--max-examples", "30", "--out-dir", tmp.file("ses_out")});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(fs::exists(tmp.file("ses_out") + "/aggregate.csv"));
  CHECK(fs::is_directory(tmp.file("ses_out") + "/splits"));
  CHECK(fs::is_directory(tmp.file("ses_out") + "/vocab"));
}
