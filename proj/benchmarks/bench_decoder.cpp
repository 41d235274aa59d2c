#include <benchmark/benchmark.h>

#include <random>

#include "neurocrf/decoder.hpp"
#include "neurocrf/ocr_data.hpp"
#include "neurocrf/synthetic.hpp"
#include "neurocrf/training.hpp"
#include "oracles.hpp"

using namespace neurocrf;

namespace {

void BM_Viterbi(benchmark::State& state, Architecture arch) {
  std::mt19937_64 rng(1);
  const auto labels = static_cast<std::size_t>(state.range(0));
  const auto model = oracle::random_model(arch, kOcrPixels, labels, 0.1, rng);
  const auto xs = oracle::random_observations(8, kOcrPixels, rng);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(model, xs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}

void BM_TrainWord(benchmark::State& state, Architecture arch) {
  SyntheticOcrSpec spec;
  spec.words = {"cat"};
  spec.instances_per_word = 20;
  const OcrCorpus corpus = assemble_words(synthetic_ocr_records(spec));
  TrainConfig config;
  config.architecture = arch;
  config.hyper.max_sgd_examples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(corpus.words, config, 3));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Viterbi, crf_mlp, Architecture::CrfMlp)->Arg(3)->Arg(26);
BENCHMARK_CAPTURE(BM_Viterbi, crf_rnn, Architecture::CrfRnn)->Arg(3)->Arg(26);
BENCHMARK_CAPTURE(BM_Viterbi, crf_prcpt, Architecture::CrfPerceptron)->Arg(3)->Arg(26);
BENCHMARK_CAPTURE(BM_TrainWord, crf_mlp, Architecture::CrfMlp)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainWord, crf_rnn, Architecture::CrfRnn)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainWord, crf_prcpt, Architecture::CrfPerceptron)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
