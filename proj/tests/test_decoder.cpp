#include "doctest.h"

#include <cmath>
#include <random>

#include "neurocrf/decoder.hpp"
#include "oracles.hpp"

using namespace neurocrf;

namespace {

constexpr Architecture kArchs[] = {Architecture::CrfMlp, Architecture::CrfRnn,
                                   Architecture::CrfPerceptron};

NeuroCrfModel zero_model(Architecture arch, std::size_t d, std::size_t k) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back(std::string(1, static_cast<char>('a' + i)));
  const auto desc = make_descriptor(arch, d, k);
  Networks nets = init_weights(desc, 0);
  std::visit(
      [](auto& n) {
        using T = std::decay_t<decltype(n)>;
        auto clear = [](DenseLayer& l) {
          std::fill(l.weights.begin(), l.weights.end(), 0.0);
          std::fill(l.bias.begin(), l.bias.end(), 0.0);
        };
        if constexpr (std::is_same_v<T, CrfMlpNets>) {
          clear(n.observation.hidden);
          clear(n.observation.output);
          clear(n.edge.hidden);
          clear(n.edge.output);
        } else if constexpr (std::is_same_v<T, CrfRnnNets>) {
          clear(n.elman.net.hidden);
          clear(n.elman.net.output);
        } else {
          clear(n.perceptron.output);
        }
      },
      nets);
  return NeuroCrfModel(desc, LabelAlphabet(names), std::move(nets));
}

}  // namespace

TEST_CASE("step scores") {
  SUBCASE("zero CRF-MLP scores zero for every predecessor") {
    const auto model = zero_model(Architecture::CrfMlp, 3, 3);
    const Observation x({1, 0, 1});
    for (LabelIndex prev = 0; prev <= 3; ++prev) {
      for (double s : step_scores(model, x, prev, initial_state(model))) CHECK(s == 0.0);
    }
  }
  SUBCASE("CRF-MLP with one-unit nets is the sum of both forwards") {
    auto model = zero_model(Architecture::CrfMlp, 1, 1);
    auto& nets = std::get<CrfMlpNets>(model.networks());
    REQUIRE(nets.observation.n_hidden() == 1);
    nets.observation.hidden.weight(0, 0) = 1.0;
    nets.observation.output.weight(0, 0) = 2.0;
    nets.edge.hidden.weight(0, 1) = -1.0;  // START slot
    nets.edge.output.weight(0, 0) = 3.0;
    nets.edge.output.bias[0] = 0.5;
    const double obs = 2.0 / (1.0 + std::exp(-1.0));
    const double edge = 3.0 / (1.0 + std::exp(1.0)) + 0.5;
    const auto s = step_scores(model, Observation({1}), 1, initial_state(model));
    CHECK(s[0] == doctest::Approx(obs + edge).epsilon(1e-14));
  }
  SUBCASE("CRF-RNN ignores the predecessor") {
    std::mt19937_64 rng(4);
    const auto model = oracle::random_model(Architecture::CrfRnn, 4, 3, 0.5, rng);
    const Observation x({1, 1, 0, 1});
    const auto base = step_scores(model, x, 3, initial_state(model));
    for (LabelIndex prev = 0; prev < 3; ++prev) {
      CHECK(step_scores(model, x, prev, initial_state(model)) == base);
    }
  }
  SUBCASE("invalid predecessor") {
    const auto model = zero_model(Architecture::CrfMlp, 2, 2);
    CHECK_THROWS_AS(step_scores(model, Observation({1, 0}), 3, initial_state(model)),
                    std::invalid_argument);
  }
}

TEST_CASE("forward_step picks the best predecessor, ties to the lowest index") {
  const auto model = zero_model(Architecture::CrfMlp, 1, 2);
  const Observation x({1});
  const auto state = initial_state(model);

  const std::vector<AlphaEntry> prev{{0, 2, 0.0}, {1, 2, 10.0}};
  const auto col = forward_step(model, x, prev, state);
  REQUIRE(col.size() == 2);
  for (const auto& e : col) {
    CHECK(e.from == 1);
    CHECK(e.score == 10.0);
  }

  const std::vector<AlphaEntry> tied{{0, 2, 5.0}, {1, 2, 5.0}};
  for (const auto& e : forward_step(model, x, tied, state)) CHECK(e.from == 0);
}

TEST_CASE("forward_step matches an exhaustive max over predecessors") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = oracle::random_model(Architecture::CrfPerceptron, 3, 3, 1.0, rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<AlphaEntry> prev;
    for (LabelIndex l = 0; l < 3; ++l) prev.push_back({l, 3, normal(rng)});
    const auto xs = oracle::random_observations(1, 3, rng);
    const auto col = forward_step(model, xs[0], prev, initial_state(model));
    for (LabelIndex to = 0; to < 3; ++to) {
      double best = -INFINITY;
      for (LabelIndex from = 0; from < 3; ++from) {
        const auto s = step_scores(model, xs[0], from, initial_state(model));
        best = std::max(best, prev[static_cast<std::size_t>(from)].score + s[static_cast<std::size_t>(to)]);
      }
      CHECK(col[static_cast<std::size_t>(to)].score == doctest::Approx(best).epsilon(1e-14));
    }
  }
}

TEST_CASE("viterbi equals brute-force enumeration") {
  std::mt19937_64 rng(2718);
  for (auto arch : kArchs) {
    CAPTURE(to_string(arch));
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t k = 1 + rng() % 5;
      const std::size_t n = 1 + rng() % 5;
      const std::size_t d = 1 + rng() % 4;
      const auto model = oracle::random_model(arch, d, k, 0.5, rng);
      const auto xs = oracle::random_observations(n, d, rng);
      AlphaTable table;
      const auto result = viterbi(model, xs, table);
      const auto brute = oracle::brute_force(model, xs);
      CHECK(std::fabs(result.score - brute.best_score) <= 1e-9);
      CHECK(std::fabs(oracle::path_score(model, xs, result.labels) - result.score) <= 1e-9);
      CHECK(result.labels.size() == n);
      CHECK(result.probability > 0.0);
      CHECK(result.probability <= 1.0);
      REQUIRE(table.steps.size() == n);
      for (const auto& e : table.steps[0]) CHECK(e.from == static_cast<LabelIndex>(k));
    }
  }
}

TEST_CASE("viterbi on the 3-label, length-4 case covers all 81 paths") {
  std::mt19937_64 rng(81);
  const auto model = oracle::random_model(Architecture::CrfMlp, 3, 3, 1.0, rng);
  const auto xs = oracle::random_observations(4, 3, rng);
  const auto brute = oracle::brute_force(model, xs);
  const auto result = viterbi(model, xs);
  CHECK(std::fabs(result.score - brute.best_score) <= 1e-9);
}

TEST_CASE("CRF-RNN decodes to the per-step argmax") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto model = oracle::random_model(Architecture::CrfRnn, 3, 4, 1.0, rng);
    const auto xs = oracle::random_observations(5, 3, rng);
    const auto result = viterbi(model, xs);
    auto state = initial_state(model);
    for (std::size_t t = 0; t < xs.size(); ++t) {
      const auto s = step_scores(model, xs[t], 4, state);
      const auto best = std::max_element(s.begin(), s.end()) - s.begin();
      CHECK(result.labels[t] == best);
      state = advance_state(model, xs[t], state);
    }
  }
}

TEST_CASE("single step and single label") {
  std::mt19937_64 rng(3);
  const auto model = oracle::random_model(Architecture::CrfPerceptron, 2, 3, 1.0, rng);
  const auto xs = oracle::random_observations(1, 2, rng);
  const auto s = step_scores(model, xs[0], 3, initial_state(model));
  const auto best = std::max_element(s.begin(), s.end()) - s.begin();
  const auto result = viterbi(model, xs);
  CHECK(result.labels[0] == best);
  double z = 0.0;
  for (double v : s) z += std::exp(v - s[static_cast<std::size_t>(best)]);
  CHECK(result.probability == doctest::Approx(1.0 / z).epsilon(1e-12));

  const auto single = oracle::random_model(Architecture::CrfMlp, 2, 1, 1.0, rng);
  CHECK(viterbi(single, oracle::random_observations(3, 2, rng)).probability == 1.0);
}

TEST_CASE("sequence_probability") {
  const std::vector<AlphaEntry> uniform{{0, 0, 2.0}, {1, 0, 2.0}, {2, 0, 2.0}, {3, 0, 2.0}};
  CHECK(sequence_probability(uniform, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
  const std::vector<AlphaEntry> two{{0, 0, 0.0}, {1, 0, std::log(3.0)}};
  CHECK(sequence_probability(two, std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  const std::vector<AlphaEntry> huge{{0, 0, 1e6}, {1, 0, 1e6 - 1.0}};
  const double p = sequence_probability(huge, 1e6);
  CHECK(std::isfinite(p));
  CHECK(p == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));

  SUBCASE("shift invariance") {
    const std::vector<AlphaEntry> a{{0, 0, -1.0}, {1, 0, 0.5}, {2, 0, 0.25}};
    std::vector<AlphaEntry> b = a;
    for (auto& e : b) e.score += 123.0;
    CHECK(sequence_probability(a, 0.5) == doctest::Approx(sequence_probability(b, 123.5)));
  }
}

TEST_CASE("a constant added to every perceptron step score shifts the path score by n*c") {
  std::mt19937_64 rng(55);
  auto model = oracle::random_model(Architecture::CrfPerceptron, 3, 3, 1.0, rng);
  const auto xs = oracle::random_observations(4, 3, rng);
  const auto before = viterbi(model, xs);
  auto& net = std::get<CrfPerceptronNets>(model.networks()).perceptron;
  for (double& b : net.output.bias) b += 2.5;
  const auto after = viterbi(model, xs);
  CHECK(after.labels == before.labels);
  CHECK(after.score == doctest::Approx(before.score + 4 * 2.5).epsilon(1e-12));
  CHECK(after.probability == doctest::Approx(before.probability).epsilon(1e-12));
}

TEST_CASE("viterbi rejects empty and mismatched input") {
  const auto model = zero_model(Architecture::CrfMlp, 3, 2);
  CHECK_THROWS_AS(viterbi(model, std::vector<Observation>{}), std::invalid_argument);
  CHECK_THROWS_AS(viterbi(model, std::vector<Observation>{Observation({1, 0})}),
                  DimensionMismatch);
}
