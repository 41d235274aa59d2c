#include "doctest.h"

#include <random>
#include <sstream>

#include "neurocrf/decoder.hpp"
#include "neurocrf/model.hpp"
#include "oracles.hpp"

using namespace neurocrf;

TEST_CASE("models round-trip through the text format bit for bit") {
  std::mt19937_64 rng(12);
  for (auto arch : {Architecture::CrfMlp, Architecture::CrfRnn, Architecture::CrfPerceptron}) {
    CAPTURE(to_string(arch));
    const NeuroCrfModel model = oracle::random_model(arch, 5, 3, 0.7, rng);
    std::stringstream buf;
    save_model(model, buf);
    const NeuroCrfModel loaded = load_model(buf);
    CHECK(loaded == model);
    CHECK(loaded.alphabet() == model.alphabet());
    CHECK(loaded.descriptor().hidden_size == model.descriptor().hidden_size);

    std::stringstream again;
    save_model(loaded, again);
    CHECK(again.str() == buf.str());

    const auto xs = oracle::random_observations(4, 5, rng);
    CHECK(viterbi(loaded, xs).score == viterbi(model, xs).score);
  }
}

TEST_CASE("load_model reports the offending line") {
  std::mt19937_64 rng(1);
  const NeuroCrfModel model = oracle::random_model(Architecture::CrfPerceptron, 2, 2, 0.1, rng);
  std::stringstream buf;
  save_model(model, buf);
  const std::string text = buf.str();

  SUBCASE("bad header") {
    std::istringstream in("not-a-model\n");
    CHECK_THROWS_AS(load_model(in), ParseError);
  }
  SUBCASE("truncated file") {
    std::istringstream in(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_model(in), ParseError);
  }
  SUBCASE("corrupt number") {
    std::string bad = text;
    const auto pos = bad.find("\nw ");
    REQUIRE(pos != std::string::npos);
    bad.insert(pos + 3, "zz");
    std::istringstream in(bad);
    try {
      load_model(in);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() > 0);
    }
  }
}

TEST_CASE("model construction validates the networks against the descriptor") {
  const auto desc = make_descriptor(Architecture::CrfMlp, 4, 2);
  CHECK_THROWS(NeuroCrfModel(desc, LabelAlphabet({"a", "b", "c"}), init_weights(desc, 1)));
  CHECK_THROWS(NeuroCrfModel(desc, LabelAlphabet({"a", "b"}),
                             init_weights(make_descriptor(Architecture::CrfRnn, 4, 2), 1)));
  CHECK_NOTHROW(NeuroCrfModel(desc, LabelAlphabet({"a", "b"}), init_weights(desc, 1)));
}
