#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "neurocrf/session_data.hpp"
#include "neurocrf/synthetic.hpp"

using namespace neurocrf;

namespace {

const std::string kFixtures = NEUROCRF_FIXTURE_DIR;

SessionEvent ev(std::int64_t t, std::string label = "x", std::string text = "") {
  return SessionEvent{"u", t, std::move(label), std::move(text)};
}

std::vector<EventSequence> sequences_starting_at(std::size_t n) {
  std::vector<EventSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({ev(static_cast<std::int64_t>(1000 * (n - i)), "l" + std::to_string(i))});
  }
  return out;
}

}  // namespace

TEST_CASE("session gaps") {
  SUBCASE("thirty minutes joins, sixty-one splits") {
    const auto sessions = segment_sessions({ev(0), ev(1800), ev(1800 + 3660)});
    REQUIRE(sessions.size() == 2);
    CHECK(sessions[0].events.size() == 2);
    CHECK(sessions[1].events.size() == 1);
  }
  SUBCASE("exactly one hour stays in the session") {
    CHECK(segment_sessions({ev(0), ev(3600)}).size() == 1);
    CHECK(segment_sessions({ev(0), ev(3601)}).size() == 2);
  }
  SUBCASE("unsorted input is ordered first") {
    const auto sessions = segment_sessions({ev(5000), ev(0), ev(100)});
    REQUIRE(sessions.size() == 2);
    CHECK(sessions[0].events[1].timestamp == 100);
  }
  SUBCASE("re-segmenting a session yields the same session") {
    const auto sessions = segment_sessions({ev(0), ev(900), ev(2000), ev(9000), ev(9100)});
    for (const auto& s : sessions) {
      const auto again = segment_sessions(s.events);
      REQUIRE(again.size() == 1);
      CHECK(again[0].events == s.events);
    }
  }
}

TEST_CASE("length filter and truncation") {
  std::vector<Session> sessions;
  for (std::size_t len : {3u, 4u, 6u, 9u}) {
    Session s{"u", {}};
    for (std::size_t i = 0; i < len; ++i) s.events.push_back(ev(static_cast<std::int64_t>(i)));
    sessions.push_back(s);
  }
  const auto seqs = sessions_to_sequences(sessions);
  REQUIRE(seqs.size() == 3);
  CHECK(seqs[0].size() == 4);
  CHECK(seqs[1].size() == 6);
  CHECK(seqs[2].size() == 6);
  CHECK(seqs[2].back().timestamp == 5);
  for (const auto& s : seqs) {
    CHECK(s.size() >= 4);
    CHECK(s.size() <= 6);
  }
  CHECK_THROWS_AS(sessions_to_sequences(sessions, 5, 4), std::invalid_argument);
}

TEST_CASE("n-gram extraction") {
  const auto grams = extract_ngrams("  Big  dog\tRuns ");
  CHECK(grams == std::vector<std::string>{"big", "dog", "runs", "big dog", "dog runs"});
  CHECK(extract_ngrams("").empty());
  CHECK(extract_ngrams("solo") == std::vector<std::string>{"solo"});
}

TEST_CASE("vocabulary keeps the most frequent n-grams with lexicographic ties") {
  std::vector<SessionEvent> events;
  for (int i = 0; i < 3; ++i) events.push_back(ev(i, "a", "zeta"));
  events.push_back(ev(10, "a", "beta"));
  events.push_back(ev(11, "a", "alpha"));
  events.push_back(ev(12, "b", "alpha"));
  const auto vocab = build_ngram_vocab(events, 1, 1, 2);
  CHECK(vocab.per_label().at("a") == std::vector<std::string>{"zeta", "alpha"});
  CHECK(vocab.per_label().at("b") == std::vector<std::string>{"alpha"});
  CHECK(vocab.size() == 2);  // shared n-grams get one index
  CHECK(vocab.index_of("zeta") == 0);
  CHECK(vocab.index_of("alpha") == 1);
  CHECK(vocab.index_of("beta") == -1);

  SUBCASE("at most the cap per label") {
    std::vector<SessionEvent> many;
    for (int i = 0; i < 150; ++i) many.push_back(ev(i, "a", "w" + std::to_string(i)));
    const auto capped = build_ngram_vocab(many);
    CHECK(capped.per_label().at("a").size() == 100);
  }
  SUBCASE("deterministic indices and text form") {
    std::vector<SessionEvent> shuffled(events.rbegin(), events.rend());
    std::ostringstream a;
    std::ostringstream b;
    vocab.write(a);
    build_ngram_vocab(shuffled, 1, 1, 2).write(b);
    CHECK(a.str() == b.str());
  }
}

TEST_CASE("calendar bins") {
  // 1970-01-05 was a Monday.
  const std::int64_t monday_0030 = 4 * 86400 + 1800;
  CHECK(day_of_week(monday_0030) == 0);
  CHECK(hour_of_day(monday_0030) == 0);
  CHECK(day_of_week(0) == 3);
  CHECK(day_of_week(monday_0030 + 6 * 86400) == 6);
  CHECK(hour_of_day(86399) == 23);
  CHECK(day_of_week(-1) == 2);
  CHECK(hour_of_day(-1) == 23);
}

TEST_CASE("featurize_event") {
  std::vector<SessionEvent> training{ev(0, "a", "red fox"), ev(1, "b", "blue sky")};
  const auto vocab = build_ngram_vocab(training);
  CHECK(session_feature_dim(vocab) == 31 + vocab.size());

  const std::int64_t monday_0030 = 4 * 86400 + 1800;
  const auto plain = featurize_event(ev(monday_0030, "a", "nothing known"), vocab);
  REQUIRE(plain.dim() == session_feature_dim(vocab));
  double total = 0;
  for (double v : plain.values()) total += v;
  CHECK(total == 2.0);
  CHECK(plain[0] == 1.0);
  CHECK(plain[kHourBins] == 1.0);

  const auto rich = featurize_event(ev(monday_0030, "a", "Red fox"), vocab);
  total = 0;
  for (double v : rich.values()) total += v;
  CHECK(total == 5.0);  // red, fox, "red fox"
  CHECK(rich[31 + static_cast<std::size_t>(vocab.index_of("red fox"))] == 1.0);
}

TEST_CASE("temporal split") {
  SUBCASE("ten gives nine and one") {
    const auto [train, test] = temporal_split(sequences_starting_at(10));
    CHECK(train.size() == 9);
    CHECK(test.size() == 1);
    CHECK(test[0][0].timestamp == 10000);
    for (const auto& s : train) CHECK(s[0].timestamp < test[0][0].timestamp);
  }
  SUBCASE("twenty gives eighteen and two") {
    const auto [train, test] = temporal_split(sequences_starting_at(20));
    CHECK(train.size() == 18);
    CHECK(test.size() == 2);
  }
  SUBCASE("small inputs keep a test sequence") {
    const auto [train, test] = temporal_split(sequences_starting_at(3));
    CHECK(train.size() == 2);
    CHECK(test.size() == 1);
  }
  SUBCASE("equal timestamps keep input order") {
    std::vector<EventSequence> same;
    for (int i = 0; i < 4; ++i) same.push_back({ev(7, "l" + std::to_string(i))});
    const auto [train, test] = temporal_split(same);
    CHECK(train[0][0].label == "l0");
    CHECK(test[0][0].label == "l3");
  }
  CHECK_THROWS_AS(temporal_split(sequences_starting_at(1)), InsufficientDataError);
  CHECK_THROWS_AS(temporal_split(sequences_starting_at(4), 1.0), std::invalid_argument);
}

TEST_CASE("entropy") {
  for (std::size_t k = 1; k <= 12; ++k) {
    std::vector<std::vector<std::string>> seqs;
    for (std::size_t i = 0; i < k; ++i) seqs.push_back({"l" + std::to_string(i), "same"});
    CHECK(std::fabs(label_entropy_at_position(seqs, 0) - std::log2(static_cast<double>(k))) < 1e-9);
    CHECK(label_entropy_at_position(seqs, 1) == 0.0);
  }
  const std::vector<std::vector<std::string>> mixed{{"a", "b"}, {"c"}};
  CHECK(label_entropy_for_length(mixed, 2) == doctest::Approx(1.0));
  CHECK(label_entropy_for_length(mixed, 1) == 0.0);
  CHECK_THROWS_AS(label_entropy_at_position(mixed, 5), std::invalid_argument);
  CHECK(shannon_entropy({{"a", 1}, {"b", 3}}) ==
        doctest::Approx(-(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75))));
}

TEST_CASE("session length table") {
  std::vector<Session> sessions;
  sessions.push_back({"u", {ev(0, "a"), ev(1, "b")}});
  sessions.push_back({"u", {ev(0, "a"), ev(1, "a")}});
  Session longer{"u", {}};
  for (int i = 0; i < 8; ++i) longer.events.push_back(ev(i, "z"));
  sessions.push_back(longer);
  const auto rows = session_length_table(sessions);
  REQUIRE(rows.size() == 7);
  CHECK(rows[1].length == "2");
  CHECK(rows[1].sessions == 2);
  CHECK(rows[1].unique_labels == 2);
  CHECK(rows[1].entropy == doctest::Approx(-(0.75 * std::log2(0.75) + 0.25 * std::log2(0.25))));
  CHECK(rows[0].sessions == 0);
  CHECK(rows[6].length == ">6");
  CHECK(rows[6].sessions == 1);
}

TEST_CASE("event log CSV") {
  SUBCASE("fixture") {
    const auto events = load_event_log(kFixtures + "/sessions.csv");
    REQUIRE(events.size() == 5);
    CHECK(events[1].text == "A dog, a good dog");
    const auto users = group_by_user(events);
    REQUIRE(users.size() == 2);
    const auto alice = segment_sessions(users.at("alice"));
    REQUIRE(alice.size() == 2);
    CHECK(alice[0].events.size() == 3);
    CHECK(alice[1].events.size() == 1);
  }
  SUBCASE("quotes round trip") {
    const std::vector<SessionEvent> events{{"u", 5, "r/x", "say \"hi\", ok"}, {"v", 6, "r/y", ""}};
    std::stringstream buf;
    write_event_log(buf, events);
    CHECK(read_event_log(buf) == events);
  }
  SUBCASE("malformed") {
    std::stringstream bad_ts("u,later,r/x,t\n");
    CHECK_THROWS_AS(read_event_log(bad_ts), ParseError);
    std::stringstream unterminated("user,timestamp,label,text\nu,1,r/x,\"open\n");
    try {
      read_event_log(unterminated);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::stringstream too_few("u,1,r/x\n");
    CHECK_THROWS_AS(read_event_log(too_few), ParseError);
  }
}

TEST_CASE("labeled sequences from events") {
  const auto events = synthetic_session_events({});
  const auto users = group_by_user(events);
  CHECK(users.size() == 5);
  const auto& first = users.begin()->second;
  const auto vocab = build_ngram_vocab(first);
  std::set<std::string> names;
  for (const auto& e : events) names.insert(e.label);
  const LabelAlphabet alphabet(std::vector<std::string>(names.begin(), names.end()));
  const EventSequence seq(first.begin(), first.begin() + 4);
  const auto labeled = to_labeled_sequence(seq, vocab, alphabet, "id");
  CHECK(labeled.observations.size() == 4);
  CHECK(labeled.observations[0].dim() == session_feature_dim(vocab));
  CHECK(alphabet.name(labeled.labels[2]) == seq[2].label);
}
