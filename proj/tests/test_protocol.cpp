#include <doctest.h>

#include <limits>
#include <random>

#include "test_support.hpp"
#include "uapr/oracle.hpp"
#include "uapr/protocol.hpp"
#include "uapr/synth.hpp"

using namespace uapr;
using namespace uapr::protocol;

namespace {

MethodConfig standard() { return MethodConfig{}; }

ProtocolConfig batch_config(double radius = kBatchRevisitRadius, std::size_t k = 3) {
  ProtocolConfig c = ProtocolConfig::batch_defaults();
  c.revisit_radius = radius;
  c.top_k = k;
  return c;
}

ProtocolConfig session_config(double exclusion = kSessionExclusionWindow, std::size_t k = 3) {
  ProtocolConfig c = ProtocolConfig::session_defaults();
  c.exclusion_window = exclusion;
  c.top_k = k;
  return c;
}

/// Entries at t = 0, 100, 200, 290 s. Entry 2 revisits entry 0; entry 3 is in
/// an area never seen before.
DescriptorSet timeline() {
  return validate_set(test::plain_set({{1, 0, 0}, {0, 1, 0}, {0.95f, 0.05f, 0}, {0, 0, 1}},
                                      {{0, 0, 0}, {100, 0, 0}, {2, 0, 0}, {500, 0, 0}}, {0, 100, 200, 290}),
                      ValidationMode::Session);
}

}  // namespace

TEST_CASE("batch: exact revisit is correct") {
  const DescriptorSet db = test::plain_set({{1, 0}, {0, 1}}, {{0, 0, 0}, {1000, 0, 0}});
  const DescriptorSet q = test::plain_set({{1, 0}}, {{0, 0, 0}});
  const LabeledRun run = run_batch(q, db, batch_config(), standard());
  REQUIRE(run.predictions.size() == 1);
  CHECK(run.predictions[0].correct);
  CHECK(run.predictions[0].error_type == ErrorType::None);
}

TEST_CASE("batch: prediction outside the radius while a match exists") {
  const DescriptorSet db = test::plain_set({{1, 0}, {0, 1}}, {{30, 0, 0}, {0, 0, 0}});
  const DescriptorSet q = test::plain_set({{1, 0}}, {{0, 0, 0}});
  const LabeledRun run = run_batch(q, db, batch_config(25.0), standard());
  const Prediction& p = run.predictions.at(0);
  CHECK(p.predicted_index == std::size_t{0});
  CHECK(p.has_match);
  CHECK(p.error_type == ErrorType::IncorrectMatch);
  CHECK(p.first_hit_rank == std::size_t{1});
}

TEST_CASE("batch: hand-placed toy set agrees with the exhaustive labeler") {
  const DescriptorSet db = test::plain_set({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}},
                                           {{0, 0, 0}, {50, 0, 0}, {100, 0, 0}, {150, 0, 0}});
  // q0 revisits entry 0, q1 sits near entry 1 but looks like entry 3, q2 is far from everything.
  const DescriptorSet q = test::plain_set({{0.9f, 0.1f, 0}, {1, 0.9f, 0}, {0, 0.1f, 1}},
                                          {{5, 0, 0}, {45, 0, 0}, {400, 0, 0}});
  const LabeledRun run = run_batch(q, db, batch_config(25.0, 2), standard());
  const LabeledRun expected = oracle::oracle_label({&q, &db, batch_config(25.0, 2), standard()});
  CHECK(run == expected);
  CHECK(run.predictions[0].error_type == ErrorType::None);
  CHECK(run.predictions[1].error_type == ErrorType::IncorrectMatch);
  CHECK(run.predictions[2].error_type == ErrorType::NoMatch);
  CHECK(run.counts.with_match == 2);
}

TEST_CASE("session: hand-built timeline") {
  const DescriptorSet run_set = timeline();
  // Manual visibility with a 90 s exclusion: q0 -> {}, q1 -> {0}, q2 -> {0, 1}, q3 -> {0, 1, 2}.
  CHECK(visible_prefix(run_set, 0, 90.0) == 0);
  CHECK(visible_prefix(run_set, 1, 90.0) == 1);
  CHECK(visible_prefix(run_set, 2, 90.0) == 2);
  CHECK(visible_prefix(run_set, 3, 90.0) == 3);  // t = 200 is exactly 290 - 90

  const LabeledRun run = run_session(run_set, session_config(), standard());
  CHECK(run.counts.skipped_empty_visible == 1);
  REQUIRE(run.predictions.size() == 3);
  CHECK(run.predictions[0].query_index == 1);
  CHECK(run.predictions[0].error_type == ErrorType::NoMatch);
  CHECK(run.predictions[1].query_index == 2);
  CHECK(run.predictions[1].predicted_index == std::size_t{0});
  CHECK(run.predictions[1].correct);
  CHECK(run.predictions[2].query_index == 3);
  CHECK_FALSE(run.predictions[2].has_match);
  CHECK(run.predictions[2].error_type == ErrorType::NoMatch);
  CHECK(run.counts.total == 4);
}

TEST_CASE("session: missing timestamps") {
  const DescriptorSet s = test::plain_set({{1, 0}, {0, 1}}, {{0, 0, 0}, {1, 0, 0}});
  try {
    run_session(s, session_config(), standard());
    FAIL("expected MissingTimestamps");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingTimestamps);
  }
}

TEST_CASE("batch: missing poses") {
  const DescriptorSet s = test::plain_set({{1, 0}});
  CHECK_THROWS_AS(run_batch(s, s, batch_config(), standard()), Error);
}

TEST_CASE("session visibility shrinks as the exclusion window grows") {
  std::mt19937_64 rng(31);
  const DescriptorSet s = validate_set(test::random_set(rng, 120, 4, 1, false, true, true), ValidationMode::Session);
  for (std::size_t i = 0; i < s.count; ++i) {
    std::size_t previous = s.count;
    for (double w : {0.0, 10.0, 90.0, 500.0, 5000.0, 1e9}) {
      const std::size_t v = visible_prefix(s, i, w);
      CHECK(v <= previous);
      previous = v;
    }
  }
}

TEST_CASE("infinite radius makes every prediction correct") {
  synth::WorldSpec spec;
  spec.places = 30;
  spec.queries = 40;
  spec.noise_sigma = 0.5;
  spec.novel_fraction = 0.25;
  const auto world = synth::generate(spec);
  const LabeledRun run = run_batch(world.queries, world.database,
                                   batch_config(std::numeric_limits<double>::infinity()), standard());
  CHECK(run.counts.correct == run.predictions.size());
}

TEST_CASE("parallel drivers reproduce the serial reference") {
  synth::WorldSpec spec;
  spec.places = 60;
  spec.queries = 80;
  spec.noise_sigma = 0.25;
  spec.members = 3;
  spec.novel_fraction = 0.2;
  const auto batch = synth::generate(spec);
  spec.layout = synth::Layout::Session;
  const auto session = synth::generate(spec);
  for (Method m : {Method::Standard, Method::Dropout, Method::Ensemble}) {
    MethodConfig c;
    c.method = m;
    const LabeledRun serial_batch = serial::run_batch(batch.queries, batch.database, batch_config(), c);
    const LabeledRun serial_session = serial::run_session(session.database, session_config(), c);
    for (int threads : {1, 2, 4}) {
      CHECK(run_batch(batch.queries, batch.database, batch_config(), c, {threads}) == serial_batch);
      CHECK(run_session(session.database, session_config(), c, {threads}) == serial_session);
    }
  }
}

TEST_CASE("counts reconcile and labels are consistent") {
  synth::WorldSpec spec;
  spec.layout = synth::Layout::Session;
  spec.places = 40;
  spec.queries = 100;
  spec.noise_sigma = 0.4;
  spec.novel_fraction = 0.3;
  const auto world = synth::generate(spec);
  const LabeledRun run = run_session(world.database, session_config(), standard());
  CHECK(run.counts.total == run.predictions.size() + run.counts.skipped_empty_visible);
  CHECK(run.counts.correct + run.counts.incorrect_match <= run.counts.with_match);
  CHECK(run.counts.correct + run.counts.incorrect_match + run.counts.no_match == run.predictions.size());
  for (const Prediction& p : run.predictions) CHECK(labels_consistent(p));
  CHECK(run_session(world.database, session_config(), standard()) == run);
}

TEST_CASE("split by error type") {
  LabeledRun run;
  run.top_k = 1;
  const ErrorType types[] = {ErrorType::None, ErrorType::IncorrectMatch, ErrorType::NoMatch, ErrorType::None,
                             ErrorType::IncorrectMatch};
  for (std::size_t i = 0; i < 5; ++i) {
    Prediction p;
    p.query_index = i;
    p.error_type = types[i];
    p.correct = types[i] == ErrorType::None;
    p.has_match = types[i] != ErrorType::NoMatch;
    p.uncertainty = static_cast<double>(i);
    run.predictions.push_back(p);
  }
  run.counts = tally(run.predictions, 2);

  const ErrorSplit split = split_by_error_type(run);
  CHECK(split.incorrect_match.predictions.size() == 2 + 2);
  CHECK(split.no_match.predictions.size() == 2 + 1);
  // Independent filter.
  std::vector<std::size_t> im_idx;
  std::vector<std::size_t> nm_idx;
  for (const Prediction& p : run.predictions) {
    if (p.correct || p.error_type == ErrorType::IncorrectMatch) im_idx.push_back(p.query_index);
    if (p.correct || p.error_type == ErrorType::NoMatch) nm_idx.push_back(p.query_index);
  }
  for (std::size_t i = 0; i < im_idx.size(); ++i) CHECK(split.incorrect_match.predictions[i].query_index == im_idx[i]);
  for (std::size_t i = 0; i < nm_idx.size(); ++i) CHECK(split.no_match.predictions[i].query_index == nm_idx[i]);
  CHECK(split.no_match.counts.incorrect_match == 0);
  CHECK(split.incorrect_match.counts.no_match == 0);
  CHECK(recombine(split, 2) == run);
}

TEST_CASE("split of a run without no-match errors keeps only correct predictions") {
  LabeledRun run;
  for (std::size_t i = 0; i < 3; ++i) {
    Prediction p;
    p.query_index = i;
    p.has_match = true;
    p.correct = i != 1;
    p.error_type = p.correct ? ErrorType::None : ErrorType::IncorrectMatch;
    run.predictions.push_back(p);
  }
  run.counts = tally(run.predictions, 0);
  const ErrorSplit split = split_by_error_type(run);
  CHECK(split.no_match.predictions.size() == 2);
  for (const Prediction& p : split.no_match.predictions) CHECK(p.correct);
}

TEST_CASE("invalid protocol configuration") {
  ProtocolConfig c = batch_config();
  c.revisit_radius = 0.0;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = session_config(-1.0);
  CHECK_THROWS_AS(validate_config(c), Error);
}
