#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "test_support.hpp"
#include "uapr/retrieval.hpp"

using namespace uapr;
using namespace uapr::retrieval;

namespace {

std::vector<std::size_t> all_of(const DescriptorSet& s) {
  std::vector<std::size_t> v(s.count);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

MethodConfig method(Method m, std::size_t k = 1) {
  MethodConfig c;
  c.method = m;
  c.top_k = k;
  return c;
}

/// Two-member set built member by member.
DescriptorSet two_member_set(const std::vector<std::vector<float>>& member0,
                             const std::vector<std::vector<float>>& member1) {
  DescriptorSet s = test::plain_set(member0);
  s.members.emplace_back();
  for (const auto& r : member1) s.members[1].insert(s.members[1].end(), r.begin(), r.end());
  return validate_set(s);
}

}  // namespace

TEST_CASE("standard picks the dominant direction") {
  const DescriptorSet db = test::plain_set({{1, 0}, {0, 1}});
  const DescriptorSet q = test::plain_set({{0.9f, 0.1f}});
  const auto ranked = rank(query_bundle(q, 0), db, all_of(db), method(Method::Standard, 2));
  REQUIRE(ranked.entries.size() == 2);
  CHECK(ranked.entries[0].index == 0);
  CHECK(ranked.entries[1].index == 1);
}

TEST_CASE("equal mean similarity resolves to the lower index") {
  // d1 members score {0.8, 1.0}, d2 members score {1.0, 0.8}: identical means.
  const std::vector<float> q{1.0f, 0.0f};
  const std::vector<float> at08{0.8f, 0.6f};
  const std::vector<float> at10{1.0f, 0.0f};
  const DescriptorSet db = two_member_set({at08, at10}, {at10, at08});
  const DescriptorSet qs = two_member_set({q}, {q});
  const auto ranked = rank(query_bundle(qs, 0), db, all_of(db), method(Method::Ensemble, 2));
  CHECK(ranked.entries[0].score == ranked.entries[1].score);
  CHECK(ranked.entries[0].index == 0);

  // Hand-oracle means for the worked example both equal 0.9.
  const std::vector<double> d1{0.8, 1.0};
  const std::vector<double> d2{0.95, 0.85};
  CHECK(std::abs(scoring::summarize_member_scores(d1).mean - 0.9) < 1e-12);
  CHECK(std::abs(scoring::summarize_member_scores(d2).mean - 0.9) < 1e-12);
}

TEST_CASE("identical entries tie and the lowest index wins") {
  const DescriptorSet db = test::plain_set({{0, 1}, {1, 1}, {1, 1}, {1, 1}});
  const DescriptorSet q = test::plain_set({{1, 1}});
  const std::vector<std::size_t> visible{3, 1, 2, 0};
  const auto ranked = rank(query_bundle(q, 0), db, visible, method(Method::Standard, 4));
  CHECK(ranked.entries[0].index == 1);
  CHECK(ranked.entries[1].index == 2);
  CHECK(ranked.entries[2].index == 3);
  CHECK(ranked.entries[3].index == 0);
}

TEST_CASE("empty visible set") {
  const DescriptorSet db = test::plain_set({{1, 0}});
  const DescriptorSet q = test::plain_set({{1, 0}});
  try {
    rank(query_bundle(q, 0), db, {}, method(Method::Standard));
    FAIL("expected EmptyVisibleSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyVisibleSet);
  }
}

TEST_CASE("method data mismatch") {
  const DescriptorSet db = test::plain_set({{1, 0}});
  const DescriptorSet q = test::plain_set({{1, 0}});
  for (Method m : {Method::PPE, Method::STUN}) {
    try {
      rank(query_bundle(q, 0), db, all_of(db), method(m));
      FAIL("expected MethodDataMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MethodDataMismatch);
    }
  }
}

TEST_CASE("prediction uncertainties per method") {
  SUBCASE("standard") {
    const DescriptorSet db = test::plain_set({{1, 0}, {0, 1}});
    const DescriptorSet q = test::plain_set({{3, 4}});
    const Prediction p = predict(query_bundle(q, 0), db, all_of(db), method(Method::Standard), 0);
    CHECK(p.predicted_index == std::size_t{1});
    CHECK(p.score == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(p.uncertainty == -p.score);
  }
  SUBCASE("stun depends only on the query") {
    DescriptorSet q = test::plain_set({{1, 0}});
    q.variances = {0.2f, 0.3f};
    const DescriptorSet db1 = test::plain_set({{1, 0}, {0, 1}});
    const DescriptorSet db2 = test::plain_set({{-1, 0.1f}});
    const double u1 = predict(query_bundle(q, 0), db1, all_of(db1), method(Method::STUN), 0).uncertainty;
    const double u2 = predict(query_bundle(q, 0), db2, all_of(db2), method(Method::STUN), 0).uncertainty;
    CHECK(u1 == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(u1 == u2);
  }
  SUBCASE("ensemble similarity variance") {
    const std::vector<float> q{1.0f, 0.0f};
    const DescriptorSet db = two_member_set({{0.8f, 0.6f}}, {{1.0f, 0.0f}});
    const DescriptorSet qs = two_member_set({q}, {q});
    MethodConfig c = method(Method::Ensemble);
    c.uncertainty_source = UncertaintySource::SimilarityVariance;
    const Prediction p = predict(query_bundle(qs, 0), db, all_of(db), c, 0);
    CHECK(p.uncertainty == doctest::Approx(0.01).epsilon(1e-5));
    CHECK(p.uncertainty == p.score_variance);
    c.uncertainty_source = UncertaintySource::NegativeMeanSimilarity;
    CHECK(predict(query_bundle(qs, 0), db, all_of(db), c, 0).uncertainty == doctest::Approx(-0.9).epsilon(1e-6));
  }
  SUBCASE("ppe uses negative MLS") {
    DescriptorSet db = test::plain_set({{0}, {2}});
    db.variances = {1.0f, 1.0f};
    DescriptorSet q = test::plain_set({{0}});
    q.variances = {1.0f};
    const Prediction p = predict(query_bundle(q, 0), db, all_of(db), method(Method::PPE), 0);
    CHECK(p.predicted_index == std::size_t{0});
    CHECK(std::abs(p.uncertainty - 1.2655121234846454) < 1e-12);
  }
}

TEST_CASE("threshold decision is inclusive") {
  CHECK(threshold_decision(0.4, 0.5) == Decision::Accept);
  CHECK(threshold_decision(0.6, 0.5) == Decision::Reject);
  CHECK(threshold_decision(0.5, 0.5) == Decision::Accept);
}

TEST_CASE("strictly increasing transforms keep every pairwise decision order") {
  std::mt19937_64 rng(21);
  const auto u = test::random_uncertainties(rng, 200, 0.0, 1.0);
  for (std::size_t a = 0; a < u.size(); ++a) {
    for (std::size_t b = 0; b < u.size(); ++b) {
      const bool before = u[a] < u[b];
      CHECK(before == (std::exp(u[a]) < std::exp(u[b])));
      CHECK(before == (3.0 * u[a] + 7.0 < 3.0 * u[b] + 7.0));
    }
  }
}

TEST_CASE("one-member ensemble equals standard bit for bit") {
  std::mt19937_64 rng(22);
  const DescriptorSet db = validate_set(test::random_set(rng, 60, 12, 1, false, false, false));
  const DescriptorSet qs = validate_set(test::random_set(rng, 20, 12, 1, false, false, false));
  const Retriever standard(db, method(Method::Standard, 5));
  const Retriever ensemble(db, method(Method::Ensemble, 5));
  for (std::size_t i = 0; i < qs.count; ++i) {
    const Prediction a = standard.predict(query_bundle(qs, i), all_of(db), i);
    const Prediction b = ensemble.predict(query_bundle(qs, i), all_of(db), i);
    CHECK(a == b);
    CHECK(a == predict(query_bundle(qs, i), db, all_of(db), method(Method::Ensemble, 5), i));
  }
}

TEST_CASE("cached kernel matches the reference path for every method") {
  std::mt19937_64 rng(23);
  const DescriptorSet prob_db = validate_set(test::random_set(rng, 80, 10, 1, true, false, false));
  const DescriptorSet prob_q = validate_set(test::random_set(rng, 15, 10, 1, true, false, false));
  const DescriptorSet multi_db = validate_set(test::random_set(rng, 80, 10, 4, false, false, false));
  const DescriptorSet multi_q = validate_set(test::random_set(rng, 15, 10, 4, false, false, false));
  for (Method m : {Method::Standard, Method::PPE, Method::STUN, Method::Dropout, Method::Ensemble}) {
    const bool multi = m == Method::Dropout || m == Method::Ensemble;
    const DescriptorSet& db = multi ? multi_db : prob_db;
    const DescriptorSet& qs = multi ? multi_q : prob_q;
    const MethodConfig c = method(m, 7);
    const Retriever kernel(db, c);
    std::vector<std::size_t> visible = all_of(db);
    std::shuffle(visible.begin(), visible.end(), rng);
    visible.resize(50);
    for (std::size_t i = 0; i < qs.count; ++i) {
      CHECK(kernel.predict(query_bundle(qs, i), visible, i) == predict(query_bundle(qs, i), db, visible, c, i));
    }
  }
}

TEST_CASE("ranked candidates are sorted, unique and truncated") {
  std::mt19937_64 rng(24);
  const DescriptorSet db = validate_set(test::random_set(rng, 40, 6, 1, false, false, false));
  const DescriptorSet qs = validate_set(test::random_set(rng, 10, 6, 1, false, false, false));
  for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{40}, std::size_t{100}}) {
    for (std::size_t i = 0; i < qs.count; ++i) {
      const auto ranked = rank(query_bundle(qs, i), db, all_of(db), method(Method::Standard, k));
      CHECK(ranked.entries.size() == std::min(k, db.count));
      std::set<std::size_t> seen;
      for (std::size_t r = 0; r < ranked.entries.size(); ++r) {
        seen.insert(ranked.entries[r].index);
        if (r > 0) CHECK(ranked.entries[r - 1].score >= ranked.entries[r].score);
      }
      CHECK(seen.size() == ranked.entries.size());
    }
  }
}

TEST_CASE("rank is invariant to database order") {
  std::mt19937_64 rng(25);
  const DescriptorSet db = validate_set(test::random_set(rng, 50, 8, 1, false, false, false));
  const DescriptorSet qs = validate_set(test::random_set(rng, 10, 8, 1, false, false, false));
  std::vector<std::size_t> perm = all_of(db);
  std::shuffle(perm.begin(), perm.end(), rng);
  DescriptorSet shuffled = db;
  for (std::size_t n = 0; n < db.count; ++n) {
    std::copy_n(db.members[0].begin() + static_cast<std::ptrdiff_t>(perm[n] * db.dim), db.dim,
                shuffled.members[0].begin() + static_cast<std::ptrdiff_t>(n * db.dim));
  }
  for (std::size_t i = 0; i < qs.count; ++i) {
    const auto a = rank(query_bundle(qs, i), db, all_of(db), method(Method::Standard, 10));
    const auto b = rank(query_bundle(qs, i), shuffled, all_of(shuffled), method(Method::Standard, 10));
    for (std::size_t r = 0; r < a.entries.size(); ++r) {
      CHECK(a.entries[r].index == perm[b.entries[r].index]);
      CHECK(a.entries[r].score == b.entries[r].score);
    }
  }
}
