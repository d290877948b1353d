#include "uapr/retrieval.hpp"

#include <algorithm>
#include <string>

namespace uapr::retrieval {

namespace {

using scoring::ScorePair;

bool uses_all_members(Method method) {
  return method == Method::Dropout || method == Method::Ensemble;
}

void check_query(const QueryBundle& query, const DescriptorSet& database,
                 std::span<const std::size_t> visible, const MethodConfig& config) {
  if (config.top_k == 0) throw Error(ErrorCode::InvalidArgument, "top_k must be positive");
  if (visible.empty()) throw Error(ErrorCode::EmptyVisibleSet, "no database entry is visible");
  if (query.members.empty()) throw Error(ErrorCode::MethodDataMismatch, "query bundle is empty");
  if (query.members.front().size() != database.dim) {
    throw Error(ErrorCode::MethodDataMismatch, "query and database dimensions differ");
  }
  switch (config.method) {
    case Method::Standard:
      break;
    case Method::PPE:
      if (query.variance.empty() || !database.has_variances()) {
        throw Error(ErrorCode::MethodDataMismatch, "ppe needs probabilistic query and database");
      }
      break;
    case Method::STUN:
      if (query.variance.empty()) {
        throw Error(ErrorCode::MethodDataMismatch, "stun needs a probabilistic query");
      }
      break;
    case Method::Dropout:
    case Method::Ensemble:
      if (query.members.size() != database.member_count()) {
        throw Error(ErrorCode::MethodDataMismatch,
                    "query has " + std::to_string(query.members.size()) + " members, database has " +
                        std::to_string(database.member_count()));
      }
      break;
  }
}

void check_index(std::size_t index, const DescriptorSet& database) {
  if (index >= database.count) {
    throw Error(ErrorCode::InvalidArgument, "visible index " + std::to_string(index) + " out of range");
  }
}

RankedCandidates select_top(std::vector<Candidate> scored, std::size_t top_k) {
  const std::size_t keep = std::min(top_k, scored.size());
  const auto better = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    better);
  scored.resize(keep);
  return {std::move(scored)};
}

Prediction to_prediction(const RankedCandidates& ranked, const QueryBundle& query,
                         const MethodConfig& config, std::size_t query_index) {
  Prediction p;
  p.query_index = query_index;
  const Candidate& top = ranked.entries.front();
  p.predicted_index = top.index;
  p.score = top.score;
  p.score_variance = top.variance;
  switch (config.method) {
    case Method::Standard:
      p.uncertainty = scoring::standard_uncertainty(top.score);
      break;
    case Method::PPE:
      p.uncertainty = -top.score;
      break;
    case Method::STUN:
      p.uncertainty = scoring::stun_uncertainty(query.variance);
      break;
    case Method::Dropout:
    case Method::Ensemble:
      p.uncertainty = config.uncertainty_source == UncertaintySource::SimilarityVariance
                          ? top.variance
                          : -top.score;
      break;
  }
  p.candidates.reserve(ranked.entries.size());
  for (const Candidate& c : ranked.entries) p.candidates.push_back(c.index);
  return p;
}

}  // namespace

QueryBundle query_bundle(const DescriptorSet& set, std::size_t index) {
  if (index >= set.count) throw Error(ErrorCode::InvalidArgument, "query index out of range");
  QueryBundle bundle;
  bundle.members.reserve(set.member_count());
  for (std::size_t m = 0; m < set.member_count(); ++m) bundle.members.push_back(set.row(m, index));
  if (set.has_variances()) bundle.variance = set.variance_row(index);
  return bundle;
}

Decision threshold_decision(double uncertainty, double lambda) noexcept {
  return uncertainty <= lambda ? Decision::Accept : Decision::Reject;
}

RankedCandidates rank(const QueryBundle& query, const DescriptorSet& database,
                      std::span<const std::size_t> visible, const MethodConfig& config) {
  check_query(query, database, visible, config);
  std::vector<Candidate> scored;
  scored.reserve(visible.size());
  if (uses_all_members(config.method)) {
    std::vector<std::span<const float>> entry(database.member_count());
    for (std::size_t n : visible) {
      check_index(n, database);
      for (std::size_t m = 0; m < entry.size(); ++m) entry[m] = database.row(m, n);
      const ScorePair s = scoring::multi_member_scores(query.members, entry);
      scored.push_back({n, s.mean, s.variance});
    }
  } else if (config.method == Method::PPE) {
    const ProbabilisticView q{query.members.front(), query.variance};
    for (std::size_t n : visible) {
      check_index(n, database);
      scored.push_back({n, scoring::mls_score(q, database.probabilistic_row(n), config.mls_convention), 0.0});
    }
  } else {
    for (std::size_t n : visible) {
      check_index(n, database);
      scored.push_back({n, scoring::cosine_similarity(query.members.front(), database.row(0, n)), 0.0});
    }
  }
  return select_top(std::move(scored), config.top_k);
}

Prediction predict(const QueryBundle& query, const DescriptorSet& database,
                   std::span<const std::size_t> visible, const MethodConfig& config,
                   std::size_t query_index) {
  return to_prediction(rank(query, database, visible, config), query, config, query_index);
}

Retriever::Retriever(const DescriptorSet& database, const MethodConfig& config)
    : database_(&database), config_(config) {
  if (config_.method == Method::PPE) return;
  const std::size_t members = uses_all_members(config_.method) ? database.member_count() : 1;
  norms_.resize(members);
  for (std::size_t m = 0; m < members; ++m) {
    norms_[m].resize(database.count);
    for (std::size_t n = 0; n < database.count; ++n) norms_[m][n] = scoring::l2_norm(database.row(m, n));
  }
}

RankedCandidates Retriever::rank(const QueryBundle& query, std::span<const std::size_t> visible) const {
  const DescriptorSet& db = *database_;
  check_query(query, db, visible, config_);
  std::vector<Candidate> scored;
  scored.reserve(visible.size());
  if (config_.method == Method::PPE) {
    const ProbabilisticView q{query.members.front(), query.variance};
    for (std::size_t n : visible) {
      check_index(n, db);
      scored.push_back({n, scoring::mls_score(q, db.probabilistic_row(n), config_.mls_convention), 0.0});
    }
    return select_top(std::move(scored), config_.top_k);
  }

  const std::size_t members = norms_.size();
  std::vector<double> query_norms(members);
  for (std::size_t m = 0; m < members; ++m) query_norms[m] = scoring::l2_norm(query.members[m]);

  if (uses_all_members(config_.method)) {
    std::vector<double> member_scores(members);
    for (std::size_t n : visible) {
      check_index(n, db);
      for (std::size_t m = 0; m < members; ++m) {
        member_scores[m] = scoring::cosine_from_parts(scoring::dot(query.members[m], db.row(m, n)),
                                                      query_norms[m], norms_[m][n]);
      }
      const ScorePair s = scoring::summarize_member_scores(member_scores);
      scored.push_back({n, s.mean, s.variance});
    }
  } else {
    for (std::size_t n : visible) {
      check_index(n, db);
      const double s = scoring::cosine_from_parts(scoring::dot(query.members.front(), db.row(0, n)),
                                                  query_norms[0], norms_[0][n]);
      scored.push_back({n, s, 0.0});
    }
  }
  return select_top(std::move(scored), config_.top_k);
}

Prediction Retriever::predict(const QueryBundle& query, std::span<const std::size_t> visible,
                              std::size_t query_index) const {
  return to_prediction(rank(query, visible), query, config_, query_index);
}

}  // namespace uapr::retrieval
