#pragma once

#include <span>

#include "uapr/types.hpp"

namespace uapr::scoring {

/// Per-pair similarity summary across M members: mean and population variance.
struct ScorePair {
  double mean = 0.0;
  double variance = 0.0;

  bool operator==(const ScorePair&) const = default;
};

// All accumulation is in double regardless of the float storage.
double dot(std::span<const float> a, std::span<const float> b);
double l2_norm(std::span<const float> v);

/// q.d / (|q| |d|), clamped to [-1, 1]. Throws ZeroVector or DimensionMismatch.
double cosine_similarity(std::span<const float> query, std::span<const float> entry);

/// Same arithmetic as cosine_similarity with the norms supplied by the caller,
/// so cached-norm kernels reproduce it bit for bit.
double cosine_from_parts(double dot_product, double query_norm, double entry_norm);

/// Standard baseline: U = -s_y.
double standard_uncertainty(double best_score) noexcept;

/// Mutual likelihood score of two Gaussian embeddings. The Difference
/// convention uses (mu_q - mu_n)^2; SumOfMeans uses (mu_q + mu_n)^2.
double mls_score(ProbabilisticView query, ProbabilisticView entry,
                 MlsConvention convention = MlsConvention::Difference);

/// Sum of the query's per-dimension variances.
double stun_uncertainty(std::span<const float> query_variance);

/// Mean and population (1/M) variance of per-member scores.
ScorePair summarize_member_scores(std::span<const double> member_scores);

/// Pairs member m of the query with member m of the entry and summarizes
/// the M cosine similarities. Throws MemberCountMismatch or ZeroVector.
ScorePair multi_member_scores(std::span<const std::span<const float>> query_members,
                              std::span<const std::span<const float>> entry_members);

}  // namespace uapr::scoring
