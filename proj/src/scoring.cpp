#include "uapr/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace uapr::scoring {

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

double cosine_from_parts(double dot_product, double query_norm, double entry_norm) {
  if (query_norm == 0.0 || entry_norm == 0.0) {
    throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero-norm descriptor");
  }
  return std::clamp(dot_product / (query_norm * entry_norm), -1.0, 1.0);
}

double cosine_similarity(std::span<const float> query, std::span<const float> entry) {
  if (query.size() != entry.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cosine similarity of vectors with different lengths");
  }
  return cosine_from_parts(dot(query, entry), l2_norm(query), l2_norm(entry));
}

double standard_uncertainty(double best_score) noexcept { return -best_score; }

double mls_score(ProbabilisticView query, ProbabilisticView entry, MlsConvention convention) {
  const std::size_t dim = query.mean.size();
  if (query.variance.size() != dim || entry.mean.size() != dim || entry.variance.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "MLS operands have different lengths");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < dim; ++l) {
    const double vq = query.variance[l];
    const double vn = entry.variance[l];
    if (!(vq > 0.0) || !(vn > 0.0)) {
      throw Error(ErrorCode::NonPositiveVariance, "MLS needs strictly positive variances");
    }
    const double mq = query.mean[l];
    const double mn = entry.mean[l];
    const double gap = convention == MlsConvention::Difference ? mq - mn : mq + mn;
    const double joint = vq + vn;
    sum += gap * gap / joint + std::log(joint);
  }
  return -0.5 * sum - 0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi);
}

double stun_uncertainty(std::span<const float> query_variance) {
  double sum = 0.0;
  for (float v : query_variance) sum += static_cast<double>(v);
  return sum;
}

ScorePair summarize_member_scores(std::span<const double> member_scores) {
  if (member_scores.empty()) throw Error(ErrorCode::MemberCountMismatch, "no member scores");
  const double m = static_cast<double>(member_scores.size());
  double sum = 0.0;
  for (double s : member_scores) sum += s;
  const double mean = sum / m;
  double spread = 0.0;
  for (double s : member_scores) spread += (s - mean) * (s - mean);
  return {mean, spread / m};
}

ScorePair multi_member_scores(std::span<const std::span<const float>> query_members,
                              std::span<const std::span<const float>> entry_members) {
  if (query_members.size() != entry_members.size() || query_members.empty()) {
    throw Error(ErrorCode::MemberCountMismatch,
                "query has " + std::to_string(query_members.size()) + " members, entry has " +
                    std::to_string(entry_members.size()));
  }
  std::vector<double> scores(query_members.size());
  for (std::size_t m = 0; m < scores.size(); ++m) {
    scores[m] = cosine_similarity(query_members[m], entry_members[m]);
  }
  return summarize_member_scores(scores);
}

}  // namespace uapr::scoring
