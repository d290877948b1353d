#include "uapr/types.hpp"

#include <cmath>
#include <string>

namespace uapr {

namespace {

bool all_finite(std::span<const float> values) {
  for (float v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::TimestampOrderViolation: return "TimestampOrderViolation";
    case ErrorCode::InvalidLayout: return "InvalidLayout";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::MemberCountMismatch: return "MemberCountMismatch";
    case ErrorCode::EmptyVisibleSet: return "EmptyVisibleSet";
    case ErrorCode::MethodDataMismatch: return "MethodDataMismatch";
    case ErrorCode::MissingTimestamps: return "MissingTimestamps";
    case ErrorCode::MissingPoses: return "MissingPoses";
    case ErrorCode::NoMatchableQueries: return "NoMatchableQueries";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

double pose_distance(const Pose& a, const Pose& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Descriptor::Descriptor(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::DimensionMismatch, "descriptor has dimension 0");
  if (!all_finite(values_)) throw Error(ErrorCode::NonFiniteValue, "descriptor entry is not finite");
}

ProbabilisticDescriptor::ProbabilisticDescriptor(std::vector<float> mean, std::vector<float> variance)
    : mean_(std::move(mean)), variance_(std::move(variance)) {
  if (mean_.empty() || mean_.size() != variance_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mean and variance lengths differ or are empty");
  }
  if (!all_finite(mean_) || !all_finite(variance_)) {
    throw Error(ErrorCode::NonFiniteValue, "probabilistic descriptor entry is not finite");
  }
  for (float v : variance_) {
    if (!(v > 0.0f)) throw Error(ErrorCode::NonPositiveVariance, "variance must be > 0");
  }
}

SetKind DescriptorSet::kind() const noexcept {
  if (members.size() > 1) return SetKind::MultiMember;
  return has_variances() ? SetKind::Probabilistic : SetKind::Plain;
}

std::span<const float> DescriptorSet::row(std::size_t member, std::size_t index) const {
  return std::span<const float>(members.at(member)).subspan(index * dim, dim);
}

std::span<const float> DescriptorSet::variance_row(std::size_t index) const {
  if (!has_variances()) throw Error(ErrorCode::MethodDataMismatch, "set carries no variances");
  return std::span<const float>(variances).subspan(index * dim, dim);
}

ProbabilisticView DescriptorSet::probabilistic_row(std::size_t index) const {
  return {row(0, index), variance_row(index)};
}

DescriptorSet validate_set(DescriptorSet set, ValidationMode mode) {
  if (set.dim == 0) throw Error(ErrorCode::DimensionMismatch, "dimension L must be >= 1");
  if (set.members.empty()) throw Error(ErrorCode::InvalidLayout, "set has no members");
  const std::size_t expected = set.count * set.dim;
  for (std::size_t m = 0; m < set.members.size(); ++m) {
    if (set.members[m].size() != expected) {
      throw Error(ErrorCode::DimensionMismatch,
                  "member " + std::to_string(m) + " holds " + std::to_string(set.members[m].size()) +
                      " values, expected " + std::to_string(expected));
    }
    if (!all_finite(set.members[m])) {
      throw Error(ErrorCode::NonFiniteValue, "member " + std::to_string(m) + " has a non-finite entry");
    }
  }
  if (set.has_variances()) {
    if (set.members.size() > 1) {
      throw Error(ErrorCode::InvalidLayout, "variances are only allowed on single-member sets");
    }
    if (set.variances.size() != expected) {
      throw Error(ErrorCode::DimensionMismatch, "variance array does not hold N x L values");
    }
    if (!all_finite(set.variances)) throw Error(ErrorCode::NonFiniteValue, "variance is not finite");
    for (float v : set.variances) {
      if (!(v > 0.0f)) throw Error(ErrorCode::NonPositiveVariance, "variance must be > 0");
    }
  }
  if (set.poses.size() != set.count) {
    throw Error(ErrorCode::DimensionMismatch, "pose count differs from N");
  }
  if (set.timestamps.size() != set.count) {
    throw Error(ErrorCode::DimensionMismatch, "timestamp count differs from N");
  }
  for (const Pose& p : set.poses) {
    for (double c : p) {
      if (!std::isfinite(c)) throw Error(ErrorCode::NonFiniteValue, "pose component is not finite");
    }
  }
  for (double t : set.timestamps) {
    if (!std::isfinite(t)) throw Error(ErrorCode::NonFiniteValue, "timestamp is not finite");
  }
  if (mode == ValidationMode::Session) {
    if (!set.has_timestamps) throw Error(ErrorCode::MissingTimestamps, "session sets need timestamps");
    for (std::size_t i = 1; i < set.count; ++i) {
      if (set.timestamps[i] < set.timestamps[i - 1]) {
        throw Error(ErrorCode::TimestampOrderViolation,
                    "timestamp " + std::to_string(i) + " precedes its predecessor");
      }
    }
  }
  return set;
}

DescriptorSet take_members(const DescriptorSet& set, std::size_t members) {
  if (members == 0 || members > set.member_count()) {
    throw Error(ErrorCode::MemberCountMismatch, "cannot take " + std::to_string(members) + " of " +
                                                    std::to_string(set.member_count()) + " members");
  }
  DescriptorSet out = set;
  out.members.resize(members);
  return out;
}

std::string_view to_string(ErrorType type) noexcept {
  switch (type) {
    case ErrorType::None: return "none";
    case ErrorType::IncorrectMatch: return "incorrect_match";
    case ErrorType::NoMatch: return "no_match";
  }
  return "none";
}

std::optional<ErrorType> parse_error_type(std::string_view name) noexcept {
  if (name == "none") return ErrorType::None;
  if (name == "incorrect_match") return ErrorType::IncorrectMatch;
  if (name == "no_match") return ErrorType::NoMatch;
  return std::nullopt;
}

bool labels_consistent(const Prediction& p) noexcept {
  if (p.correct != (p.error_type == ErrorType::None)) return false;
  if (p.error_type == ErrorType::NoMatch && p.has_match) return false;
  if (p.error_type == ErrorType::IncorrectMatch && !p.has_match) return false;
  if (p.correct && !p.has_match) return false;
  return true;
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Standard: return "standard";
    case Method::PPE: return "ppe";
    case Method::STUN: return "stun";
    case Method::Dropout: return "dropout";
    case Method::Ensemble: return "ensemble";
  }
  return "standard";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  if (name == "standard") return Method::Standard;
  if (name == "ppe") return Method::PPE;
  if (name == "stun") return Method::STUN;
  if (name == "dropout") return Method::Dropout;
  if (name == "ensemble") return Method::Ensemble;
  return std::nullopt;
}

std::string_view to_string(UncertaintySource source) noexcept {
  return source == UncertaintySource::NegativeMeanSimilarity ? "negative-mean" : "variance";
}

std::optional<UncertaintySource> parse_uncertainty_source(std::string_view name) noexcept {
  if (name == "negative-mean") return UncertaintySource::NegativeMeanSimilarity;
  if (name == "variance") return UncertaintySource::SimilarityVariance;
  return std::nullopt;
}

std::string_view to_string(MlsConvention convention) noexcept {
  return convention == MlsConvention::Difference ? "difference" : "sum-of-means";
}

std::optional<MlsConvention> parse_mls_convention(std::string_view name) noexcept {
  if (name == "difference") return MlsConvention::Difference;
  if (name == "sum-of-means") return MlsConvention::SumOfMeans;
  return std::nullopt;
}

void check_method_data(const MethodConfig& config, const DescriptorSet& set, SetRole role) {
  if (config.top_k == 0) throw Error(ErrorCode::InvalidArgument, "top_k must be positive");
  const bool needs_variances =
      config.method == Method::PPE || (config.method == Method::STUN && role == SetRole::Query);
  if (needs_variances && !set.has_variances()) {
    throw Error(ErrorCode::MethodDataMismatch,
                std::string(to_string(config.method)) + " needs a probabilistic " +
                    (role == SetRole::Query ? "query" : "database") + " set");
  }
}

void check_method_data(const MethodConfig& config, const DescriptorSet& queries,
                       const DescriptorSet& database) {
  check_method_data(config, queries, SetRole::Query);
  check_method_data(config, database, SetRole::Database);
  if (queries.dim != database.dim) {
    throw Error(ErrorCode::MethodDataMismatch, "query and database dimensions differ");
  }
  const bool multi = config.method == Method::Dropout || config.method == Method::Ensemble;
  if (multi && queries.member_count() != database.member_count()) {
    throw Error(ErrorCode::MethodDataMismatch, "query and database member counts differ");
  }
}

}  // namespace uapr
