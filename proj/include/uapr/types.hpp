#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uapr/error.hpp"

namespace uapr {

/// Position in meters. Planar data leaves z at zero.
using Pose = std::array<double, 3>;

double pose_distance(const Pose& a, const Pose& b) noexcept;

/// A single place embedding of dimension L >= 1 with finite entries.
class Descriptor {
 public:
  explicit Descriptor(std::vector<float> values);

  std::span<const float> values() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }

 private:
  std::vector<float> values_;
};

/// Non-owning view of a Gaussian embedding; variance holds sigma^2 per dimension.
struct ProbabilisticView {
  std::span<const float> mean;
  std::span<const float> variance;
};

/// Gaussian embedding (mean, per-dimension sigma^2 > 0).
class ProbabilisticDescriptor {
 public:
  ProbabilisticDescriptor(std::vector<float> mean, std::vector<float> variance);

  std::span<const float> mean() const noexcept { return mean_; }
  std::span<const float> variance() const noexcept { return variance_; }
  std::size_t dim() const noexcept { return mean_.size(); }
  ProbabilisticView view() const noexcept { return {mean_, variance_}; }

 private:
  std::vector<float> mean_;
  std::vector<float> variance_;
};

enum class SetKind { Plain, Probabilistic, MultiMember };

/// N descriptors of dimension L, stored once per member (ensemble model or
/// dropout pass). Poses and timestamps are always N long; when the source
/// carries none they are zero and the matching flag is false.
struct DescriptorSet {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<std::vector<float>> members;  // members[m][i * dim + l]
  std::vector<float> variances;             // count * dim, empty unless probabilistic
  std::vector<Pose> poses;
  std::vector<double> timestamps;
  bool has_poses = false;
  bool has_timestamps = false;
  std::string label;

  std::size_t member_count() const noexcept { return members.size(); }
  bool has_variances() const noexcept { return !variances.empty(); }
  SetKind kind() const noexcept;

  std::span<const float> row(std::size_t member, std::size_t index) const;
  std::span<const float> variance_row(std::size_t index) const;
  ProbabilisticView probabilistic_row(std::size_t index) const;

  bool operator==(const DescriptorSet&) const = default;
};

enum class ValidationMode {
  General,
  Session,  // additionally requires timestamps in non-decreasing order
};

/// Checks every DescriptorSet invariant and returns the set unchanged.
DescriptorSet validate_set(DescriptorSet set, ValidationMode mode = ValidationMode::General);

/// Copy of `set` restricted to its first `members` members.
DescriptorSet take_members(const DescriptorSet& set, std::size_t members);

enum class ErrorType { None, IncorrectMatch, NoMatch };

std::string_view to_string(ErrorType type) noexcept;
std::optional<ErrorType> parse_error_type(std::string_view name) noexcept;

struct Prediction {
  std::size_t query_index = 0;
  std::optional<std::size_t> predicted_index;
  double score = 0.0;
  double score_variance = 0.0;
  double uncertainty = 0.0;
  bool correct = false;
  ErrorType error_type = ErrorType::NoMatch;
  bool has_match = false;
  // Top-K database indices, best first.
  std::vector<std::size_t> candidates;
  // Rank (0-based) of the first candidate inside the revisit radius.
  std::optional<std::size_t> first_hit_rank;

  bool operator==(const Prediction&) const = default;
};

/// True when correct/error_type/has_match are mutually consistent.
bool labels_consistent(const Prediction& p) noexcept;

enum class Method { Standard, PPE, STUN, Dropout, Ensemble };
enum class UncertaintySource { NegativeMeanSimilarity, SimilarityVariance };
enum class MlsConvention { Difference, SumOfMeans };

std::string_view to_string(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;
std::string_view to_string(UncertaintySource source) noexcept;
std::optional<UncertaintySource> parse_uncertainty_source(std::string_view name) noexcept;
std::string_view to_string(MlsConvention convention) noexcept;
std::optional<MlsConvention> parse_mls_convention(std::string_view name) noexcept;

struct MethodConfig {
  Method method = Method::Standard;
  std::size_t top_k = 1;
  UncertaintySource uncertainty_source = UncertaintySource::NegativeMeanSimilarity;
  MlsConvention mls_convention = MlsConvention::Difference;

  bool operator==(const MethodConfig&) const = default;
};

enum class SetRole { Query, Database };

/// Throws MethodDataMismatch when `set` cannot play `role` for `config.method`.
/// PPE needs variances on both sides, STUN only on the query side.
void check_method_data(const MethodConfig& config, const DescriptorSet& set, SetRole role);

/// Pairwise check: the role checks above plus matching L and, for
/// Dropout/Ensemble, matching member counts.
void check_method_data(const MethodConfig& config, const DescriptorSet& queries,
                       const DescriptorSet& database);

}  // namespace uapr
