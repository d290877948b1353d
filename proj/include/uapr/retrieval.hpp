#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uapr/scoring.hpp"
#include "uapr/types.hpp"

namespace uapr::retrieval {

struct Candidate {
  std::size_t index = 0;
  double score = 0.0;     // method's ranking score (mean similarity for multi-member)
  double variance = 0.0;  // member score variance, 0 for single-member methods

  bool operator==(const Candidate&) const = default;
};

/// At most K candidates, scores non-increasing, ties resolved by lower index.
struct RankedCandidates {
  std::vector<Candidate> entries;
};

/// One query's inputs borrowed from a DescriptorSet row.
struct QueryBundle {
  std::vector<std::span<const float>> members;
  std::span<const float> variance;  // empty unless the source set is probabilistic
};

QueryBundle query_bundle(const DescriptorSet& set, std::size_t index);

enum class Decision { Accept, Reject };

/// Accept (prediction treated as correct) iff U <= lambda.
Decision threshold_decision(double uncertainty, double lambda) noexcept;

/// Reference path: scores every visible entry straight through the scoring
/// functions.
RankedCandidates rank(const QueryBundle& query, const DescriptorSet& database,
                      std::span<const std::size_t> visible, const MethodConfig& config);

/// Top-1 of `rank` with the method's uncertainty attached. Labels are left at
/// their "no match" defaults for the protocol layer to fill.
Prediction predict(const QueryBundle& query, const DescriptorSet& database,
                   std::span<const std::size_t> visible, const MethodConfig& config,
                   std::size_t query_index);

/// Kernel used by the parallel protocol drivers. Caches database norms once;
/// results are bit-identical to the free functions above. Immutable after
/// construction, so one instance may be shared across threads.
class Retriever {
 public:
  Retriever(const DescriptorSet& database, const MethodConfig& config);

  RankedCandidates rank(const QueryBundle& query, std::span<const std::size_t> visible) const;
  Prediction predict(const QueryBundle& query, std::span<const std::size_t> visible,
                     std::size_t query_index) const;

  const MethodConfig& config() const noexcept { return config_; }

 private:
  const DescriptorSet* database_;
  MethodConfig config_;
  std::vector<std::vector<double>> norms_;  // [member][entry]
};

}  // namespace uapr::retrieval
