#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uapr/types.hpp"

namespace uapr::protocol {

inline constexpr double kBatchRevisitRadius = 25.0;      // meters
inline constexpr double kSessionRevisitRadius = 10.0;    // meters
inline constexpr double kSessionExclusionWindow = 90.0;  // seconds
inline constexpr std::size_t kDefaultTopK = 25;

enum class Mode { Batch, Session };

/// top_k here is authoritative: the drivers copy it into the MethodConfig.
struct ProtocolConfig {
  Mode mode = Mode::Batch;
  double revisit_radius = kBatchRevisitRadius;
  double exclusion_window = kSessionExclusionWindow;
  std::size_t top_k = kDefaultTopK;

  static ProtocolConfig batch_defaults();
  static ProtocolConfig session_defaults();

  bool operator==(const ProtocolConfig&) const = default;
};

void validate_config(const ProtocolConfig& config);

struct RunCounts {
  std::size_t total = 0;  // predictions + skipped
  std::size_t with_match = 0;
  std::size_t correct = 0;
  std::size_t incorrect_match = 0;
  std::size_t no_match = 0;
  std::size_t skipped_empty_visible = 0;

  bool operator==(const RunCounts&) const = default;
};

struct LabeledRun {
  std::vector<Prediction> predictions;  // ascending query_index
  RunCounts counts;
  std::size_t top_k = 1;
  double revisit_radius = kBatchRevisitRadius;

  bool operator==(const LabeledRun&) const = default;
};

RunCounts tally(std::span<const Prediction> predictions, std::size_t skipped);

struct ExecutionOptions {
  int threads = 0;  // 0 = all available
};

/// Every query against the full database. A prediction is correct when it lies
/// within the revisit radius; queries with no database entry inside the radius
/// are labeled NoMatch and drop out of Recall@K denominators.
LabeledRun run_batch(const DescriptorSet& queries, const DescriptorSet& database,
                     const ProtocolConfig& config, const MethodConfig& method,
                     ExecutionOptions exec = {});

/// Online evaluation inside one run. Query i sees entries j < i with
/// t_j <= t_i - exclusion_window (inclusive); queries that see nothing are
/// skipped and only counted.
LabeledRun run_session(const DescriptorSet& run, const ProtocolConfig& config,
                       const MethodConfig& method, ExecutionOptions exec = {});

/// Number of entries visible to query `query` (always a prefix of the run,
/// since timestamps are non-decreasing).
std::size_t visible_prefix(const DescriptorSet& run, std::size_t query, double exclusion_window);

struct ErrorSplit {
  LabeledRun incorrect_match;  // correct + IncorrectMatch predictions
  LabeledRun no_match;         // correct + NoMatch predictions
};

ErrorSplit split_by_error_type(const LabeledRun& run);

/// Inverse of split_by_error_type on the prediction list. Skipped counts are
/// not carried through the split, so they come back as `skipped`.
LabeledRun recombine(const ErrorSplit& split, std::size_t skipped = 0);

/// Single-threaded reference drivers kept for cross-checking the parallel
/// ones; they go through the uncached retrieval path and explicit visible
/// index lists.
namespace serial {

LabeledRun run_batch(const DescriptorSet& queries, const DescriptorSet& database,
                     const ProtocolConfig& config, const MethodConfig& method);
LabeledRun run_session(const DescriptorSet& run, const ProtocolConfig& config,
                       const MethodConfig& method);

}  // namespace serial

}  // namespace uapr::protocol
