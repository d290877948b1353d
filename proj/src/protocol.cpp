#include "uapr/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "uapr/retrieval.hpp"
#include "protocol_detail.hpp"

namespace uapr::protocol {

ProtocolConfig ProtocolConfig::batch_defaults() {
  return {Mode::Batch, kBatchRevisitRadius, 0.0, kDefaultTopK};
}

ProtocolConfig ProtocolConfig::session_defaults() {
  return {Mode::Session, kSessionRevisitRadius, kSessionExclusionWindow, kDefaultTopK};
}

void validate_config(const ProtocolConfig& config) {
  if (!(config.revisit_radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "revisit radius must be > 0");
  }
  if (!(config.exclusion_window >= 0.0) || std::isinf(config.exclusion_window)) {
    throw Error(ErrorCode::InvalidArgument, "exclusion window must be finite and >= 0");
  }
  if (config.top_k == 0) throw Error(ErrorCode::InvalidArgument, "top_k must be positive");
}

RunCounts tally(std::span<const Prediction> predictions, std::size_t skipped) {
  RunCounts c;
  c.total = predictions.size() + skipped;
  c.skipped_empty_visible = skipped;
  for (const Prediction& p : predictions) {
    if (p.has_match) ++c.with_match;
    switch (p.error_type) {
      case ErrorType::None: ++c.correct; break;
      case ErrorType::IncorrectMatch: ++c.incorrect_match; break;
      case ErrorType::NoMatch: ++c.no_match; break;
    }
  }
  return c;
}

std::size_t visible_prefix(const DescriptorSet& run, std::size_t query, double exclusion_window) {
  const auto begin = run.timestamps.begin();
  const double cutoff = run.timestamps.at(query) - exclusion_window;
  return static_cast<std::size_t>(
      std::upper_bound(begin, begin + static_cast<std::ptrdiff_t>(query), cutoff) - begin);
}

namespace detail {

MethodConfig effective_method(const ProtocolConfig& config, MethodConfig method) {
  method.top_k = config.top_k;
  return method;
}

void check_batch_inputs(const DescriptorSet& queries, const DescriptorSet& database,
                        const ProtocolConfig& config, const MethodConfig& method) {
  validate_config(config);
  if (!queries.has_poses || !database.has_poses) {
    throw Error(ErrorCode::MissingPoses, "batch evaluation needs poses on both sets");
  }
  check_method_data(method, queries, database);
}

void check_session_inputs(const DescriptorSet& run, const ProtocolConfig& config,
                          const MethodConfig& method) {
  validate_config(config);
  if (!run.has_timestamps) throw Error(ErrorCode::MissingTimestamps, "session evaluation needs timestamps");
  if (!run.has_poses) throw Error(ErrorCode::MissingPoses, "session evaluation needs poses");
  for (std::size_t i = 1; i < run.count; ++i) {
    if (run.timestamps[i] < run.timestamps[i - 1]) {
      throw Error(ErrorCode::TimestampOrderViolation, "session timestamps must be non-decreasing");
    }
  }
  check_method_data(method, run, run);
}

void label(Prediction& p, const Pose& query_pose, const DescriptorSet& database,
           std::span<const std::size_t> visible, double radius) {
  p.has_match = std::any_of(visible.begin(), visible.end(), [&](std::size_t n) {
    return pose_distance(query_pose, database.poses[n]) <= radius;
  });
  p.first_hit_rank.reset();
  for (std::size_t r = 0; r < p.candidates.size(); ++r) {
    if (pose_distance(query_pose, database.poses[p.candidates[r]]) <= radius) {
      p.first_hit_rank = r;
      break;
    }
  }
  p.correct = p.has_match && p.first_hit_rank == std::size_t{0};
  if (p.correct) {
    p.error_type = ErrorType::None;
  } else {
    p.error_type = p.has_match ? ErrorType::IncorrectMatch : ErrorType::NoMatch;
  }
}

}  // namespace detail

namespace {

int thread_count(ExecutionOptions exec) {
#ifdef _OPENMP
  return exec.threads > 0 ? exec.threads : omp_get_max_threads();
#else
  (void)exec;
  return 1;
#endif
}

/// Runs `body(i)` for every query in parallel, collecting optional results in
/// query order. The first exception thrown by any worker is rethrown.
template <typename Body>
std::vector<std::optional<Prediction>> parallel_queries(std::size_t count, ExecutionOptions exec,
                                                        Body&& body) {
  std::vector<std::optional<Prediction>> slots(count);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::ptrdiff_t>(count);
  [[maybe_unused]] const int threads = thread_count(exec);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      slots[static_cast<std::size_t>(i)] = body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return slots;
}

LabeledRun collect(std::vector<std::optional<Prediction>> slots, const ProtocolConfig& config) {
  LabeledRun run;
  run.top_k = config.top_k;
  run.revisit_radius = config.revisit_radius;
  std::size_t skipped = 0;
  for (auto& slot : slots) {
    if (slot) {
      run.predictions.push_back(std::move(*slot));
    } else {
      ++skipped;
    }
  }
  run.counts = tally(run.predictions, skipped);
  return run;
}

}  // namespace

LabeledRun run_batch(const DescriptorSet& queries, const DescriptorSet& database,
                     const ProtocolConfig& config, const MethodConfig& method,
                     ExecutionOptions exec) {
  const MethodConfig effective = detail::effective_method(config, method);
  detail::check_batch_inputs(queries, database, config, effective);
  const retrieval::Retriever retriever(database, effective);
  std::vector<std::size_t> all(database.count);
  std::iota(all.begin(), all.end(), std::size_t{0});

  auto slots = parallel_queries(queries.count, exec, [&](std::size_t i) -> std::optional<Prediction> {
    if (all.empty()) return std::nullopt;
    Prediction p = retriever.predict(retrieval::query_bundle(queries, i), all, i);
    detail::label(p, queries.poses[i], database, all, config.revisit_radius);
    return p;
  });
  return collect(std::move(slots), config);
}

LabeledRun run_session(const DescriptorSet& run, const ProtocolConfig& config,
                       const MethodConfig& method, ExecutionOptions exec) {
  const MethodConfig effective = detail::effective_method(config, method);
  detail::check_session_inputs(run, config, effective);
  const retrieval::Retriever retriever(run, effective);
  std::vector<std::size_t> all(run.count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const std::span<const std::size_t> indices(all);

  auto slots = parallel_queries(run.count, exec, [&](std::size_t i) -> std::optional<Prediction> {
    const auto visible = indices.first(visible_prefix(run, i, config.exclusion_window));
    if (visible.empty()) return std::nullopt;
    Prediction p = retriever.predict(retrieval::query_bundle(run, i), visible, i);
    detail::label(p, run.poses[i], run, visible, config.revisit_radius);
    return p;
  });
  return collect(std::move(slots), config);
}

ErrorSplit split_by_error_type(const LabeledRun& run) {
  ErrorSplit split;
  for (LabeledRun* sub : {&split.incorrect_match, &split.no_match}) {
    sub->top_k = run.top_k;
    sub->revisit_radius = run.revisit_radius;
  }
  for (const Prediction& p : run.predictions) {
    if (p.error_type != ErrorType::NoMatch) split.incorrect_match.predictions.push_back(p);
    if (p.error_type != ErrorType::IncorrectMatch) split.no_match.predictions.push_back(p);
  }
  split.incorrect_match.counts = tally(split.incorrect_match.predictions, 0);
  split.no_match.counts = tally(split.no_match.predictions, 0);
  return split;
}

LabeledRun recombine(const ErrorSplit& split, std::size_t skipped) {
  LabeledRun run;
  run.top_k = split.incorrect_match.top_k;
  run.revisit_radius = split.incorrect_match.revisit_radius;
  const auto& a = split.incorrect_match.predictions;
  const auto& b = split.no_match.predictions;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].query_index < b[j].query_index)) {
      run.predictions.push_back(a[i++]);
    } else if (i == a.size() || b[j].query_index < a[i].query_index) {
      run.predictions.push_back(b[j++]);
    } else {
      // Correct predictions appear in both halves.
      run.predictions.push_back(a[i++]);
      ++j;
    }
  }
  run.counts = tally(run.predictions, skipped);
  return run;
}

}  // namespace uapr::protocol
