#include <vector>

#include "protocol_detail.hpp"
#include "uapr/retrieval.hpp"

namespace uapr::protocol::serial {

LabeledRun run_batch(const DescriptorSet& queries, const DescriptorSet& database,
                     const ProtocolConfig& config, const MethodConfig& method) {
  const MethodConfig effective = detail::effective_method(config, method);
  detail::check_batch_inputs(queries, database, config, effective);
  std::vector<std::size_t> visible;
  for (std::size_t n = 0; n < database.count; ++n) visible.push_back(n);

  LabeledRun run;
  run.top_k = config.top_k;
  run.revisit_radius = config.revisit_radius;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < queries.count; ++i) {
    if (visible.empty()) {
      ++skipped;
      continue;
    }
    Prediction p = retrieval::predict(retrieval::query_bundle(queries, i), database, visible, effective, i);
    detail::label(p, queries.poses[i], database, visible, config.revisit_radius);
    run.predictions.push_back(std::move(p));
  }
  run.counts = tally(run.predictions, skipped);
  return run;
}

LabeledRun run_session(const DescriptorSet& run_set, const ProtocolConfig& config,
                       const MethodConfig& method) {
  const MethodConfig effective = detail::effective_method(config, method);
  detail::check_session_inputs(run_set, config, effective);

  LabeledRun run;
  run.top_k = config.top_k;
  run.revisit_radius = config.revisit_radius;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < run_set.count; ++i) {
    std::vector<std::size_t> visible;
    for (std::size_t j = 0; j < i; ++j) {
      if (run_set.timestamps[j] <= run_set.timestamps[i] - config.exclusion_window) visible.push_back(j);
    }
    if (visible.empty()) {
      ++skipped;
      continue;
    }
    Prediction p = retrieval::predict(retrieval::query_bundle(run_set, i), run_set, visible, effective, i);
    detail::label(p, run_set.poses[i], run_set, visible, config.revisit_radius);
    run.predictions.push_back(std::move(p));
  }
  run.counts = tally(run.predictions, skipped);
  return run;
}

}  // namespace uapr::protocol::serial
