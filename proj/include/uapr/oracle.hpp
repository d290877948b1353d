#pragma once

#include <span>

#include "uapr/protocol.hpp"
#include "uapr/types.hpp"

/// Brute-force reference implementations used to cross-check the engine.
/// Nothing here calls into scoring, retrieval, protocol or metrics code; only
/// the plain data types are shared.
namespace uapr::oracle {

/// Exhaustive pairwise AuROC: (#{u_i > u_c} + 0.5 #{u_i == u_c}) / (|U_C| |U_I|),
/// as a percentage. Throws DegenerateClass when either list is empty.
double oracle_auroc(std::span<const double> correct, std::span<const double> incorrect);

/// Error at each rejection level obtained by trying every threshold (all
/// observed values plus one below the minimum), as (rejection, error) pairs
/// sorted by rejection.
std::vector<std::pair<double, double>> oracle_error_rejection(std::span<const double> correct,
                                                              std::span<const double> incorrect);

struct LabelInputs {
  const DescriptorSet* queries = nullptr;   // ignored in session mode
  const DescriptorSet* database = nullptr;  // the run in session mode
  protocol::ProtocolConfig protocol;
  MethodConfig method;
};

/// Nested-loop re-implementation of visibility, ranking, matching and error
/// typing. Intended for toy inputs (N <= a few hundred).
protocol::LabeledRun oracle_label(const LabelInputs& inputs);

}  // namespace uapr::oracle
