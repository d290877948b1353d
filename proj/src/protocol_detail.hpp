#pragma once

#include <span>

#include "uapr/protocol.hpp"

namespace uapr::protocol::detail {

MethodConfig effective_method(const ProtocolConfig& config, MethodConfig method);

void check_batch_inputs(const DescriptorSet& queries, const DescriptorSet& database,
                        const ProtocolConfig& config, const MethodConfig& method);
void check_session_inputs(const DescriptorSet& run, const ProtocolConfig& config,
                          const MethodConfig& method);

/// Fills has_match, first_hit_rank, correct and error_type.
void label(Prediction& p, const Pose& query_pose, const DescriptorSet& database,
           std::span<const std::size_t> visible, double radius);

}  // namespace uapr::protocol::detail
