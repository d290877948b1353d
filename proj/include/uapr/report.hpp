#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uapr/metrics.hpp"
#include "uapr/protocol.hpp"
#include "uapr/synth.hpp"

namespace uapr::io {

/// One prediction as it appears in a report.
struct QueryRecord {
  std::size_t query_index = 0;
  std::optional<std::size_t> predicted_index;
  double score = 0.0;
  double score_variance = 0.0;
  double uncertainty = 0.0;
  bool correct = false;
  ErrorType error_type = ErrorType::NoMatch;
  bool has_match = false;
  std::optional<std::size_t> first_hit_rank;

  bool operator==(const QueryRecord&) const = default;
};

struct Timing {
  double total_seconds = 0.0;
  double ms_per_query = 0.0;
  double queries_per_second = 0.0;

  bool operator==(const Timing&) const = default;
};

/// Self-contained evaluation result. Aggregates and curves are derived from
/// the per-query records and can be recomputed from them.
struct ReportDocument {
  MethodConfig method;
  protocol::ProtocolConfig protocol;
  std::string queries_label;
  std::string database_label;
  std::vector<QueryRecord> predictions;
  protocol::RunCounts counts;
  metrics::MetricSummary metrics;
  std::vector<metrics::CurveSeries> curves;
  Timing timing;

  bool operator==(const ReportDocument&) const = default;
};

ReportDocument make_report(const protocol::LabeledRun& run, const MethodConfig& method,
                           const protocol::ProtocolConfig& protocol, Timing timing = {});

/// Rebuilds the labeled run behind a report. Candidate lists are not stored,
/// so predictions carry only first_hit_rank for Recall@K.
protocol::LabeledRun to_labeled_run(const ReportDocument& report);

nlohmann::json to_json(const ReportDocument& report);
ReportDocument report_from_json(const nlohmann::json& doc);

enum class ReportFormat {
  Structured,  // one JSON document at `path`
  CsvCurves,   // `path` is a directory receiving <kind>.csv per curve
};

/// Returns the files written.
std::vector<std::filesystem::path> write_report(const ReportDocument& report,
                                                const std::filesystem::path& path,
                                                ReportFormat format = ReportFormat::Structured);
ReportDocument read_report(const std::filesystem::path& path);

/// "x,y" header then one point per row.
std::string format_curve_csv(const metrics::CurveSeries& curve);
metrics::CurveSeries parse_curve_csv(std::string_view text, metrics::CurveKind kind);

/// Worldspec configuration document; absent keys keep WorldSpec defaults.
synth::WorldSpec world_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const synth::WorldSpec& spec);

}  // namespace uapr::io
