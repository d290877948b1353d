#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "uapr/protocol.hpp"

namespace uapr::metrics {

enum class CurveKind { ROC, MixedROC, ErrorRejection, PrecisionRecall, RecallAtK };

std::string_view to_string(CurveKind kind) noexcept;
std::optional<CurveKind> parse_curve_kind(std::string_view name) noexcept;

/// Which denominator the false positive rate uses. Standard divides by |U_I|;
/// MixedDenominator divides by the number of accepted predictions of both classes.
enum class RocConvention { Standard, MixedDenominator };

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

/// Points in sweep order with consecutive duplicates removed.
///   ROC:            (FPR, TPR), both non-decreasing
///   MixedROC:       (FPR, TPR) with the mixed denominator, x not monotone
///   ErrorRejection: (rejection, error), x strictly increasing
///   PrecisionRecall:(recall, precision), x non-decreasing
///   RecallAtK:      (K, recall fraction), x strictly increasing
struct CurveSeries {
  CurveKind kind = CurveKind::ROC;
  std::vector<CurvePoint> points;

  bool operator==(const CurveSeries&) const = default;
};

/// Uncertainties of correct (U_C) and incorrect (U_I) predictions.
struct UncertaintySplit {
  std::vector<double> correct;
  std::vector<double> incorrect;
};

UncertaintySplit partition_uncertainties(const protocol::LabeledRun& run);

/// Percentage of matchable queries with a true match among the top-K
/// candidates. Throws NoMatchableQueries when no query has a match and
/// InvalidArgument when K exceeds the run's stored candidate depth.
double recall_at_k(const protocol::LabeledRun& run, std::size_t k);

/// Recall@K for K = 1..run.top_k as fractions.
CurveSeries recall_curve(const protocol::LabeledRun& run);

/// Thresholds sweep every distinct uncertainty with inclusive comparison,
/// bracketed by -inf/+inf. Throws DegenerateClass when either class is empty.
CurveSeries roc_curve(std::span<const double> correct, std::span<const double> incorrect,
                      RocConvention convention = RocConvention::Standard);

/// Trapezoidal area under an ROC curve, as a percentage. MixedROC points are
/// ordered by (x, y) before integrating.
double auroc(const CurveSeries& curve);

/// Sparsification curve: rejecting predictions from the most uncertain down.
/// Starts at rejection 0 and ends at (1, 0).
CurveSeries error_rejection_curve(std::span<const double> correct, std::span<const double> incorrect);

/// Trapezoidal area under the error-vs-rejection curve, in [0, 1].
double auer(const CurveSeries& curve);

/// Sweep lambda over distinct uncertainties; predictions with U <= lambda are
/// declared matches. precision = declared correct / declared,
/// recall = declared correct / matchable queries.
CurveSeries precision_recall_curve(const protocol::LabeledRun& run);

/// Aggregates for one run. Metrics that are undefined on the run (one class
/// empty, nothing matchable) are left empty rather than NaN.
struct MetricSummary {
  std::optional<double> recall_at_1;
  std::vector<double> recall_at_k;  // recall_at_k[k - 1], percentages
  std::optional<double> auroc;
  std::optional<double> auroc_mixed;
  std::optional<double> auer;

  bool operator==(const MetricSummary&) const = default;
};

MetricSummary summarize(const protocol::LabeledRun& run);

/// Curves available for the run; undefined ones are omitted.
std::vector<CurveSeries> curves(const protocol::LabeledRun& run);

}  // namespace uapr::metrics
