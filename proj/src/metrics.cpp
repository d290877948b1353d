#include "uapr/metrics.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace uapr::metrics {

namespace {

struct Labeled {
  double u;
  bool correct;
};

/// Distinct uncertainty levels in ascending order with how many correct and
/// incorrect predictions sit at each.
struct Level {
  double u;
  std::size_t correct;
  std::size_t incorrect;
};

std::vector<Level> levels(std::span<const double> correct, std::span<const double> incorrect) {
  std::vector<Labeled> all;
  all.reserve(correct.size() + incorrect.size());
  for (double u : correct) all.push_back({u, true});
  for (double u : incorrect) all.push_back({u, false});
  std::sort(all.begin(), all.end(), [](const Labeled& a, const Labeled& b) { return a.u < b.u; });
  std::vector<Level> out;
  for (const Labeled& l : all) {
    if (out.empty() || out.back().u != l.u) out.push_back({l.u, 0, 0});
    (l.correct ? out.back().correct : out.back().incorrect)++;
  }
  return out;
}

void push_unique(std::vector<CurvePoint>& points, CurvePoint p) {
  if (points.empty() || !(points.back() == p)) points.push_back(p);
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double trapezoid(std::span<const CurvePoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].x - points[i - 1].x) * (points[i].y + points[i - 1].y) * 0.5;
  }
  return area;
}

}  // namespace

std::string_view to_string(CurveKind kind) noexcept {
  switch (kind) {
    case CurveKind::ROC: return "roc";
    case CurveKind::MixedROC: return "roc_mixed";
    case CurveKind::ErrorRejection: return "error_rejection";
    case CurveKind::PrecisionRecall: return "precision_recall";
    case CurveKind::RecallAtK: return "recall_at_k";
  }
  return "roc";
}

std::optional<CurveKind> parse_curve_kind(std::string_view name) noexcept {
  for (CurveKind k : {CurveKind::ROC, CurveKind::MixedROC, CurveKind::ErrorRejection,
                      CurveKind::PrecisionRecall, CurveKind::RecallAtK}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

UncertaintySplit partition_uncertainties(const protocol::LabeledRun& run) {
  UncertaintySplit split;
  for (const Prediction& p : run.predictions) {
    (p.correct ? split.correct : split.incorrect).push_back(p.uncertainty);
  }
  return split;
}

double recall_at_k(const protocol::LabeledRun& run, std::size_t k) {
  if (k == 0 || k > run.top_k) {
    throw Error(ErrorCode::InvalidArgument,
                "K=" + std::to_string(k) + " outside stored candidate depth " + std::to_string(run.top_k));
  }
  std::size_t matchable = 0;
  std::size_t hits = 0;
  for (const Prediction& p : run.predictions) {
    if (!p.has_match) continue;
    ++matchable;
    if (p.first_hit_rank && *p.first_hit_rank < k) ++hits;
  }
  if (matchable == 0) throw Error(ErrorCode::NoMatchableQueries, "no query has a true match");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(matchable);
}

CurveSeries recall_curve(const protocol::LabeledRun& run) {
  CurveSeries curve{CurveKind::RecallAtK, {}};
  for (std::size_t k = 1; k <= run.top_k; ++k) {
    curve.points.push_back({static_cast<double>(k), recall_at_k(run, k) / 100.0});
  }
  return curve;
}

CurveSeries roc_curve(std::span<const double> correct, std::span<const double> incorrect,
                      RocConvention convention) {
  if (correct.empty() || incorrect.empty()) {
    throw Error(ErrorCode::DegenerateClass, "ROC needs both correct and incorrect predictions");
  }
  CurveSeries curve{convention == RocConvention::Standard ? CurveKind::ROC : CurveKind::MixedROC, {}};
  // lambda = -inf accepts nothing.
  curve.points.push_back({0.0, 0.0});
  std::size_t c_le = 0;
  std::size_t i_le = 0;
  for (const Level& level : levels(correct, incorrect)) {
    c_le += level.correct;
    i_le += level.incorrect;
    const double tpr = ratio(c_le, correct.size());
    const double fpr = convention == RocConvention::Standard ? ratio(i_le, incorrect.size())
                                                             : ratio(i_le, c_le + i_le);
    push_unique(curve.points, {fpr, tpr});
  }
  // lambda = +inf accepts everything, which the last level already did.
  return curve;
}

double auroc(const CurveSeries& curve) {
  if (curve.kind == CurveKind::ROC) return 100.0 * trapezoid(curve.points);
  if (curve.kind != CurveKind::MixedROC) {
    throw Error(ErrorCode::InvalidArgument, "auroc needs an ROC curve");
  }
  std::vector<CurvePoint> sorted = curve.points;
  std::sort(sorted.begin(), sorted.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  return 100.0 * trapezoid(sorted);
}

CurveSeries error_rejection_curve(std::span<const double> correct, std::span<const double> incorrect) {
  const std::size_t total = correct.size() + incorrect.size();
  if (total == 0) throw Error(ErrorCode::InvalidArgument, "error-rejection curve of an empty run");
  const std::vector<Level> ls = levels(correct, incorrect);
  CurveSeries curve{CurveKind::ErrorRejection, {}};
  std::size_t c_le = correct.size();
  std::size_t i_le = incorrect.size();
  // Descending sweep: at lambda = level u everything up to u is accepted.
  for (auto it = ls.rbegin(); it != ls.rend(); ++it) {
    const std::size_t accepted = c_le + i_le;
    push_unique(curve.points, {ratio(total - accepted, total), ratio(i_le, accepted)});
    c_le -= it->correct;
    i_le -= it->incorrect;
  }
  push_unique(curve.points, {1.0, 0.0});
  return curve;
}

double auer(const CurveSeries& curve) {
  if (curve.kind != CurveKind::ErrorRejection) {
    throw Error(ErrorCode::InvalidArgument, "auer needs an error-rejection curve");
  }
  return trapezoid(curve.points);
}

CurveSeries precision_recall_curve(const protocol::LabeledRun& run) {
  std::size_t matchable = 0;
  std::vector<Labeled> all;
  for (const Prediction& p : run.predictions) {
    if (p.has_match) ++matchable;
    all.push_back({p.uncertainty, p.correct});
  }
  if (matchable == 0) throw Error(ErrorCode::NoMatchableQueries, "no query has a true match");
  std::sort(all.begin(), all.end(), [](const Labeled& a, const Labeled& b) { return a.u < b.u; });
  CurveSeries curve{CurveKind::PrecisionRecall, {}};
  std::size_t declared = 0;
  std::size_t declared_correct = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    ++declared;
    if (all[i].correct) ++declared_correct;
    if (i + 1 < all.size() && all[i + 1].u == all[i].u) continue;
    push_unique(curve.points, {ratio(declared_correct, matchable), ratio(declared_correct, declared)});
  }
  return curve;
}

MetricSummary summarize(const protocol::LabeledRun& run) {
  MetricSummary s;
  if (std::any_of(run.predictions.begin(), run.predictions.end(),
                  [](const Prediction& p) { return p.has_match; })) {
    for (std::size_t k = 1; k <= run.top_k; ++k) s.recall_at_k.push_back(recall_at_k(run, k));
    s.recall_at_1 = s.recall_at_k.front();
  }
  const UncertaintySplit u = partition_uncertainties(run);
  if (!u.correct.empty() && !u.incorrect.empty()) {
    s.auroc = auroc(roc_curve(u.correct, u.incorrect, RocConvention::Standard));
    s.auroc_mixed = auroc(roc_curve(u.correct, u.incorrect, RocConvention::MixedDenominator));
  }
  if (!run.predictions.empty()) s.auer = auer(error_rejection_curve(u.correct, u.incorrect));
  return s;
}

std::vector<CurveSeries> curves(const protocol::LabeledRun& run) {
  std::vector<CurveSeries> out;
  const bool matchable = std::any_of(run.predictions.begin(), run.predictions.end(),
                                     [](const Prediction& p) { return p.has_match; });
  if (matchable) out.push_back(recall_curve(run));
  if (matchable) out.push_back(precision_recall_curve(run));
  const UncertaintySplit u = partition_uncertainties(run);
  if (!run.predictions.empty()) out.push_back(error_rejection_curve(u.correct, u.incorrect));
  if (!u.correct.empty() && !u.incorrect.empty()) {
    out.push_back(roc_curve(u.correct, u.incorrect, RocConvention::Standard));
    out.push_back(roc_curve(u.correct, u.incorrect, RocConvention::MixedDenominator));
  }
  return out;
}

}  // namespace uapr::metrics
