#include "uapr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace uapr::oracle {

double oracle_auroc(std::span<const double> correct, std::span<const double> incorrect) {
  if (correct.empty() || incorrect.empty()) {
    throw Error(ErrorCode::DegenerateClass, "oracle AuROC needs both classes");
  }
  double wins = 0.0;
  for (double ui : incorrect) {
    for (double uc : correct) {
      if (ui > uc) {
        wins += 1.0;
      } else if (ui == uc) {
        wins += 0.5;
      }
    }
  }
  return 100.0 * wins / (static_cast<double>(correct.size()) * static_cast<double>(incorrect.size()));
}

std::vector<std::pair<double, double>> oracle_error_rejection(std::span<const double> correct,
                                                              std::span<const double> incorrect) {
  std::vector<double> thresholds(correct.begin(), correct.end());
  thresholds.insert(thresholds.end(), incorrect.begin(), incorrect.end());
  double lowest = thresholds.empty() ? 0.0 : thresholds.front();
  for (double t : thresholds) lowest = std::min(lowest, t);
  thresholds.push_back(lowest - 1.0);
  const double total = static_cast<double>(correct.size() + incorrect.size());

  std::vector<std::pair<double, double>> points;
  for (double lambda : thresholds) {
    double accepted_correct = 0.0;
    double accepted_incorrect = 0.0;
    for (double u : correct) accepted_correct += (u <= lambda) ? 1.0 : 0.0;
    for (double u : incorrect) accepted_incorrect += (u <= lambda) ? 1.0 : 0.0;
    const double accepted = accepted_correct + accepted_incorrect;
    const double rejection = (total - accepted) / total;
    const double error = accepted == 0.0 ? 0.0 : accepted_incorrect / accepted;
    const std::pair<double, double> point{rejection, error};
    if (std::find(points.begin(), points.end(), point) == points.end()) points.push_back(point);
  }
  std::sort(points.begin(), points.end());
  return points;
}

namespace {

double naive_cosine(std::span<const float> a, std::span<const float> b) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ab += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  for (std::size_t i = 0; i < a.size(); ++i) aa += static_cast<double>(a[i]) * static_cast<double>(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) bb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
  const double c = ab / (std::sqrt(aa) * std::sqrt(bb));
  return std::min(1.0, std::max(-1.0, c));
}

double naive_mls(const DescriptorSet& qs, std::size_t qi, const DescriptorSet& ds, std::size_t di,
                 MlsConvention convention) {
  const std::size_t dim = qs.dim;
  double sum = 0.0;
  for (std::size_t l = 0; l < dim; ++l) {
    const double mq = qs.members[0][qi * dim + l];
    const double mn = ds.members[0][di * dim + l];
    const double vq = qs.variances[qi * dim + l];
    const double vn = ds.variances[di * dim + l];
    const double g = convention == MlsConvention::Difference ? mq - mn : mq + mn;
    sum += g * g / (vq + vn) + std::log(vq + vn);
  }
  return -0.5 * sum - 0.5 * static_cast<double>(dim) * std::log(2.0 * 3.14159265358979323846);
}

struct Scored {
  double score;
  double variance;
};

Scored naive_score(const DescriptorSet& qs, std::size_t qi, const DescriptorSet& ds, std::size_t di,
                   const MethodConfig& method) {
  const std::size_t dim = qs.dim;
  const auto row = [dim](const DescriptorSet& s, std::size_t m, std::size_t i) {
    return std::span<const float>(s.members[m].data() + i * dim, dim);
  };
  switch (method.method) {
    case Method::PPE:
      return {naive_mls(qs, qi, ds, di, method.mls_convention), 0.0};
    case Method::Dropout:
    case Method::Ensemble: {
      const std::size_t members = qs.members.size();
      std::vector<double> s(members);
      for (std::size_t m = 0; m < members; ++m) s[m] = naive_cosine(row(qs, m, qi), row(ds, m, di));
      double mean = 0.0;
      for (double x : s) mean += x;
      mean /= static_cast<double>(members);
      double var = 0.0;
      for (double x : s) var += (x - mean) * (x - mean);
      return {mean, var / static_cast<double>(members)};
    }
    case Method::Standard:
    case Method::STUN:
      break;
  }
  return {naive_cosine(row(qs, 0, qi), row(ds, 0, di)), 0.0};
}

double distance(const Pose& a, const Pose& b) {
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sum);
}

}  // namespace

protocol::LabeledRun oracle_label(const LabelInputs& inputs) {
  const bool session = inputs.protocol.mode == protocol::Mode::Session;
  const DescriptorSet& ds = *inputs.database;
  const DescriptorSet& qs = session ? ds : *inputs.queries;
  const double radius = inputs.protocol.revisit_radius;
  const std::size_t top_k = inputs.protocol.top_k;

  protocol::LabeledRun run;
  run.top_k = top_k;
  run.revisit_radius = radius;
  std::size_t skipped = 0;

  for (std::size_t qi = 0; qi < qs.count; ++qi) {
    std::vector<std::size_t> visible;
    for (std::size_t di = 0; di < ds.count; ++di) {
      if (session) {
        if (di >= qi) continue;
        if (!(ds.timestamps[di] <= qs.timestamps[qi] - inputs.protocol.exclusion_window)) continue;
      }
      visible.push_back(di);
    }
    if (visible.empty()) {
      ++skipped;
      continue;
    }

    std::vector<Scored> scores;
    for (std::size_t di : visible) scores.push_back(naive_score(qs, qi, ds, di, inputs.method));

    // Repeated selection of the best remaining entry; strict > keeps the lowest index on ties.
    std::vector<bool> taken(visible.size(), false);
    Prediction p;
    p.query_index = qi;
    std::size_t best_slot = 0;
    for (std::size_t r = 0; r < top_k && r < visible.size(); ++r) {
      std::size_t pick = visible.size();
      for (std::size_t s = 0; s < visible.size(); ++s) {
        if (taken[s]) continue;
        if (pick == visible.size() || scores[s].score > scores[pick].score) pick = s;
      }
      taken[pick] = true;
      if (r == 0) best_slot = pick;
      p.candidates.push_back(visible[pick]);
    }
    p.predicted_index = visible[best_slot];
    p.score = scores[best_slot].score;
    p.score_variance = scores[best_slot].variance;
    switch (inputs.method.method) {
      case Method::STUN: {
        double sum = 0.0;
        for (std::size_t l = 0; l < qs.dim; ++l) sum += qs.variances[qi * qs.dim + l];
        p.uncertainty = sum;
        break;
      }
      case Method::Dropout:
      case Method::Ensemble:
        p.uncertainty = inputs.method.uncertainty_source == UncertaintySource::SimilarityVariance
                            ? p.score_variance
                            : -p.score;
        break;
      case Method::Standard:
      case Method::PPE:
        p.uncertainty = -p.score;
        break;
    }

    p.has_match = false;
    for (std::size_t di : visible) {
      if (distance(qs.poses[qi], ds.poses[di]) <= radius) p.has_match = true;
    }
    for (std::size_t r = 0; r < p.candidates.size(); ++r) {
      if (distance(qs.poses[qi], ds.poses[p.candidates[r]]) <= radius) {
        p.first_hit_rank = r;
        break;
      }
    }
    const bool hit = distance(qs.poses[qi], ds.poses[*p.predicted_index]) <= radius;
    p.correct = p.has_match && hit;
    p.error_type = p.correct ? ErrorType::None : (p.has_match ? ErrorType::IncorrectMatch : ErrorType::NoMatch);
    run.predictions.push_back(std::move(p));
  }

  protocol::RunCounts& c = run.counts;
  c.skipped_empty_visible = skipped;
  c.total = run.predictions.size() + skipped;
  for (const Prediction& p : run.predictions) {
    c.with_match += p.has_match ? 1 : 0;
    c.correct += p.error_type == ErrorType::None ? 1 : 0;
    c.incorrect_match += p.error_type == ErrorType::IncorrectMatch ? 1 : 0;
    c.no_match += p.error_type == ErrorType::NoMatch ? 1 : 0;
  }
  return run;
}

}  // namespace uapr::oracle
