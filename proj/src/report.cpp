#include "uapr/report.hpp"

#include <charconv>
#include <string_view>

#include "uapr/descriptor_io.hpp"

namespace uapr::io {

namespace {

using nlohmann::json;

constexpr std::string_view kReportFormat = "uapr-report";
constexpr int kReportVersion = 1;

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::ManifestMismatch, "malformed report: " + what);
}

std::string_view to_string(protocol::Mode mode) { return mode == protocol::Mode::Batch ? "batch" : "session"; }

protocol::Mode parse_mode(const std::string& name) {
  if (name == "batch") return protocol::Mode::Batch;
  if (name == "session") return protocol::Mode::Session;
  malformed("unknown protocol mode " + name);
}

template <typename Enum, typename Parser>
Enum parse_enum(const json& v, Parser parse, const char* what) {
  const auto parsed = parse(v.get<std::string>());
  if (!parsed) malformed(std::string("unknown ") + what + " " + v.get<std::string>());
  return *parsed;
}

void append_number(std::string& out, double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, end);
}

}  // namespace

ReportDocument make_report(const protocol::LabeledRun& run, const MethodConfig& method,
                           const protocol::ProtocolConfig& protocol, Timing timing) {
  ReportDocument report;
  report.method = method;
  report.method.top_k = protocol.top_k;
  report.protocol = protocol;
  report.counts = run.counts;
  report.metrics = metrics::summarize(run);
  report.curves = metrics::curves(run);
  report.timing = timing;
  report.predictions.reserve(run.predictions.size());
  for (const Prediction& p : run.predictions) {
    report.predictions.push_back({p.query_index, p.predicted_index, p.score, p.score_variance, p.uncertainty,
                                  p.correct, p.error_type, p.has_match, p.first_hit_rank});
  }
  return report;
}

protocol::LabeledRun to_labeled_run(const ReportDocument& report) {
  protocol::LabeledRun run;
  run.top_k = report.protocol.top_k;
  run.revisit_radius = report.protocol.revisit_radius;
  run.counts = report.counts;
  for (const QueryRecord& r : report.predictions) {
    Prediction p;
    p.query_index = r.query_index;
    p.predicted_index = r.predicted_index;
    p.score = r.score;
    p.score_variance = r.score_variance;
    p.uncertainty = r.uncertainty;
    p.correct = r.correct;
    p.error_type = r.error_type;
    p.has_match = r.has_match;
    p.first_hit_rank = r.first_hit_rank;
    run.predictions.push_back(std::move(p));
  }
  return run;
}

json to_json(const ReportDocument& report) {
  json predictions = json::array();
  for (const QueryRecord& r : report.predictions) {
    predictions.push_back({
        {"query_index", r.query_index},
        {"predicted_index", optional_json(r.predicted_index)},
        {"score", r.score},
        {"score_variance", r.score_variance},
        {"uncertainty", r.uncertainty},
        {"correct", r.correct},
        {"error_type", to_string(r.error_type)},
        {"has_match", r.has_match},
        {"first_hit_rank", optional_json(r.first_hit_rank)},
    });
  }
  json curves = json::array();
  for (const metrics::CurveSeries& c : report.curves) {
    json points = json::array();
    for (const metrics::CurvePoint& p : c.points) points.push_back({p.x, p.y});
    curves.push_back({{"kind", metrics::to_string(c.kind)}, {"points", std::move(points)}});
  }
  const auto& m = report.metrics;
  const auto& c = report.counts;
  return {
      {"format", kReportFormat},
      {"version", kReportVersion},
      {"method",
       {{"name", to_string(report.method.method)},
        {"top_k", report.method.top_k},
        {"uncertainty_source", to_string(report.method.uncertainty_source)},
        {"mls_convention", to_string(report.method.mls_convention)}}},
      {"protocol",
       {{"mode", to_string(report.protocol.mode)},
        {"revisit_radius", report.protocol.revisit_radius},
        {"exclusion_window", report.protocol.exclusion_window},
        {"top_k", report.protocol.top_k}}},
      {"queries_label", report.queries_label},
      {"database_label", report.database_label},
      {"counts",
       {{"total", c.total},
        {"with_match", c.with_match},
        {"correct", c.correct},
        {"incorrect_match", c.incorrect_match},
        {"no_match", c.no_match},
        {"skipped_empty_visible", c.skipped_empty_visible}}},
      {"metrics",
       {{"recall_at_1", optional_json(m.recall_at_1)},
        {"recall_at_k", m.recall_at_k},
        {"auroc", optional_json(m.auroc)},
        {"auroc_mixed_denominator", optional_json(m.auroc_mixed)},
        {"auer", optional_json(m.auer)}}},
      {"curves", std::move(curves)},
      {"predictions", std::move(predictions)},
      {"timing",
       {{"total_seconds", report.timing.total_seconds},
        {"ms_per_query", report.timing.ms_per_query},
        {"queries_per_second", report.timing.queries_per_second}}},
  };
}

ReportDocument report_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != kReportFormat) malformed("not a uapr report");
    if (doc.at("version").get<int>() != kReportVersion) {
      throw Error(ErrorCode::VersionUnsupported, "report version " + doc.at("version").dump());
    }
    ReportDocument r;
    const json& method = doc.at("method");
    r.method.method = parse_enum<Method>(method.at("name"), parse_method, "method");
    r.method.top_k = method.at("top_k").get<std::size_t>();
    r.method.uncertainty_source =
        parse_enum<UncertaintySource>(method.at("uncertainty_source"), parse_uncertainty_source, "uncertainty source");
    r.method.mls_convention =
        parse_enum<MlsConvention>(method.at("mls_convention"), parse_mls_convention, "MLS convention");
    const json& proto = doc.at("protocol");
    r.protocol.mode = parse_mode(proto.at("mode").get<std::string>());
    r.protocol.revisit_radius = proto.at("revisit_radius").get<double>();
    r.protocol.exclusion_window = proto.at("exclusion_window").get<double>();
    r.protocol.top_k = proto.at("top_k").get<std::size_t>();
    r.queries_label = doc.at("queries_label").get<std::string>();
    r.database_label = doc.at("database_label").get<std::string>();
    const json& c = doc.at("counts");
    r.counts = {c.at("total").get<std::size_t>(),           c.at("with_match").get<std::size_t>(),
                c.at("correct").get<std::size_t>(),         c.at("incorrect_match").get<std::size_t>(),
                c.at("no_match").get<std::size_t>(),        c.at("skipped_empty_visible").get<std::size_t>()};
    const json& m = doc.at("metrics");
    r.metrics.recall_at_1 = optional_from<double>(m.at("recall_at_1"));
    r.metrics.recall_at_k = m.at("recall_at_k").get<std::vector<double>>();
    r.metrics.auroc = optional_from<double>(m.at("auroc"));
    r.metrics.auroc_mixed = optional_from<double>(m.at("auroc_mixed_denominator"));
    r.metrics.auer = optional_from<double>(m.at("auer"));
    for (const json& curve : doc.at("curves")) {
      metrics::CurveSeries series;
      series.kind = parse_enum<metrics::CurveKind>(curve.at("kind"), metrics::parse_curve_kind, "curve kind");
      for (const json& p : curve.at("points")) series.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      r.curves.push_back(std::move(series));
    }
    for (const json& p : doc.at("predictions")) {
      QueryRecord q;
      q.query_index = p.at("query_index").get<std::size_t>();
      q.predicted_index = optional_from<std::size_t>(p.at("predicted_index"));
      q.score = p.at("score").get<double>();
      q.score_variance = p.at("score_variance").get<double>();
      q.uncertainty = p.at("uncertainty").get<double>();
      q.correct = p.at("correct").get<bool>();
      q.error_type = parse_enum<ErrorType>(p.at("error_type"), parse_error_type, "error type");
      q.has_match = p.at("has_match").get<bool>();
      q.first_hit_rank = optional_from<std::size_t>(p.at("first_hit_rank"));
      r.predictions.push_back(q);
    }
    const json& t = doc.at("timing");
    r.timing = {t.at("total_seconds").get<double>(), t.at("ms_per_query").get<double>(),
                t.at("queries_per_second").get<double>()};
    return r;
  } catch (const json::exception& e) {
    malformed(e.what());
  }
}

std::string format_curve_csv(const metrics::CurveSeries& curve) {
  std::string out = "x,y\n";
  for (const metrics::CurvePoint& p : curve.points) {
    append_number(out, p.x);
    out += ',';
    append_number(out, p.y);
    out += '\n';
  }
  return out;
}

metrics::CurveSeries parse_curve_csv(std::string_view text, metrics::CurveKind kind) {
  metrics::CurveSeries curve{kind, {}};
  bool header = true;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line == "x,y") continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) malformed("curve row without a comma");
    metrics::CurvePoint p;
    const auto rx = std::from_chars(line.data(), line.data() + comma, p.x);
    const auto ry = std::from_chars(line.data() + comma + 1, line.data() + line.size(), p.y);
    if (rx.ec != std::errc() || ry.ec != std::errc()) malformed("curve row is not numeric");
    curve.points.push_back(p);
  }
  return curve;
}

std::vector<std::filesystem::path> write_report(const ReportDocument& report,
                                                const std::filesystem::path& path, ReportFormat format) {
  const auto as_bytes = [](const std::string& s) {
    return std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  };
  if (format == ReportFormat::Structured) {
    const std::string text = to_json(report).dump(2) + "\n";
    write_bytes(path, as_bytes(text));
    return {path};
  }
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + path.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  for (const metrics::CurveSeries& curve : report.curves) {
    const auto file = path / (std::string(metrics::to_string(curve.kind)) + ".csv");
    write_bytes(file, as_bytes(format_curve_csv(curve)));
    written.push_back(file);
  }
  return written;
}

ReportDocument read_report(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  return report_from_json(doc);
}

synth::WorldSpec world_spec_from_json(const json& doc) {
  synth::WorldSpec spec;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::InvalidSpec, "worldspec must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "layout") {
        const auto name = value.get<std::string>();
        if (name == "batch") {
          spec.layout = synth::Layout::Batch;
        } else if (name == "session") {
          spec.layout = synth::Layout::Session;
        } else {
          throw Error(ErrorCode::InvalidSpec, "layout must be batch or session");
        }
      } else if (key == "dim") {
        spec.dim = value.get<std::size_t>();
      } else if (key == "places") {
        spec.places = value.get<std::size_t>();
      } else if (key == "queries") {
        spec.queries = value.get<std::size_t>();
      } else if (key == "novel_fraction") {
        spec.novel_fraction = value.get<double>();
      } else if (key == "noise_sigma") {
        spec.noise_sigma = value.get<double>();
      } else if (key == "noise_spread") {
        spec.noise_spread = value.get<double>();
      } else if (key == "members") {
        spec.members = value.get<std::size_t>();
      } else if (key == "probabilistic") {
        spec.probabilistic = value.get<bool>();
      } else if (key == "revisit_radius") {
        spec.revisit_radius = value.get<double>();
      } else if (key == "time_step") {
        spec.time_step = value.get<double>();
      } else if (key == "seed") {
        spec.seed = value.get<std::uint64_t>();
      } else {
        throw Error(ErrorCode::InvalidSpec, "unknown worldspec key " + key);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what());
  }
  synth::validate_spec(spec);
  return spec;
}

json to_json(const synth::WorldSpec& spec) {
  return {
      {"layout", spec.layout == synth::Layout::Batch ? "batch" : "session"},
      {"dim", spec.dim},
      {"places", spec.places},
      {"queries", spec.queries},
      {"novel_fraction", spec.novel_fraction},
      {"noise_sigma", spec.noise_sigma},
      {"noise_spread", spec.noise_spread},
      {"members", spec.members},
      {"probabilistic", spec.probabilistic},
      {"revisit_radius", spec.revisit_radius},
      {"time_step", spec.time_step},
      {"seed", spec.seed},
  };
}

}  // namespace uapr::io
