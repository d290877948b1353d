#include "uapr/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "uapr/descriptor_io.hpp"
#include "uapr/metrics.hpp"
#include "uapr/protocol.hpp"
#include "uapr/report.hpp"
#include "uapr/synth.hpp"

namespace uapr::cli {

namespace {

namespace fs = std::filesystem;

struct MethodFlags {
  std::string method;
  std::string source = "negative-mean";
  std::string convention = "difference";
  int threads = 0;

  MethodConfig config(std::size_t top_k) const {
    return {*parse_method(method), top_k, *parse_uncertainty_source(source), *parse_mls_convention(convention)};
  }
};

void add_method_flags(CLI::App* cmd, MethodFlags& flags) {
  cmd->add_option("--method", flags.method, "standard | ppe | stun | dropout | ensemble")
      ->required()
      ->check(CLI::IsMember({"standard", "ppe", "stun", "dropout", "ensemble"}));
  cmd->add_option("--uncertainty-source", flags.source, "dropout/ensemble: negative-mean | variance")
      ->check(CLI::IsMember({"negative-mean", "variance"}))
      ->capture_default_str();
  cmd->add_option("--mls-convention", flags.convention, "ppe: difference | sum-of-means")
      ->check(CLI::IsMember({"difference", "sum-of-means"}))
      ->capture_default_str();
  cmd->add_option("--threads", flags.threads, "worker threads, 0 = all available")
      ->check(CLI::NonNegativeNumber);
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream s;
  s.precision(6);
  s << *v;
  return s.str();
}

void print_summary(std::ostream& out, const std::string& title, const protocol::RunCounts& c,
                   const metrics::MetricSummary& m) {
  out << title << ": predictions=" << c.total - c.skipped_empty_visible << " skipped=" << c.skipped_empty_visible
      << " correct=" << c.correct << " incorrect_match=" << c.incorrect_match << " no_match=" << c.no_match
      << " R@1=" << format_optional(m.recall_at_1) << " AuROC=" << format_optional(m.auroc)
      << " AuROC(mixed)=" << format_optional(m.auroc_mixed) << " AuER=" << format_optional(m.auer)
      << '\n';
}

io::Timing timing_since(std::chrono::steady_clock::time_point start, std::size_t queries) {
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::Timing t;
  t.total_seconds = seconds;
  if (queries > 0) t.ms_per_query = 1000.0 * seconds / static_cast<double>(queries);
  if (seconds > 0.0) t.queries_per_second = static_cast<double>(queries) / seconds;
  return t;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uncertainty-aware place recognition evaluation engine", "uapr"};
  app.require_subcommand(1);

  MethodFlags batch_method;
  std::string batch_queries;
  std::string batch_database;
  std::string batch_out;
  protocol::ProtocolConfig batch = protocol::ProtocolConfig::batch_defaults();
  auto* eval_batch = app.add_subcommand("eval-batch", "Evaluate one query traversal against one database traversal");
  eval_batch->add_option("--queries", batch_queries, "query descriptor file")->required();
  eval_batch->add_option("--database", batch_database, "database descriptor file")->required();
  eval_batch->add_option("--radius", batch.revisit_radius, "revisit radius in meters")->capture_default_str();
  eval_batch->add_option("--top-k", batch.top_k, "candidates kept per query")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_batch->add_option("--out", batch_out, "report path (JSON)")->required();
  add_method_flags(eval_batch, batch_method);

  MethodFlags session_method;
  std::string session_run;
  std::string session_out;
  protocol::ProtocolConfig session = protocol::ProtocolConfig::session_defaults();
  auto* eval_session = app.add_subcommand("eval-session", "Online evaluation within a single run");
  eval_session->add_option("--run", session_run, "run descriptor file with timestamps")->required();
  eval_session->add_option("--exclusion", session.exclusion_window, "exclusion window in seconds")
      ->capture_default_str();
  eval_session->add_option("--radius", session.revisit_radius, "revisit radius in meters")->capture_default_str();
  eval_session->add_option("--top-k", session.top_k, "candidates kept per query")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_session->add_option("--out", session_out, "report path (JSON)")->required();
  add_method_flags(eval_session, session_method);

  std::string spec_path;
  std::string out_prefix;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic world from a worldspec document");
  synth_cmd->add_option("--spec", spec_path, "worldspec JSON file")->required();
  synth_cmd->add_option("--out-prefix", out_prefix, "prefix for the generated descriptor files")->required();

  std::string curves_report;
  std::string curves_dir;
  auto* curves_cmd = app.add_subcommand("curves", "Write every curve of a report as CSV");
  curves_cmd->add_option("--report", curves_report, "report JSON")->required();
  curves_cmd->add_option("--out-dir", curves_dir, "output directory")->required();

  std::string split_report;
  std::string split_dir;
  auto* split_cmd = app.add_subcommand("split-errors", "Per-error-type reports (incorrect match / no match)");
  split_cmd->add_option("--report", split_report, "report JSON")->required();
  split_cmd->add_option("--out-dir", split_dir, "output directory")->required();

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (eval_batch->parsed()) {
      const DescriptorSet queries = io::read_descriptor_file(batch_queries);
      const DescriptorSet database = io::read_descriptor_file(batch_database);
      const MethodConfig method = batch_method.config(batch.top_k);
      const auto start = std::chrono::steady_clock::now();
      const protocol::LabeledRun run =
          protocol::run_batch(queries, database, batch, method, {batch_method.threads});
      io::ReportDocument report =
          io::make_report(run, method, batch, timing_since(start, run.predictions.size()));
      report.queries_label = queries.label;
      report.database_label = database.label;
      io::write_report(report, batch_out);
      print_summary(out, std::string(to_string(method.method)), report.counts, report.metrics);
    } else if (eval_session->parsed()) {
      const DescriptorSet run_set = io::read_descriptor_file(session_run);
      const MethodConfig method = session_method.config(session.top_k);
      const auto start = std::chrono::steady_clock::now();
      const protocol::LabeledRun run = protocol::run_session(run_set, session, method, {session_method.threads});
      io::ReportDocument report =
          io::make_report(run, method, session, timing_since(start, run.predictions.size()));
      report.queries_label = run_set.label;
      report.database_label = run_set.label;
      io::write_report(report, session_out);
      print_summary(out, std::string(to_string(method.method)), report.counts, report.metrics);
    } else if (synth_cmd->parsed()) {
      const std::vector<std::uint8_t> bytes = io::read_bytes(spec_path);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, e.what());
      }
      synth::WorldSpec spec = io::world_spec_from_json(doc);
      synth::apply_seed_override(spec);
      const synth::SyntheticWorld world = synth::generate(spec);
      if (spec.layout == synth::Layout::Batch) {
        io::write_descriptor_file(world.queries, out_prefix + "queries.uapr");
        io::write_descriptor_file(world.database, out_prefix + "database.uapr");
        out << "wrote " << out_prefix << "queries.uapr (" << world.queries.count << " entries) and " << out_prefix
            << "database.uapr (" << world.database.count << " entries)\n";
      } else {
        io::write_descriptor_file(world.database, out_prefix + "run.uapr");
        out << "wrote " << out_prefix << "run.uapr (" << world.database.count << " entries)\n";
      }
    } else if (curves_cmd->parsed()) {
      const io::ReportDocument report = io::read_report(curves_report);
      for (const fs::path& p : io::write_report(report, curves_dir, io::ReportFormat::CsvCurves)) {
        out << "wrote " << p.string() << '\n';
      }
    } else if (split_cmd->parsed()) {
      const io::ReportDocument report = io::read_report(split_report);
      const protocol::ErrorSplit split = protocol::split_by_error_type(io::to_labeled_run(report));
      std::error_code ec;
      fs::create_directories(split_dir, ec);
      if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + split_dir + ": " + ec.message());
      const std::pair<const char*, const protocol::LabeledRun*> parts[] = {
          {"incorrect_match", &split.incorrect_match}, {"no_match", &split.no_match}};
      for (const auto& [name, sub] : parts) {
        io::ReportDocument sub_report = io::make_report(*sub, report.method, report.protocol);
        sub_report.queries_label = report.queries_label;
        sub_report.database_label = report.database_label;
        io::write_report(sub_report, fs::path(split_dir) / (std::string(name) + ".json"));
        print_summary(out, name, sub_report.counts, sub_report.metrics);
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace uapr::cli
