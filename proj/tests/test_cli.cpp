#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "uapr/cli.hpp"
#include "uapr/descriptor_io.hpp"
#include "uapr/report.hpp"

using namespace uapr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("uapr_cli_" + std::to_string(std::random_device{}()) + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "uapr");
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = cli::cli_main(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("synth then eval-batch") {
  TempDir dir;
  write_text(dir.path / "spec.json", R"({"places": 20, "queries": 40, "noise_sigma": 0.3, "seed": 5, "members": 3})");
  const std::string prefix = (dir.path / "w_").string();
  const Outcome s = run({"synth", "--spec", (dir.path / "spec.json").string(), "--out-prefix", prefix});
  REQUIRE(s.code == cli::kExitOk);
  REQUIRE(fs::exists(prefix + "queries.uapr"));
  REQUIRE(fs::exists(prefix + "database.uapr"));

  for (const char* method : {"standard", "ensemble", "dropout"}) {
    CAPTURE(method);
    const fs::path out = dir.path / (std::string(method) + ".json");
    const Outcome e = run({"eval-batch", "--queries", prefix + "queries.uapr", "--database", prefix + "database.uapr",
                           "--method", method, "--out", out.string()});
    CHECK(e.code == cli::kExitOk);
    CHECK(e.err.empty());
    const io::ReportDocument report = io::read_report(out);
    CHECK(report.predictions.size() == 40);
    CHECK(report.protocol.revisit_radius == 25.0);
    CHECK(report.protocol.top_k == 25);
    CHECK(report.queries_label == "synthetic-queries");
  }

  const Outcome variance = run({"eval-batch", "--queries", prefix + "queries.uapr", "--database",
                                prefix + "database.uapr", "--method", "ensemble", "--uncertainty-source", "variance",
                                "--threads", "2", "--radius", "30", "--top-k", "5", "--out",
                                (dir.path / "v.json").string()});
  CHECK(variance.code == cli::kExitOk);
  const io::ReportDocument v = io::read_report(dir.path / "v.json");
  CHECK(v.method.uncertainty_source == UncertaintySource::SimilarityVariance);
  CHECK(v.protocol.revisit_radius == 30.0);
  CHECK(v.protocol.top_k == 5);

  // Re-running the same command reproduces everything except timing.
  const fs::path again = dir.path / "standard_again.json";
  run({"eval-batch", "--queries", prefix + "queries.uapr", "--database", prefix + "database.uapr", "--method",
       "standard", "--out", again.string()});
  io::ReportDocument r1 = io::read_report(dir.path / "standard.json");
  io::ReportDocument r2 = io::read_report(again);
  r1.timing = {};
  r2.timing = {};
  CHECK(r1 == r2);
}

TEST_CASE("usage errors exit 1") {
  TempDir dir;
  const Outcome unknown = run({"eval-batch", "--queries", "q.uapr", "--database", "d.uapr", "--method", "bogus",
                               "--out", "r.json"});
  CHECK(unknown.code == cli::kExitUsage);
  CHECK(unknown.err.find("--method") != std::string::npos);
  CHECK(unknown.err.find("Usage") != std::string::npos);

  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"eval-batch", "--queries", "q.uapr"}).code == cli::kExitUsage);
  CHECK(run({"eval-batch", "--queries", "q", "--database", "d", "--method", "standard", "--out", "r", "--top-k",
             "many"})
            .code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("data errors exit 2") {
  TempDir dir;
  write_text(dir.path / "spec.json", R"({"places": 10, "queries": 10})");
  const std::string prefix = (dir.path / "b_").string();
  REQUIRE(run({"synth", "--spec", (dir.path / "spec.json").string(), "--out-prefix", prefix}).code == 0);

  const Outcome no_time = run({"eval-session", "--run", prefix + "queries.uapr", "--method", "standard", "--out",
                               (dir.path / "s.json").string()});
  CHECK(no_time.code == cli::kExitData);
  CHECK(no_time.err.find("MissingTimestamps") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "s.json"));

  const Outcome missing = run({"eval-batch", "--queries", (dir.path / "nope.uapr").string(), "--database",
                               prefix + "database.uapr", "--method", "standard", "--out", "x.json"});
  CHECK(missing.code == cli::kExitData);

  const Outcome wrong_kind = run({"eval-batch", "--queries", prefix + "queries.uapr", "--database",
                                  prefix + "database.uapr", "--method", "ppe", "--out", "x.json"});
  CHECK(wrong_kind.code == cli::kExitData);
  CHECK(wrong_kind.err.find("MethodDataMismatch") != std::string::npos);

  write_text(dir.path / "bad_spec.json", R"({"places": 1})");
  const Outcome bad_spec = run({"synth", "--spec", (dir.path / "bad_spec.json").string(), "--out-prefix", prefix});
  CHECK(bad_spec.code == cli::kExitData);
  CHECK(bad_spec.err.find("InvalidSpec") != std::string::npos);

  write_text(dir.path / "broken.json", "{");
  CHECK(run({"synth", "--spec", (dir.path / "broken.json").string(), "--out-prefix", prefix}).code == cli::kExitData);
}

TEST_CASE("session pipeline, curves and split-errors") {
  TempDir dir;
  write_text(dir.path / "spec.json",
             R"({"layout": "session", "places": 25, "queries": 60, "noise_sigma": 0.35, "novel_fraction": 0.2,
                 "revisit_radius": 10, "seed": 2})");
  const std::string prefix = (dir.path / "s_").string();
  REQUIRE(run({"synth", "--spec", (dir.path / "spec.json").string(), "--out-prefix", prefix}).code == 0);
  REQUIRE(fs::exists(prefix + "run.uapr"));

  const fs::path report_path = dir.path / "session.json";
  const Outcome e =
      run({"eval-session", "--run", prefix + "run.uapr", "--method", "standard", "--out", report_path.string()});
  REQUIRE(e.code == cli::kExitOk);
  const io::ReportDocument report = io::read_report(report_path);
  CHECK(report.protocol.mode == protocol::Mode::Session);
  CHECK(report.protocol.revisit_radius == 10.0);
  CHECK(report.protocol.exclusion_window == 90.0);
  CHECK(report.counts.skipped_empty_visible > 0);

  const fs::path curves = dir.path / "curves";
  REQUIRE(run({"curves", "--report", report_path.string(), "--out-dir", curves.string()}).code == 0);
  CHECK(fs::exists(curves / "roc.csv"));
  CHECK(fs::exists(curves / "error_rejection.csv"));
  CHECK(slurp(curves / "roc.csv").rfind("x,y\n", 0) == 0);

  const fs::path split = dir.path / "split";
  const Outcome s = run({"split-errors", "--report", report_path.string(), "--out-dir", split.string()});
  REQUIRE(s.code == cli::kExitOk);
  const io::ReportDocument incorrect = io::read_report(split / "incorrect_match.json");
  const io::ReportDocument no_match = io::read_report(split / "no_match.json");
  CHECK(incorrect.counts.no_match == 0);
  CHECK(no_match.counts.incorrect_match == 0);
  CHECK(incorrect.counts.correct == report.counts.correct);
  CHECK(no_match.counts.correct == report.counts.correct);
  CHECK(incorrect.counts.incorrect_match == report.counts.incorrect_match);
  CHECK(no_match.counts.no_match == report.counts.no_match);

  CHECK(run({"curves", "--report", (dir.path / "missing.json").string(), "--out-dir", curves.string()}).code ==
        cli::kExitData);
}

TEST_CASE("installed binary reports exit codes") {
  TempDir dir;
  const std::string exe = UAPR_CLI_PATH;
  const auto status = [](const std::string& cmd) {
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  write_text(dir.path / "spec.json", R"({"places": 8, "queries": 12})");
  const std::string prefix = (dir.path / "x_").string();
  CHECK(status(exe + " synth --spec " + (dir.path / "spec.json").string() + " --out-prefix " + prefix +
               " > /dev/null") == 0);
  CHECK(status(exe + " eval-batch --queries " + prefix + "queries.uapr --database " + prefix +
               "database.uapr --method standard --out " + (dir.path / "r.json").string() + " > /dev/null") == 0);
  CHECK(status(exe + " eval-batch --queries " + prefix + "queries.uapr --database " + prefix +
               "database.uapr --method nope --out r.json 2> /dev/null") == 1);
  CHECK(status(exe + " eval-session --run " + prefix + "queries.uapr --method standard --out " +
               (dir.path / "s.json").string() + " 2> /dev/null") == 2);
}
