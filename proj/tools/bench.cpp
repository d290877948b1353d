// Serial reference drivers vs the OpenMP drivers on synthetic worlds.
// Prints per-method throughput and checks that both produce the same run.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uapr/protocol.hpp"
#include "uapr/synth.hpp"

using h_clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& f, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = h_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(h_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uapr serial-vs-parallel benchmark"};
  std::size_t places = 1000;
  std::size_t queries = 500;
  std::size_t dim = 256;
  std::size_t members = 5;
  int threads = 0;
  int repeats = 3;
  app.add_option("--places", places, "database size")->capture_default_str();
  app.add_option("--queries", queries, "query count")->capture_default_str();
  app.add_option("--dim", dim, "descriptor dimension")->capture_default_str();
  app.add_option("--members", members, "ensemble / dropout members")->capture_default_str();
  app.add_option("--threads", threads, "OpenMP threads, 0 = all")->capture_default_str();
  app.add_option("--repeats", repeats, "timing repeats (best is reported)")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  uapr::synth::WorldSpec spec;
  spec.dim = dim;
  spec.places = places;
  spec.queries = queries;
  spec.noise_sigma = 0.05;
  spec.seed = 7;

  spec.members = members;
  const auto multi = uapr::synth::generate(spec);
  spec.members = 1;
  spec.probabilistic = true;
  const auto prob = uapr::synth::generate(spec);

  struct Case {
    const char* name;
    uapr::Method method;
    const uapr::synth::SyntheticWorld* world;
  };
  const std::vector<Case> cases{
      {"standard", uapr::Method::Standard, &prob}, {"ppe", uapr::Method::PPE, &prob},
      {"stun", uapr::Method::STUN, &prob},         {"dropout", uapr::Method::Dropout, &multi},
      {"ensemble", uapr::Method::Ensemble, &multi},
  };

  const auto protocol = uapr::protocol::ProtocolConfig::batch_defaults();
  std::printf("places=%zu queries=%zu dim=%zu members=%zu\n", places, queries, dim, members);
  std::printf("%-10s %12s %12s %12s %10s %s\n", "method", "serial ms/q", "omp ms/q", "omp q/s", "speedup", "same");
  bool all_same = true;
  for (const Case& c : cases) {
    uapr::MethodConfig method;
    method.method = c.method;
    uapr::protocol::LabeledRun serial_run;
    uapr::protocol::LabeledRun parallel_run;
    const double serial_ms = time_ms(
        [&] { serial_run = uapr::protocol::serial::run_batch(c.world->queries, c.world->database, protocol, method); },
        repeats);
    const double parallel_ms = time_ms(
        [&] {
          parallel_run = uapr::protocol::run_batch(c.world->queries, c.world->database, protocol, method, {threads});
        },
        repeats);
    const bool same = serial_run == parallel_run;
    all_same = all_same && same;
    const double q = static_cast<double>(queries);
    std::printf("%-10s %12.4f %12.4f %12.1f %10.2f %s\n", c.name, serial_ms / q, parallel_ms / q,
                1000.0 * q / parallel_ms, serial_ms / parallel_ms, same ? "yes" : "NO");
  }
  return all_same ? 0 : 1;
}
