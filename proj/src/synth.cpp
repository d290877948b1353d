#include "uapr/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <random>
#include <string>

namespace uapr::synth {

namespace {

// Places sit on a square grid with this many columns.
constexpr std::size_t kGridColumns = 16;
// Grid spacing in revisit radii; distinct places never fall inside each other's radius.
constexpr double kPlaceSpacing = 10.0;
constexpr float kVarianceFloor = 1e-6f;

class Generator {
 public:
  explicit Generator(const WorldSpec& spec) : spec_(spec), rng_(spec.seed) {}

  std::vector<double> latent() {
    std::vector<double> v(spec_.dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : v) {
        x = gauss_(rng_);
        norm += x * x;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
  }

  Pose place_pose(std::size_t place) const {
    const double spacing = kPlaceSpacing * spec_.revisit_radius;
    return {static_cast<double>(place % kGridColumns) * spacing,
            static_cast<double>(place / kGridColumns) * spacing, 0.0};
  }

  /// Uniform point in the disk of radius r/2 around the place, so any two
  /// observations of one place lie within the revisit radius of each other.
  Pose jittered_pose(std::size_t place) {
    Pose p = place_pose(place);
    const double radius = 0.5 * spec_.revisit_radius * std::sqrt(unit_(rng_));
    const double angle = 2.0 * std::numbers::pi * unit_(rng_);
    p[0] += radius * std::cos(angle);
    p[1] += radius * std::sin(angle);
    return p;
  }

  /// Appends one observation of `latent` to `set` (all members + variance).
  void observe(DescriptorSet& set, const std::vector<double>& latent) {
    const double scale = spec_.noise_sigma * (1.0 + spec_.noise_spread * (2.0 * unit_(rng_) - 1.0));
    std::vector<double> v(spec_.dim);
    for (std::size_t m = 0; m < spec_.members; ++m) {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (std::size_t l = 0; l < spec_.dim; ++l) {
          v[l] = latent[l] + scale * gauss_(rng_);
          norm += v[l] * v[l];
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (std::size_t l = 0; l < spec_.dim; ++l) {
        set.members[m].push_back(static_cast<float>(v[l] / norm));
      }
    }
    if (spec_.probabilistic) {
      const float variance = std::max(static_cast<float>(scale * scale), kVarianceFloor);
      set.variances.insert(set.variances.end(), spec_.dim, variance);
    }
    ++set.count;
  }

  std::size_t uniform_index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  const WorldSpec& spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

DescriptorSet empty_set(const WorldSpec& spec, std::string label) {
  DescriptorSet set;
  set.dim = spec.dim;
  set.members.resize(spec.members);
  set.label = std::move(label);
  return set;
}

/// Query slots in order: true for revisits, false for novel places, shuffled.
std::vector<bool> revisit_pattern(const WorldSpec& spec, Generator& gen) {
  const auto novel = static_cast<std::size_t>(
      std::llround(spec.novel_fraction * static_cast<double>(spec.queries)));
  std::vector<bool> pattern(spec.queries, true);
  std::fill(pattern.begin(), pattern.begin() + static_cast<std::ptrdiff_t>(novel), false);
  std::shuffle(pattern.begin(), pattern.end(), gen.rng());
  return pattern;
}

}  // namespace

void validate_spec(const WorldSpec& spec) {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); };
  if (spec.dim == 0) fail("dim must be >= 1");
  if (spec.places < 2) fail("places must be >= 2");
  if (spec.queries == 0) fail("queries must be >= 1");
  if (spec.members == 0) fail("members must be >= 1");
  if (spec.probabilistic && spec.members > 1) fail("probabilistic worlds must have one member");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) fail("noise_sigma must be >= 0");
  if (!(spec.noise_spread >= 0.0 && spec.noise_spread < 1.0)) fail("noise_spread must be in [0, 1)");
  if (!(spec.novel_fraction >= 0.0 && spec.novel_fraction <= 1.0)) fail("novel_fraction must be in [0, 1]");
  if (!(spec.revisit_radius > 0.0) || !std::isfinite(spec.revisit_radius)) fail("revisit_radius must be > 0");
  if (!(spec.time_step > 0.0) || !std::isfinite(spec.time_step)) fail("time_step must be > 0");
}

void apply_seed_override(WorldSpec& spec) {
  const char* value = std::getenv("UAPR_SEED");
  if (value == nullptr) return;
  std::uint64_t seed = 0;
  const char* end = value + std::strlen(value);
  const auto [ptr, ec] = std::from_chars(value, end, seed);
  if (ec == std::errc() && ptr == end && ptr != value) spec.seed = seed;
}

SyntheticWorld generate(const WorldSpec& spec) {
  validate_spec(spec);
  Generator gen(spec);
  std::vector<std::vector<double>> latents;
  latents.reserve(spec.places);
  for (std::size_t p = 0; p < spec.places; ++p) latents.push_back(gen.latent());
  const std::vector<bool> pattern = revisit_pattern(spec, gen);

  SyntheticWorld world;
  std::size_t next_novel = spec.places;
  // Picks the place for a second-phase observation and records its label.
  const auto pick = [&](bool revisit, PlaceLabels& labels) -> std::pair<std::vector<double>, std::size_t> {
    if (revisit) {
      const std::size_t place = gen.uniform_index(spec.places);
      labels.push_back(place);
      return {latents[place], place};
    }
    labels.push_back(std::nullopt);
    return {gen.latent(), next_novel++};
  };

  if (spec.layout == Layout::Batch) {
    DescriptorSet database = empty_set(spec, "synthetic-database");
    for (std::size_t p = 0; p < spec.places; ++p) {
      gen.observe(database, latents[p]);
      database.poses.push_back(gen.jittered_pose(p));
      world.database_places.push_back(p);
    }
    DescriptorSet queries = empty_set(spec, "synthetic-queries");
    for (bool revisit : pattern) {
      const auto [latent, place] = pick(revisit, world.query_places);
      gen.observe(queries, latent);
      queries.poses.push_back(gen.jittered_pose(place));
    }
    for (DescriptorSet* set : {&database, &queries}) {
      set->timestamps.assign(set->count, 0.0);
      set->has_poses = true;
    }
    world.database = validate_set(std::move(database));
    world.queries = validate_set(std::move(queries));
    return world;
  }

  DescriptorSet run = empty_set(spec, "synthetic-run");
  const auto stamp = [&] { run.timestamps.push_back(static_cast<double>(run.count) * spec.time_step); };
  for (std::size_t p = 0; p < spec.places; ++p) {
    stamp();
    gen.observe(run, latents[p]);
    run.poses.push_back(gen.jittered_pose(p));
    world.database_places.push_back(p);
  }
  for (bool revisit : pattern) {
    const auto [latent, place] = pick(revisit, world.database_places);
    stamp();
    gen.observe(run, latent);
    run.poses.push_back(gen.jittered_pose(place));
  }
  run.has_poses = true;
  run.has_timestamps = true;
  world.database = validate_set(std::move(run), ValidationMode::Session);
  world.queries = world.database;
  world.query_places = world.database_places;
  return world;
}

}  // namespace uapr::synth
