#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "uapr/types.hpp"

namespace uapr::synth {

enum class Layout {
  Batch,    // separate query and database traversals
  Session,  // one run: a first pass over every place, then revisits
};

/// Description of a synthetic world. Each place owns a random unit latent
/// vector; every observation is latent + isotropic Gaussian noise, then
/// renormalized. Observation noise scale is noise_sigma times a factor drawn
/// uniformly from [1 - noise_spread, 1 + noise_spread].
struct WorldSpec {
  Layout layout = Layout::Batch;
  std::size_t dim = 32;
  std::size_t places = 50;
  std::size_t queries = 100;  // batch: query count; session: observations after the first pass
  double novel_fraction = 0.0;
  double noise_sigma = 0.1;
  double noise_spread = 0.5;
  std::size_t members = 1;
  bool probabilistic = false;
  double revisit_radius = 25.0;
  double time_step = 10.0;  // seconds between consecutive session observations
  std::uint64_t seed = 0;
};

void validate_spec(const WorldSpec& spec);

/// Replaces spec.seed with the value of UAPR_SEED when that variable holds an
/// unsigned integer.
void apply_seed_override(WorldSpec& spec);

/// place id per entry; nullopt marks an observation of a place that never
/// appears in the database.
using PlaceLabels = std::vector<std::optional<std::size_t>>;

struct SyntheticWorld {
  DescriptorSet queries;
  DescriptorSet database;  // for Session, the run itself (queries holds the same run)
  PlaceLabels query_places;
  PlaceLabels database_places;
};

/// Deterministic for a given spec (including seed).
SyntheticWorld generate(const WorldSpec& spec);

}  // namespace uapr::synth
