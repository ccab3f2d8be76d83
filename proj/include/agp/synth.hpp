#pragma once
// Deterministic synthetic world generation for offline runs and tests.
//
// Every item title carries its genre tokens in a bracket suffix, e.g.
// "The Crimson Saga [fantasy adventure]". Each user has a hidden genre
// preference (a dominant genre, a secondary one, a tertiary one) and a noise
// genre; histories follow archetype patterns whose difficulty scales with
// noise_rate. Baseline rankings place the held-out items uniformly at random
// among the k candidates. Identical specs produce byte-identical bundles.

#include "agp/dataset.hpp"

namespace agp {

DatasetBundle generate_synthetic_world(const SyntheticWorldSpec& spec);

}  // namespace agp
