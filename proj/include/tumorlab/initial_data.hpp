#pragma once

#include <cstdint>
#include <string>

#include "tumorlab/solver.hpp"

namespace tumorlab {

enum class InitialGenerator { Constant, Random, Bump, Checkerboard, Cosine };

struct InitialDataSpec {
  InitialGenerator generator = InitialGenerator::Random;
  double phi_mean = 0.0;
  double phi_amplitude = 0.01;
  double sigma_mean = 0.1;
  double sigma_amplitude = 0.0;
  /// Bump radius as a fraction of the smallest side length.
  double radius = 0.25;
  /// Interface width of the tanh bump.
  double width = 1.0;
  /// Tiles per axis (checkerboard) or mode index per axis (cosine).
  int count = 2;
  std::uint64_t seed = 1;

  bool operator==(const InitialDataSpec&) const = default;
};

std::string to_string(InitialGenerator g);
InitialGenerator initial_generator_from_string(const std::string& name);

/// Deterministic in the seed on every platform: the uniform variates come
/// from the top 53 bits of std::mt19937_64.
State make_initial_state(const Grid& grid, const InitialDataSpec& spec);

}  // namespace tumorlab
