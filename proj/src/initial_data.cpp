#include "tumorlab/initial_data.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tumorlab {

std::string to_string(InitialGenerator g) {
  switch (g) {
    case InitialGenerator::Constant: return "constant";
    case InitialGenerator::Random: return "random";
    case InitialGenerator::Bump: return "bump";
    case InitialGenerator::Checkerboard: return "checkerboard";
    case InitialGenerator::Cosine: return "cosine";
  }
  return "random";
}

InitialGenerator initial_generator_from_string(const std::string& name) {
  for (auto g : {InitialGenerator::Constant, InitialGenerator::Random, InitialGenerator::Bump,
                 InitialGenerator::Checkerboard, InitialGenerator::Cosine}) {
    if (to_string(g) == name) return g;
  }
  throw std::invalid_argument("unknown initial-data generator '" + name +
                              "' (expected constant, random, bump, checkerboard or cosine)");
}

namespace {

// Uniform on [-1, 1).
double symmetric_unit(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

}  // namespace

State make_initial_state(const Grid& grid, const InitialDataSpec& spec) {
  Field phi(grid, spec.phi_mean);
  Field sigma(grid, spec.sigma_mean);
  std::mt19937_64 rng(spec.seed);

  switch (spec.generator) {
    case InitialGenerator::Constant:
      break;
    case InitialGenerator::Random:
      for (std::size_t i = 0; i < grid.size(); ++i) phi[i] += spec.phi_amplitude * symmetric_unit(rng);
      break;
    case InitialGenerator::Bump: {
      double min_len = grid.length(0);
      for (int a = 1; a < grid.dims(); ++a) min_len = std::min(min_len, grid.length(a));
      const double radius = spec.radius * min_len;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unflatten(i);
        double r2 = 0.0;
        for (int a = 0; a < grid.dims(); ++a) {
          const double dx = grid.node(a, idx[a]) - 0.5 * grid.length(a);
          r2 += dx * dx;
        }
        phi[i] += spec.phi_amplitude * std::tanh((radius - std::sqrt(r2)) / (std::sqrt(2.0) * spec.width));
      }
      break;
    }
    case InitialGenerator::Checkerboard:
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unflatten(i);
        long parity = 0;
        for (int a = 0; a < grid.dims(); ++a) parity += idx[a] * spec.count / grid.resolution(a);
        phi[i] += (parity % 2 == 0 ? 1.0 : -1.0) * spec.phi_amplitude;
      }
      break;
    case InitialGenerator::Cosine:
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto idx = grid.unflatten(i);
        double v = 1.0;
        for (int a = 0; a < grid.dims(); ++a) v *= std::cos(grid.wavenumber(a, spec.count) * grid.node(a, idx[a]));
        phi[i] += spec.phi_amplitude * v;
      }
      break;
  }
  if (spec.sigma_amplitude != 0.0) {
    for (std::size_t i = 0; i < grid.size(); ++i) sigma[i] += spec.sigma_amplitude * symmetric_unit(rng);
  }
  return State(0.0, std::move(phi), std::move(sigma));
}

}  // namespace tumorlab
