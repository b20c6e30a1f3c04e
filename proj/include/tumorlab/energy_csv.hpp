#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tumorlab/solver.hpp"

namespace tumorlab {

inline constexpr const char* kEnergyCsvHeader =
    "t,dt_used,E,gradient_term,potential_term,sigma_term,cross_term,D_mu,D_N,D_exchange,mass,"
    "phi_min,phi_max,h1_phi,l2_sigma,h1dual_phit,h1dual_sigmat";

/// Comment line carrying the seed, then the column header.
void write_energy_csv_header(std::ostream& out, std::uint64_t seed);
void write_energy_csv_row(std::ostream& out, const StepRecord& rec);

/// Throws std::runtime_error naming the offending line on malformed input.
std::vector<StepRecord> read_energy_csv(std::istream& in);
std::vector<StepRecord> read_energy_csv(const std::filesystem::path& path);

}  // namespace tumorlab
