#include "tumorlab/energy_csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tumorlab/format.hpp"

namespace tumorlab {

namespace {
constexpr std::size_t kColumns = 17;
}

void write_energy_csv_header(std::ostream& out, std::uint64_t seed) {
  out << "# seed=" << seed << '\n' << kEnergyCsvHeader << '\n';
}

void write_energy_csv_row(std::ostream& out, const StepRecord& r) {
  const EnergyReport& e = r.report;
  const std::array<double, kColumns> cols{r.t,          e.dt_used,  e.E,         e.gradient_term, e.potential_term,
                                          e.sigma_term, e.cross_term, e.D_mu,    e.D_N,           e.D_exchange,
                                          e.mass,       r.phi_min,  r.phi_max,   r.h1_phi,        r.l2_sigma,
                                          r.h1dual_phit, r.h1dual_sigmat};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << format_double(cols[i]);
  }
  out << '\n';
}

std::vector<StepRecord> read_energy_csv(std::istream& in) {
  std::vector<StepRecord> rows;
  std::string line;
  bool header_seen = false;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kEnergyCsvHeader) {
        throw std::runtime_error("energy CSV line " + std::to_string(lineno) + ": unexpected header");
      }
      header_seen = true;
      continue;
    }
    std::array<double, kColumns> v{};
    std::size_t col = 0, start = 0;
    while (true) {
      const std::size_t end = line.find(',', start);
      const std::string_view cell(line.data() + start, (end == std::string::npos ? line.size() : end) - start);
      if (col >= kColumns) {
        throw std::runtime_error("energy CSV line " + std::to_string(lineno) + ": too many columns");
      }
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v[col]);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw std::runtime_error("energy CSV line " + std::to_string(lineno) + ": bad number '" +
                                 std::string(cell) + "'");
      }
      ++col;
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (col != kColumns) {
      throw std::runtime_error("energy CSV line " + std::to_string(lineno) + ": expected " +
                               std::to_string(kColumns) + " columns, got " + std::to_string(col));
    }
    StepRecord r;
    EnergyReport& e = r.report;
    r.t = v[0];
    e.dt_used = v[1];
    e.E = v[2];
    e.gradient_term = v[3];
    e.potential_term = v[4];
    e.sigma_term = v[5];
    e.cross_term = v[6];
    e.D_mu = v[7];
    e.D_N = v[8];
    e.D_exchange = v[9];
    e.mass = v[10];
    r.phi_min = v[11];
    r.phi_max = v[12];
    r.h1_phi = v[13];
    r.l2_sigma = v[14];
    r.h1dual_phit = v[15];
    r.h1dual_sigmat = v[16];
    rows.push_back(r);
  }
  if (!header_seen) throw std::runtime_error("energy CSV has no header");
  return rows;
}

std::vector<StepRecord> read_energy_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_energy_csv(in);
}

}  // namespace tumorlab
