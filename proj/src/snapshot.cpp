#include "tumorlab/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "tumorlab/format.hpp"

namespace tumorlab {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

namespace {

template <class T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> buf{};
  std::memcpy(buf.data(), &value, sizeof(T));
  out.write(buf.data(), buf.size());
}

template <class T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> buf{};
  in.read(buf.data(), buf.size());
  if (!in) throw std::runtime_error("snapshot truncated");
  T value;
  std::memcpy(&value, buf.data(), sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(std::ostream& out, const Field& field) {
  out.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  const Grid& g = field.grid;
  put<std::int32_t>(out, g.dims());
  for (int a = 0; a < g.dims(); ++a) put<double>(out, g.length(a));
  for (int a = 0; a < g.dims(); ++a) put<std::int32_t>(out, g.resolution(a));
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing snapshot");
}

Field read_snapshot(std::istream& in) {
  std::array<char, kSnapshotMagic.size()> magic{};
  in.read(magic.data(), magic.size());
  if (!in || std::string_view(magic.data(), magic.size()) != kSnapshotMagic) {
    throw std::runtime_error("not a field snapshot (bad magic)");
  }
  const auto dims = get<std::int32_t>(in);
  if (dims < 1 || dims > kMaxDims) throw std::runtime_error("snapshot has invalid dims");
  std::vector<double> lengths(dims);
  std::vector<int> res(dims);
  for (auto& l : lengths) l = get<double>(in);
  for (auto& r : res) r = get<std::int32_t>(in);
  const Grid grid = Grid::build(dims, lengths, res);
  std::vector<double> values(grid.size());
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("snapshot truncated");
  return Field(grid, std::move(values));
}

void write_snapshot(const std::filesystem::path& path, const Field& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_snapshot(out, field);
}

Field read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_snapshot(in);
}

void write_field_csv(const std::filesystem::path& path, const Field& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const Grid& g = field.grid;
  static constexpr std::array<const char*, kMaxDims> names{"i0", "i1", "i2"};
  for (int a = 0; a < g.dims(); ++a) out << names[a] << ',';
  out << "value\n";
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const auto idx = g.unflatten(flat);
    for (int a = 0; a < g.dims(); ++a) out << idx[a] << ',';
    out << format_double(field.values[flat]) << '\n';
  }
}

}  // namespace tumorlab
