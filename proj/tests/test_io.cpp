#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tumorlab/energy_csv.hpp"
#include "tumorlab/initial_data.hpp"
#include "tumorlab/render.hpp"
#include "tumorlab/snapshot.hpp"

using namespace tumorlab;
namespace fs = std::filesystem;

namespace {

Grid plane(int nx, int ny, double L = 1.0) {
  const double len[] = {L, L};
  const int res[] = {nx, ny};
  return Grid::build(2, len, res);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tumorlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("snapshot round trip") {
  const Grid g = plane(8, 6, 2.0);
  InitialDataSpec spec;
  spec.phi_amplitude = 0.7;
  const Field f = make_initial_state(g, spec).phi;
  std::stringstream buf;
  write_snapshot(buf, f);
  CHECK(buf.str().substr(0, 8) == "TLSNAP01");
  const Field back = read_snapshot(buf);
  CHECK(back.grid == g);
  CHECK(back.values == f.values);

  std::stringstream bad("NOTSNAP!");
  CHECK_THROWS(read_snapshot(bad));
}

TEST_CASE("energy CSV round trip") {
  StepRecord r;
  r.t = 0.125;
  r.report.E = 1.0 / 3.0;
  r.report.D_mu = 2e-17;
  r.report.mass = -0.1;
  r.h1dual_phit = 7.5;
  std::stringstream csv;
  write_energy_csv_header(csv, 42);
  write_energy_csv_row(csv, r);
  CHECK(csv.str().rfind("# seed=42\nt,dt_used,E,", 0) == 0);
  const auto back = read_energy_csv(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].t == r.t);
  CHECK(back[0].report.E == r.report.E);
  CHECK(back[0].report.D_mu == r.report.D_mu);
  CHECK(back[0].report.mass == r.report.mass);
  CHECK(back[0].h1dual_phit == r.h1dual_phit);
}

TEST_CASE("heatmap rendering") {
  SUBCASE("constant field renders uniform") {
    const Heatmap m = make_heatmap(Field(plane(5, 4), 0.3));
    CHECK(m.width == 5);
    CHECK(m.height == 4);
    for (auto p : m.pixels) CHECK(p == m.pixels[0]);
    CHECK(m.min == 0.3);
    CHECK(m.max == 0.3);
  }
  SUBCASE("cosine along axis 0 is a monotone horizontal ramp") {
    const Grid g = plane(16, 8);
    Field f(g);
    for (std::size_t k = 0; k < g.size(); ++k) f[k] = std::cos(M_PI * g.node(0, g.unflatten(k)[0]));
    const Heatmap m = make_heatmap(f);
    for (int r = 0; r < m.height; ++r) {
      for (int c = 1; c < m.width; ++c) {
        CHECK(m.pixels[r * m.width + c] <= m.pixels[r * m.width + c - 1]);
        CHECK(m.pixels[r * m.width + c] == m.pixels[c]);
      }
    }
    CHECK(m.pixels.front() == 255);
    CHECK(m.pixels[m.width - 1] == 0);
  }
  SUBCASE("axis 1 points up and scale repeats pixels") {
    const Grid g = plane(4, 4);
    Field f(g);
    f[g.flatten({0, 3, 0})] = 1.0;  // top-left node
    RenderOptions opts;
    opts.scale = 3;
    const Heatmap m = make_heatmap(f, opts);
    CHECK(m.width == 12);
    CHECK(m.pixels[0] == 255);
    CHECK(m.pixels[2 * 12 + 2] == 255);
    CHECK(m.pixels[3 * 12 + 0] == 0);
  }
  SUBCASE("non-2D fields are rejected") {
    const double len[] = {1.0};
    const int res[] = {8};
    CHECK_THROWS_AS(make_heatmap(Field(Grid::build(1, len, res))), std::invalid_argument);
  }
  SUBCASE("files are deterministic and carry a sidecar") {
    InitialDataSpec spec;
    spec.phi_amplitude = 0.5;
    const Field f = make_initial_state(plane(32, 32), spec).phi;
    const fs::path dir = scratch_dir("render");
    const fs::path side = render_heatmap(f, dir / "a.png");
    render_heatmap(f, dir / "b.png");
    const auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string a = slurp(dir / "a.png");
    CHECK(a.substr(1, 3) == "PNG");
    CHECK(a == slurp(dir / "b.png"));
    CHECK(side == dir / "a.range.txt");
    CHECK(slurp(side).rfind("min = ", 0) == 0);
    fs::remove_all(dir);
  }
}

TEST_CASE("field CSV") {
  const Grid g = plane(4, 4);
  const fs::path dir = scratch_dir("fieldcsv");
  write_field_csv(dir / "f.csv", Field(g, 2.0));
  std::ifstream in(dir / "f.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#' && std::isdigit(static_cast<unsigned char>(line[0]))) ++rows;
  }
  CHECK(rows == g.size());
  fs::remove_all(dir);
}
