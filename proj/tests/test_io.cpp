#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jumpom/io.hpp"

using namespace jumpom;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "jumpom_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::size_t count_lines(const std::string& s) {
  std::istringstream is(s);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("path CSV round trip keeps every bit") {
  DiscretePath p;
  p.t = uniform_time_grid(0.3, 3);
  p.x.resize(4, 2);
  p.x << 0.1, -1.0 / 3.0, 1e-300, 2.5, std::nextafter(1.0, 2.0), -0.0, 7.0, 1.0 / 7.0;
  p.jumps.push_back({0.15, make_vec({0.2, 0.0})});

  const std::string text = io::path_csv(p);
  CHECK(text.rfind("t,x1,x2,jump_flag\n", 0) == 0);
  CHECK(count_lines(text) == 5);

  const fs::path f = scratch("path.csv");
  io::write_path_csv(f, p);
  const DiscretePath q = io::read_path_csv(f);
  REQUIRE(q.t.size() == 4);
  REQUIRE(q.dim() == 2);
  for (std::size_t i = 0; i < 4; ++i) CHECK(q.t[i] == p.t[i]);
  CHECK((q.x.array() == p.x.array()).all());
  CHECK(std::signbit(q.x(2, 1)));
}

TEST_CASE("jump flag marks the interval that holds the jump") {
  DiscretePath p;
  p.t = {0.0, 0.1, 0.2, 0.3};
  p.x = Eigen::MatrixXd::Zero(4, 1);
  p.jumps.push_back({0.2, make_vec({0.5})});   // right end of (0.1, 0.2]
  p.jumps.push_back({0.25, make_vec({0.1})});
  std::istringstream is(io::path_csv(p));
  std::string line;
  std::vector<char> flags;
  std::getline(is, line);
  while (std::getline(is, line)) flags.push_back(line.back());
  CHECK(flags == std::vector<char>{'0', '0', '1', '1'});
}

TEST_CASE("density grid binary round trip") {
  SpatialGrid g{2, make_vec({-1.0, -2.0}), make_vec({1.0, 2.0}), 5};
  DensityField f(g, make_vec({0.1, -0.2}), 1e-3);
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(25, 0.0, 1.0);
  f.push_slice(0.0, a, 0.0);
  f.push_slice(0.5, a.array().square(), 1e-7);

  const fs::path file = scratch("density.bin");
  io::write_density_grid(file, f);
  {
    std::ifstream is(file, std::ios::binary);
    char magic[4];
    is.read(magic, 4);
    CHECK(std::memcmp(magic, "JOMG", 4) == 0);
  }
  const DensityField r = io::read_density_grid(file);
  CHECK(r.grid().dim == 2);
  CHECK(r.grid().nodes == 5);
  CHECK(r.epsilon() == 1e-3);
  CHECK((r.x0().array() == f.x0().array()).all());
  REQUIRE(r.slices() == 2);
  CHECK(r.times() == f.times());
  CHECK(r.clipped_mass(1) == 1e-7);
  CHECK((r.slice(1).array() == f.slice(1).array()).all());

  CHECK(count_lines(io::density_csv(f, {0, 1})) == 1 + 2 * 25);
}

TEST_CASE("corrupt or missing files") {
  const fs::path bad = scratch("bad.bin");
  io::write_text(bad, "NOPE0000");
  CHECK_THROWS_AS(io::read_density_grid(bad), Error);
  CHECK_THROWS_AS(io::read_density_grid(scratch("does_not_exist.bin")), Error);

  const fs::path csv = scratch("bad.csv");
  io::write_text(csv, "time,x1\n0,1\n");
  CHECK_THROWS_AS(io::read_path_csv(csv), Error);
  io::write_text(csv, "t,x1\n0,abc\n");
  CHECK_THROWS_AS(io::read_path_csv(csv), Error);
}

TEST_CASE("marginals CSV layout") {
  Eigen::MatrixXd s0(3, 1), s1(3, 1);
  s0 << 1, 2, 3;
  s1 << 4, 5, 6;
  const std::string text = io::marginals_csv({0.5, 1.0}, {s0, s1});
  CHECK(text.rfind("t,path,x1\n", 0) == 0);
  CHECK(count_lines(text) == 7);
  CHECK(text.find("1,2,6\n") != std::string::npos);
}

TEST_CASE("hash and number formatting") {
  CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::hex64(0xabcULL) == "0000000000000abc");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(0.1) == "0.1");
}
