#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "tact/core/rng.hpp"
#include "tact/io/pfm.hpp"
#include "tact/io/pgm.hpp"
#include "tact/io/ply.hpp"
#include "tact/io/ppm.hpp"

using namespace tact;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "tact_io_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("pgm round trip") {
  const fs::path path = temp_dir() / "img.pgm";
  Rng rng(3);
  GrayImage img(33, 21);
  // values on the 8-bit lattice survive the round trip exactly
  for (double& v : img.data())
    v = static_cast<double>(uniform_index(rng, 256)) / 255.0;
  write_pgm(path, img);
  const GrayImage back = read_pgm(path);
  REQUIRE(back.width() == img.width());
  REQUIRE(back.height() == img.height());
  for (std::size_t i = 0; i < img.size(); ++i)
    REQUIRE(back.data()[i] == Catch::Approx(img.data()[i]).margin(1e-12));
}

TEST_CASE("pgm quantization rounds to nearest level") {
  const fs::path path = temp_dir() / "quant.pgm";
  GrayImage img(2, 1);
  img(0, 0) = 0.5;           // -> 128/255
  img(1, 0) = 1.0 / 255.0;   // exact level
  write_pgm(path, img);
  const GrayImage back = read_pgm(path);
  REQUIRE(back(0, 0) == Catch::Approx(128.0 / 255.0).margin(1e-12));
  REQUIRE(back(1, 0) == Catch::Approx(1.0 / 255.0).margin(1e-12));
}

TEST_CASE("pfm round trip is float32-exact") {
  const fs::path path = temp_dir() / "depth.pfm";
  Rng rng(4);
  Grid<double> depth(17, 9);
  for (double& v : depth.data())
    v = static_cast<double>(static_cast<float>(uniform_range(rng, 0.0, 5.0)));
  write_pfm(path, depth);
  const Grid<double> back = read_pfm(path);
  REQUIRE(back.width() == depth.width());
  REQUIRE(back.height() == depth.height());
  for (std::size_t i = 0; i < depth.size(); ++i)
    REQUIRE(back.data()[i] == depth.data()[i]);
}

TEST_CASE("pfm header is little-endian grayscale") {
  const fs::path path = temp_dir() / "hdr.pfm";
  write_pfm(path, Grid<double>(3, 2, 1.0));
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  int w, h;
  double scale;
  in >> magic >> w >> h >> scale;
  REQUIRE(magic == "Pf");
  REQUIRE(w == 3);
  REQUIRE(h == 2);
  REQUIRE(scale == -1.0);
}

TEST_CASE("ply vertex count and header") {
  const fs::path path = temp_dir() / "cloud.ply";
  std::vector<std::array<double, 3>> pts{{0, 0, 0}, {1.5, -2.0, 3.25}};
  write_ply(path, pts);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "ply");
  std::getline(in, line);
  REQUIRE(line == "format ascii 1.0");
  std::getline(in, line);
  REQUIRE(line == "element vertex 2");
}

TEST_CASE("ppm writes three channels") {
  const fs::path path = temp_dir() / "vis.ppm";
  RgbImage img{Grid<double>(4, 2, 1.0), Grid<double>(4, 2, 0.5),
               Grid<double>(4, 2, 0.0)};
  write_ppm(path, img);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  in >> magic;
  REQUIRE(magic == "P6");
}

TEST_CASE("reads reject wrong formats") {
  const fs::path path = temp_dir() / "bad.pgm";
  std::ofstream(path) << "P2\n1 1\n255\n0\n";
  REQUIRE_THROWS_AS(read_pgm(path), IoError);
  REQUIRE_THROWS_AS(read_pgm(temp_dir() / "missing.pgm"), IoError);
  REQUIRE_THROWS_AS(read_pfm(path), IoError);
}
