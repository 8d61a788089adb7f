#include <doctest.h>

#include <clocale>
#include <filesystem>
#include <sstream>
#include <string>

#include "lapdmd/error.hpp"
#include "lapdmd/io.hpp"
#include "lapdmd/rng.hpp"

using namespace lapdmd;
namespace fs = std::filesystem;

namespace {

std::string expect_error(const std::string& text) {
  try {
    parse_csv(text, "t.csv");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    return e.what();
  }
  FAIL("expected a validation error");
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lapdmd_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<int> pgm_pixels(const std::string& pgm) {
  std::istringstream in(pgm);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P2");
  CHECK(maxval == 255);
  std::vector<int> px(std::size_t(w * h));
  for (auto& p : px) in >> p;
  return px;
}

}  // namespace

TEST_CASE("CSV basic parse") {
  const DataMatrix m = parse_csv("1,2\n3,4\n");
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m.values(0, 0) == 1.0);
  CHECK(m.values(0, 1) == 2.0);
  CHECK(m.values(1, 0) == 3.0);
  CHECK(m.values(1, 1) == 4.0);
  CHECK(parse_csv("1,2\r\n3,4").values == m.values);
  CHECK(parse_csv(" 1 , \"2\"\n3,4\n\n").values == m.values);
}

TEST_CASE("CSV header detection") {
  const DataMatrix m = parse_csv("t0,t1\n1.5,-2e-3\n");
  CHECK(m.rows() == 1);
  CHECK(m.time_labels == std::vector<std::string>{"t0", "t1"});
  CHECK(m.values(0, 1) == -2e-3);
}

TEST_CASE("CSV errors name the location") {
  CHECK(expect_error("1,2\n3\n").find("line 2") != std::string::npos);
  const std::string bad = expect_error("1,2\n3,x\n");
  CHECK(bad.find("line 2") != std::string::npos);
  CHECK(bad.find("column 2") != std::string::npos);
  CHECK(expect_error("1,2\n3,nan\n").find("line 2") != std::string::npos);
  CHECK(expect_error("1,inf\n").find("column 2") != std::string::npos);
  expect_error("");
  expect_error("a,b\n");
}

TEST_CASE("CSV output is locale independent and round-trips") {
  Rng rng(3);
  Matrix m(3, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (rng.uniform() - 0.5) * std::pow(10.0, double(i % 7) - 3);
  m(0, 0) = 0.1;
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  const std::string text = format_csv(m);
  std::setlocale(LC_NUMERIC, "C");
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(parse_csv(text).values == m);
  const std::string with_header = format_csv(m, {"a", "b", "c", "d"});
  CHECK(with_header.rfind("a,b,c,d\n", 0) == 0);
  CHECK(parse_csv(with_header).values == m);
}

TEST_CASE("CSV files") {
  const fs::path p = scratch("m.csv");
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  save_csv(m, p);
  CHECK(load_csv(p).values == m);
  try {
    load_csv(scratch("missing.csv"));
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(parse_double("1e-3") == 1e-3);
  CHECK_THROWS_AS(parse_double("1.2.3"), Error);
}

TEST_CASE("PGM encoding") {
  Matrix grid(2, 2);
  grid << 0, 1, 2, 3;
  const std::string pgm = encode_pgm(grid);
  CHECK(pgm.rfind("P2\n2 2\n255\n", 0) == 0);
  CHECK(pgm_pixels(pgm) == std::vector<int>{0, 85, 170, 255});

  for (int p : pgm_pixels(encode_pgm(Matrix::Constant(3, 5, -4.2)))) CHECK(p == 128);

  Rng rng(8);
  Matrix r(4, 6);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = rng.normal();
  Eigen::Index rmin, cmin, rmax, cmax;
  r.minCoeff(&rmin, &cmin);
  r.maxCoeff(&rmax, &cmax);
  const auto px = pgm_pixels(encode_pgm(r));
  CHECK(px[std::size_t(rmin * 6 + cmin)] == 0);
  CHECK(px[std::size_t(rmax * 6 + cmax)] == 255);
  CHECK(encode_pgm(r) == encode_pgm(r));

  Matrix bad = grid;
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(encode_pgm(bad), Error);
  save_heatmap_pgm(grid, scratch("g.pgm"));
  CHECK(read_text(scratch("g.pgm")) == pgm);
}

TEST_CASE("config parsing") {
  const Config cfg = Config::parse(
      "# comment\n"
      "name = demo  # trailing\n"
      "sampling.seed = 7\n"
      "kernels = laplacian, grbf\n"
      "flag = yes\n"
      "x = 2.5\n");
  CHECK(cfg.get_string("name", "") == "demo");
  CHECK(cfg.get_int("sampling.seed", 0) == 7);
  CHECK(cfg.get_list("kernels", {}) == std::vector<std::string>{"laplacian", "grbf"});
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_double("x", 0.0) == 2.5);
  CHECK(cfg.get_double("missing", 4.0) == 4.0);
  CHECK_FALSE(cfg.has("missing"));
  CHECK_THROWS_AS(cfg.get_int("name", 0), Error);
  CHECK_THROWS_AS(Config::parse("just a line\n"), Error);
  CHECK_THROWS_AS(Config::parse("= value\n"), Error);
}

TEST_CASE("config files resolve their directory") {
  const fs::path p = scratch("c.cfg");
  write_text(p, "a = 1\n");
  const Config cfg = Config::load(p);
  CHECK(cfg.base_dir() == p.parent_path());
  CHECK_THROWS_AS(Config::load(scratch("none.cfg")), Error);
}

TEST_CASE("model serialization round-trips") {
  Rng rng(5);
  Matrix x(2, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  const Matrix y = 0.6 * x;
  const KedmdModel model = fit(x, y, KernelSpec::grbf(0.7));
  const std::string text = serialize_model(model);
  CHECK(text.rfind("lapdmd-model-version=1", 0) == 0);
  const KedmdModel back = deserialize_model(text);
  CHECK(back.rank == model.rank);
  CHECK(back.kernel.name() == model.kernel.name());
  CHECK(back.kernel.sigma == model.kernel.sigma);
  CHECK(back.eigenvalues == model.eigenvalues);
  CHECK(back.modes == model.modes);
  CHECK(back.eigfun_coeffs == model.eigfun_coeffs);
  CHECK(back.training_states == model.training_states);
  for (std::size_t m : {0u, 3u, 7u}) CHECK(reconstruct(back, m).values == reconstruct(model, m).values);
  CHECK(serialize_model(back) == text);

  save_model(model, scratch("model.txt"));
  CHECK(load_model(scratch("model.txt")).eigenvalues == model.eigenvalues);
  CHECK_THROWS_AS(deserialize_model("lapdmd-model-version=2\n"), Error);
  CHECK_THROWS_AS(deserialize_model(text.substr(0, text.size() / 2)), Error);
}
