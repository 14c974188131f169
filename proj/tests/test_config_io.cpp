#include <bit>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "kerr/field.hpp"
#include "kerr/geometry.hpp"
#include "kerr/io.hpp"

using namespace kerr;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const char* stem) {
  return (fs::temp_directory_path() / stem).string();
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool same_bits(cplx a, cplx b) {
  return same_bits(a.real(), b.real()) && same_bits(a.imag(), b.imag());
}

}  // namespace

TEST_CASE("config parser: sections, types, defaults, comments") {
  const Config cfg = Config::parse_string(
      "# run setup\n"
      "background.M = 1.0\n"
      "background.a = 0.5   # spin\n"
      "background.k = -2\n"
      "evolve.snapshots = 0, 2.5, 5\n"
      "flags.exact = yes\n"
      "flags.fast = off\n"
      "\n"
      "names.label = bump run\n",
      "unit.cfg");

  CHECK(cfg.get_double("background.M") == 1.0);
  CHECK(cfg.get_double("background.a") == 0.5);  // inline comment stripped
  CHECK(cfg.get_int("background.k") == -2);
  CHECK(cfg.get_bool("flags.exact"));
  CHECK_FALSE(cfg.get_bool("flags.fast"));
  CHECK(cfg.get_string("names.label") == "bump run");

  const auto v = cfg.get_double_list("evolve.snapshots");
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 2.5);
  CHECK(v[2] == 5.0);

  CHECK(cfg.has("background.a"));
  CHECK_FALSE(cfg.has("background.q"));
  CHECK(cfg.get_double("grid.u_min", -40.0) == -40.0);
  CHECK(cfg.get_int("grid.nu", 801) == 801);
  CHECK(cfg.get_string("synth.compare", "") == "");
  CHECK(cfg.get_bool("flags.missing", true));
  CHECK(cfg.get_double_list("synth.times", {0.0}) == std::vector<double>{0.0});
  CHECK(cfg.line_of("background.k") == 4);
}

TEST_CASE("config parser: diagnostics carry the file name and line number") {
  // missing '=' on line 3
  try {
    Config::parse_string("a.x = 1\n\nthis line is broken\n", "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("bad.cfg:3") != std::string::npos);
  }

  // key without a section prefix
  CHECK_THROWS_AS(Config::parse_string("nodot = 1\n"), ConfigError);

  // empty value
  CHECK_THROWS_AS(Config::parse_string("a.x =\n"), ConfigError);

  // duplicate key names the first definition
  try {
    Config::parse_string("a.x = 1\na.y = 2\na.x = 3\n", "dup.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }

  // bad numbers and bad bools fail with the key's line
  const Config cfg = Config::parse_string("a.x = 12q\na.b = maybe\na.v = 1,,2\n");
  CHECK_THROWS_AS((void)cfg.get_double("a.x"), ConfigError);
  CHECK_THROWS_AS((void)cfg.get_int("a.x"), ConfigError);
  CHECK_THROWS_AS((void)cfg.get_bool("a.b"), ConfigError);
  CHECK_THROWS_AS((void)cfg.get_double_list("a.v"), ConfigError);

  // missing required key
  CHECK_THROWS_AS((void)cfg.get_double("a.missing"), ConfigError);

  // unreadable file
  CHECK_THROWS_AS((void)Config::parse_file("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("background block: defaults and parameter validation") {
  const Config ok = Config::parse_string("background.a = 0.9\nbackground.k = 1\n");
  const KerrBackground bg = background_from_config(ok);
  CHECK(bg.M == 1.0);
  CHECK(bg.a == 0.9);
  CHECK(bg.k == 1);
  CHECK(bg.r1 == doctest::Approx(1.0 + std::sqrt(0.19)));

  // a >= M must fail fast at parameter validation
  const Config fast = Config::parse_string("background.M = 1\nbackground.a = 2\n");
  CHECK_THROWS_AS((void)background_from_config(fast), ConfigError);
  const Config neg = Config::parse_string("background.M = -1\n");
  CHECK_THROWS_AS((void)background_from_config(neg), ConfigError);
}

TEST_CASE("mode table: binary round trip is bitwise lossless") {
  ModeTable t;
  const KerrBackground bg(1.0, 0.5, 1);
  t.bg_hash = background_hash(bg);
  t.version = std::string(kToolVersion);
  t.M = bg.M;
  t.a = bg.a;
  t.k = bg.k;
  t.n_max = 2;
  t.omega = {-0.7, 1.0 / 3.0, std::sqrt(2.0)};
  for (std::uint32_t iw = 0; iw < 3; ++iw)
    for (int n = 1; n <= 2; ++n) {
      ModeTableRecord r;
      r.n = n;
      r.iw = iw;
      r.omega = t.omega[iw];
      r.lambda = std::exp(1.0) * n + iw;
      r.has_scattering = (iw != 1);
      if (r.has_scattering) {
        r.alpha = cplx(std::sqrt(3.0), -1.0 / 7.0);
        r.beta = cplx(-0.123456789012345678, 3e-17);
        r.t11 = 1.0 + 1e-16;
        r.t12 = -2.0 / 3.0;
        r.t22 = 0.25;
        r.residual_acute = 1e-12;
        r.residual_grave = 2e-12;
      }
      t.records.push_back(r);
    }

  const std::string path = temp_path("kerr_table_rt.kmt");
  write_mode_table(t, path);
  const ModeTable rt = read_mode_table(path);

  CHECK(rt.bg_hash == t.bg_hash);
  CHECK(rt.version == t.version);
  CHECK(same_bits(rt.M, t.M));
  CHECK(same_bits(rt.a, t.a));
  CHECK(rt.k == t.k);
  CHECK(rt.n_max == t.n_max);
  REQUIRE(rt.omega.size() == t.omega.size());
  for (std::size_t i = 0; i < t.omega.size(); ++i)
    CHECK(same_bits(rt.omega[i], t.omega[i]));
  REQUIRE(rt.records.size() == t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const ModeTableRecord &a = t.records[i], &b = rt.records[i];
    CHECK(a.n == b.n);
    CHECK(a.iw == b.iw);
    CHECK(same_bits(a.omega, b.omega));
    CHECK(same_bits(a.lambda, b.lambda));
    CHECK(a.has_scattering == b.has_scattering);
    CHECK(same_bits(a.alpha, b.alpha));
    CHECK(same_bits(a.beta, b.beta));
    CHECK(same_bits(a.t11, b.t11));
    CHECK(same_bits(a.t12, b.t12));
    CHECK(same_bits(a.t22, b.t22));
    CHECK(same_bits(a.residual_acute, b.residual_acute));
    CHECK(same_bits(a.residual_grave, b.residual_grave));
  }
  fs::remove(path);
}

TEST_CASE("mode table: tampering and truncation are rejected") {
  ModeTable t;
  const KerrBackground bg(1.0, 0.5, 1);
  t.bg_hash = background_hash(bg);
  t.version = std::string(kToolVersion);
  t.M = bg.M;
  t.a = bg.a;
  t.k = bg.k;
  t.n_max = 1;
  t.omega = {0.5};
  ModeTableRecord r;
  r.n = 1;
  r.iw = 0;
  r.omega = 0.5;
  r.lambda = 2.0;
  t.records.push_back(r);

  const std::string path = temp_path("kerr_table_tamper.kmt");
  write_mode_table(t, path);

  SUBCASE("hash byte flip") {
    std::FILE* f = std::fopen(path.c_str(), "rb+");
    REQUIRE(f != nullptr);
    // layout: magic(4) + version length(4) + version bytes, then the hash
    const long off = 8 + static_cast<long>(t.version.size());
    std::fseek(f, off, SEEK_SET);
    const int b = std::fgetc(f);
    std::fseek(f, off, SEEK_SET);
    std::fputc(b ^ 0x5a, f);
    std::fclose(f);
    CHECK_THROWS_WITH_AS((void)read_mode_table(path),
                         doctest::Contains("integrity"), std::runtime_error);
  }

  SUBCASE("stored background byte flip") {
    std::FILE* f = std::fopen(path.c_str(), "rb+");
    REQUIRE(f != nullptr);
    const long off = 8 + static_cast<long>(t.version.size()) + 8 + 2;  // inside M
    std::fseek(f, off, SEEK_SET);
    const int b = std::fgetc(f);
    std::fseek(f, off, SEEK_SET);
    std::fputc(b ^ 0xff, f);
    std::fclose(f);
    CHECK_THROWS_AS((void)read_mode_table(path), std::runtime_error);
  }

  SUBCASE("truncation") {
    const auto size = fs::file_size(path);
    fs::resize_file(path, size - 6);
    CHECK_THROWS_AS((void)read_mode_table(path), std::runtime_error);
  }

  SUBCASE("bad magic") {
    std::FILE* f = std::fopen(path.c_str(), "rb+");
    REQUIRE(f != nullptr);
    std::fputc('X', f);
    std::fclose(f);
    CHECK_THROWS_AS((void)read_mode_table(path), std::runtime_error);
  }

  fs::remove(path);
}

TEST_CASE("field snapshot: round trip preserves grids, planes, and time") {
  const KerrBackground bg(1.0, 0.9, 1);
  FieldState st = make_state(1, -7.0, 13.0, 33, 9);
  st.time = std::acos(-1.0) / 3.0;
  for (std::size_t p = 0; p < st.size(); ++p) {
    const double x = static_cast<double>(p);
    st.psi1[p] = cplx(std::sin(0.1 * x), std::cos(0.2 * x));
    st.psi2[p] = cplx(1.0 / (x + 3.0), -0.5 * x);
  }

  SUBCASE("without derivative planes") {
    const std::string path = temp_path("kerr_snap_np.kfs");
    write_snapshot(st, bg, path);
    const Snapshot s = read_snapshot(path);
    CHECK(s.bg.a == bg.a);
    CHECK(s.bg.k == bg.k);
    CHECK(same_bits(s.state.time, st.time));
    CHECK(s.state.u_grid == st.u_grid);
    CHECK(s.state.costheta_grid == st.costheta_grid);
    REQUIRE(s.state.psi1.size() == st.psi1.size());
    bool ok = true;
    for (std::size_t p = 0; p < st.size(); ++p)
      ok = ok && same_bits(s.state.psi1[p], st.psi1[p]) &&
           same_bits(s.state.psi2[p], st.psi2[p]);
    CHECK(ok);
    CHECK_FALSE(s.state.has_planes());
    fs::remove(path);
  }

  SUBCASE("with derivative planes") {
    st.du1.assign(st.size(), cplx(0.25, -4.0));
    st.dc1.assign(st.size(), cplx(-1e-30, 3.0));
    const std::string path = temp_path("kerr_snap_pl.kfs");
    write_snapshot(st, bg, path);
    const Snapshot s = read_snapshot(path);
    REQUIRE(s.state.has_planes());
    bool ok = true;
    for (std::size_t p = 0; p < st.size(); ++p)
      ok = ok && same_bits(s.state.du1[p], st.du1[p]) &&
           same_bits(s.state.dc1[p], st.dc1[p]);
    CHECK(ok);
    fs::remove(path);
  }

  SUBCASE("snapshot truncation rejected") {
    const std::string path = temp_path("kerr_snap_tr.kfs");
    write_snapshot(st, bg, path);
    fs::resize_file(path, fs::file_size(path) / 2);
    CHECK_THROWS_AS((void)read_snapshot(path), std::runtime_error);
    fs::remove(path);
  }
}
