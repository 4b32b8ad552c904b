#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "smoke/benchmarks.hpp"
#include "smoke/config.hpp"
#include "smoke/errors.hpp"
#include "smoke/field_io.hpp"
#include "smoke/log_io.hpp"
#include "support.hpp"

using namespace smoke;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("smoke_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "smokectl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

void write_p5(const fs::path& p, int w, int h, unsigned char value) {
  std::ofstream os(p, std::ios::binary);
  os << "P5\n# test\n" << w << " " << h << "\n255\n";
  std::string px(static_cast<std::size_t>(w * h), static_cast<char>(value));
  os.write(px.data(), static_cast<std::streamsize>(px.size()));
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

nlohmann::json last_json_line(const std::string& s) {
  std::istringstream is(s);
  std::string line, last;
  while (std::getline(is, line))
    if (!line.empty() && line.front() == '{') last = line;
  return nlohmann::json::parse(last);
}

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("PGM keyframes: black is empty, white resamples to one") {
  TempDir tmp("pgm");
  auto s = GridSpec::square(64, 1.0 / 64, Boundary::Neumann);
  write_p5(tmp.path / "black.pgm", 128, 128, 0);
  write_p5(tmp.path / "white.pgm", 128, 128, 255);
  CHECK(norm_inf(load_keyframe(tmp.path / "black.pgm", s).values()) == 0.0);
  const auto w = load_keyframe(tmp.path / "white.pgm", s);
  for (std::size_t k = 0; k < w.size(); ++k) REQUIRE(w[k] == doctest::Approx(1.0).epsilon(1e-15));

  // ASCII variant; top image row lands at high y
  {
    std::ofstream os(tmp.path / "ramp.pgm");
    os << "P2\n2 2\n255\n255 255\n0 0\n";
  }
  const auto img = read_pgm(tmp.path / "ramp.pgm");
  CHECK(img.width == 2);
  CHECK(img.pixels == std::vector<double>{1.0, 1.0, 0.0, 0.0});
  auto s2 = GridSpec::square(4, 0.25, Boundary::Neumann);
  const auto f = image_to_field(img, s2);
  CHECK(f.at(0, 3) == doctest::Approx(1.0));
  CHECK(f.at(0, 0) == doctest::Approx(0.0));
  CHECK(f.at(2, 2) > f.at(2, 1));

  std::ofstream(tmp.path / "junk.pgm") << "P7 nonsense";
  CHECK_THROWS_AS(read_pgm(tmp.path / "junk.pgm"), FormatError);
  auto s3 = GridSpec::make(3, {4, 4, 4}, 0.25, Boundary::Neumann);
  CHECK_THROWS_AS(load_keyframe(tmp.path / "white.pgm", s3), FormatError);
}

TEST_CASE("SMKF round trip is bitwise") {
  TempDir tmp("smkf");
  std::mt19937_64 rng(90);
  for (const auto& s : {GridSpec::square(7, 1.0 / 7, Boundary::Neumann), GridSpec::square(6, 0.3, Boundary::Periodic),
                        GridSpec::make(3, {4, 5, 6}, 0.1, Boundary::Neumann)}) {
    const auto a = test::random_scalar(s, rng);
    const auto v = test::random_face(s, rng);
    save_smkf(tmp.path / "a.smkf", a);
    save_smkf(tmp.path / "v.smkf", v);
    const auto a2 = load_smkf_scalar(tmp.path / "a.smkf");
    const auto v2 = load_smkf_face(tmp.path / "v.smkf");
    CHECK(a2.spec() == s);
    CHECK(v2.spec() == s);
    CHECK(std::memcmp(a.values().data(), a2.values().data(), a.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(v.values().data(), v2.values().data(), v.size() * sizeof(double)) == 0);
    const auto [hs, kind] = read_smkf_header(tmp.path / "v.smkf");
    CHECK(hs == s);
    CHECK(kind == FieldKind::Face);
    CHECK_THROWS_AS(load_smkf_face(tmp.path / "a.smkf"), FormatError);
    CHECK(load_keyframe(tmp.path / "a.smkf", s).spec() == s);
  }
  const auto s = GridSpec::square(7, 1.0 / 7, Boundary::Neumann);
  save_smkf(tmp.path / "a.smkf", ScalarField(s));
  CHECK_THROWS_AS(load_keyframe(tmp.path / "a.smkf", GridSpec::square(8, 1.0 / 8, Boundary::Neumann)), SpecMismatch);
  auto bytes = slurp(tmp.path / "a.smkf");
  std::ofstream(tmp.path / "cut.smkf", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS_AS(load_smkf_scalar(tmp.path / "cut.smkf"), FormatError);
  bytes[0] = 'X';
  std::ofstream(tmp.path / "bad.smkf", std::ios::binary) << bytes;
  CHECK_THROWS_AS(load_smkf_scalar(tmp.path / "bad.smkf"), FormatError);
}

TEST_CASE("config: parse, serialize, parse is identity") {
  const std::string text = R"(
[grid]
dim = 2
res = 24
boundary = periodic   # wraps
[time]
dt = 1.5
steps = 7
[density]
initial = start.pgm
[keyframes]
4 = mid.smkf
7 = end.pgm
[admm]
K = 500
r = 1e4
safeguard = true
[run]
solver = lbfgs
seed = 12345678901
)";
  const RunConfig a = parse_config(text);
  CHECK(a.grid.res[0] == 24);
  CHECK(a.grid.h == 1.0 / 24);
  CHECK(a.grid.periodic());
  CHECK(a.admm.dt == 1.5);
  CHECK(a.keyframes.size() == 2);
  CHECK(a.solver == SolverKind::Lbfgs);
  CHECK(a.seed == 12345678901ull);
  const RunConfig b = parse_config(serialize(a));
  CHECK(b == a);
  CHECK(serialize(b) == serialize(a));
  CHECK(parse_config(serialize(RunConfig{})) == RunConfig{});

  CHECK_THROWS_AS(parse_config("[grid]\nwidth = 3\n"), FormatError);
  CHECK_THROWS_AS(parse_config("[time]\ndt = fast\n"), FormatError);
  CHECK_THROWS_AS(parse_config("[grid\n"), FormatError);
  RunConfig c = a;
  c.keyframes[9] = "late.pgm";
  CHECK_THROWS_AS(validate(c), InvalidArgument);
  c = a;
  c.keyframes.clear();
  CHECK_THROWS_AS(validate(c), InvalidArgument);
}

TEST_CASE("command line: usage errors exit 2 with JSON on stderr") {
  auto r = cli({});
  CHECK(r.code == 2);
  r = cli({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.find("usage: smokectl") != std::string::npos);
  CHECK(last_json_line(r.err)["error"] == "UsageError");
  r = cli({"optimize", "--out", "x"});
  CHECK(r.code == 2);
  r = cli({"make-benchmark", "--name", "teapot", "--out", "x"});
  CHECK(r.code == 2);
  r = cli({"--help"});
  CHECK(r.code == 0);
  r = cli({"optimize", "--config", "/nonexistent/config.ini", "--out", "x"});
  CHECK(r.code == 1);
  CHECK(last_json_line(r.err)["error"] == "FormatError");
}

TEST_CASE("make-benchmark is deterministic in the seed") {
  TempDir tmp("bench");
  for (const std::string name : {"blob", "letter", "bunny"}) {
    CAPTURE(name);
    const auto a = tmp.path / (name + "_a"), b = tmp.path / (name + "_b"), c = tmp.path / (name + "_c");
    REQUIRE(cli({"make-benchmark", "--name", name, "--out", a.string(), "--res", "16", "--steps", "6", "--seed", "3"}).code == 0);
    REQUIRE(cli({"make-benchmark", "--name", name, "--out", b.string(), "--res", "16", "--steps", "6", "--seed", "3"}).code == 0);
    REQUIRE(cli({"make-benchmark", "--name", name, "--out", c.string(), "--res", "16", "--steps", "6", "--seed", "4"}).code == 0);
    const auto cfg = load_config(a / "config.ini");
    CHECK(cfg.steps == 6);
    CHECK(cfg.grid.res[0] == 16);
    for (const auto& [i, p] : cfg.keyframes) {
      const auto f = fs::path(p).filename();
      CHECK(slurp(a / f) == slurp(b / f));
      CHECK(load_smkf_scalar(a / f).spec() == cfg.grid);
    }
    CHECK(slurp(a / "rho0.smkf") == slurp(b / "rho0.smkf"));
    CHECK(slurp(a / "config.ini") == slurp(b / "config.ini"));
    bool differs = slurp(a / "rho0.smkf") != slurp(c / "rho0.smkf");
    for (const auto& [i, p] : cfg.keyframes) differs = differs || slurp(a / fs::path(p).filename()) != slurp(c / fs::path(p).filename());
    CHECK(differs);
  }
  CHECK(load_config(tmp.path / "bunny_a" / "config.ini").keyframes.size() == 2);
}

TEST_CASE("simulate at rest reproduces the initial density; export-frames") {
  TempDir tmp("sim");
  REQUIRE(cli({"make-benchmark", "--name", "letter", "--out", tmp.path.string(), "--res", "16", "--steps", "5"}).code == 0);
  const auto out = tmp.path / "sim";
  auto r = cli({"simulate", "--config", (tmp.path / "config.ini").string(), "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(last_json_line(r.out)["frames"] == 6);
  const auto rho0 = load_smkf_scalar(tmp.path / "rho0.smkf");
  for (int i = 0; i <= 5; ++i) {
    const auto f = load_smkf_scalar(out / frame_name("rho", i));
    CHECK(test::max_abs_diff(f.values(), rho0.values()) == 0.0);
  }
  r = cli({"export-frames", "--in", out.string(), "--out", (tmp.path / "pgm").string()});
  REQUIRE(r.code == 0);
  const auto img = read_pgm(tmp.path / "pgm" / "rho_0003.pgm");
  CHECK(img.width == 16);
  CHECK(img.height == 16);
  CHECK(cli({"export-frames", "--in", out.string(), "--out", (tmp.path / "pgm").string(), "--stem", "nothing"}).code == 1);
}

TEST_CASE("optimize the translated blob end to end") {
  TempDir tmp("opt");
  REQUIRE(cli({"make-benchmark", "--name", "blob", "--out", tmp.path.string(), "--res", "32", "--steps", "10"}).code == 0);
  const auto out = tmp.path / "run";
  const auto r = cli({"optimize", "--config", (tmp.path / "config.ini").string(), "--out", out.string(), "--safeguard"});
  CHECK(r.code == 0);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["converged"] == true);
  for (int i = 0; i <= 10; ++i) CHECK(fs::exists(out / frame_name("rho", i)));
  CHECK_FALSE(fs::exists(out / frame_name("rho", 11)));
  for (const auto* log : {"admm_log.csv", "nso_log.csv"}) {
    std::istringstream is(slurp(out / log));
    std::string header;
    std::getline(is, header);
    CHECK(header == (std::string(log) == "admm_log.csv" ? "outer_iter,ao_obj,nso_resid,visual_diff,wall_s"
                                                        : "admm_iter,vcycle_index,residual_inf,residual_l2,wall_ms"));
  }
}

TEST_CASE("re-running reproduces identical field files") {
  TempDir tmp("rerun");
  REQUIRE(cli({"make-benchmark", "--name", "blob", "--out", tmp.path.string(), "--res", "16", "--steps", "4", "--seed", "9"}).code == 0);
  const auto cfg = (tmp.path / "config.ini").string();
  const auto a = tmp.path / "a", b = tmp.path / "b";
  const int ca = cli({"optimize", "--config", cfg, "--out", a.string(), "--safeguard"}).code;
  const int cb = cli({"optimize", "--config", cfg, "--out", b.string(), "--safeguard"}).code;
  CHECK(ca == cb);
  int files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".smkf") continue;
    ++files;
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  CHECK(files == 5 + 5 + 4 + 4);
}

}  // TEST_SUITE
