#include <doctest.h>

#include "attractors/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace attr;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("attractor_tests_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ATTRACTOR_CLI) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

const char* kSmall = R"(
[experiment]
seed = 2
output = OUT
analyses = trapping, lyapunov, census, expanding

[system]
family = da

[trapping]
resolution = 64

[lyapunov]
steps = 5000
seeds = 1, 2

[census]
period = 1
grid = 16

[orbit]
points = 100000
)";

std::string small_config(const fs::path& out) {
  std::string t = kSmall;
  t.replace(t.find("OUT"), 3, out.string());
  return t;
}
}  // namespace

TEST_CASE("cloud formats round trip") {
  const auto s = plykin_system();
  Rng rng(1);
  Cloud c;
  c.variant = s->manifold->kind();
  c.recipe_hash = recipe_hash(s->recipe);
  for (int i = 0; i < 500; ++i) c.points.push_back(s->manifold->random_point(rng));
  for (auto f : {CloudFormat::Csv, CloudFormat::Binary}) {
    std::stringstream ss;
    write_cloud(ss, c, f);
    if (f == CloudFormat::Binary) CHECK(ss.str().size() == kBinaryHeaderBytes + 500 * 2 * sizeof(double));
    const Cloud back = read_cloud(ss, f);
    CHECK(back.variant == c.variant);
    CHECK(back.recipe_hash == c.recipe_hash);
    REQUIRE(back.points.size() == c.points.size());
    for (size_t i = 0; i < c.points.size(); ++i) CHECK(back.points[i] == c.points[i]);
  }
  std::stringstream csv;
  write_cloud(csv, c, CloudFormat::Csv);
  std::string first, header;
  std::getline(csv, first);
  std::getline(csv, header);
  CHECK(first == "# recipe_hash: " + c.recipe_hash);
  CHECK(header == "variant,dim,c0,c1");
  CHECK(parse_cloud_format("binary") == CloudFormat::Binary);
  CHECK_THROWS_AS(parse_cloud_format("hdf5"), ConfigError);
}

TEST_CASE("binary cloud rejects a bad magic") {
  std::stringstream ss("XXXX0000000000000000000000000000000000000");
  CHECK_THROWS(read_cloud(ss, CloudFormat::Binary));
}

TEST_CASE("reports round trip") {
  Report r;
  r.add("verdict", "PASS");
  r.add("exponents", "0.9 -0.8");
  r.columns = {"a", "b"};
  r.rows = {{"1", "x"}, {"2", "y"}};
  std::stringstream ss;
  write_report(ss, r);
  const Report back = read_report(ss);
  CHECK(back.meta == r.meta);
  CHECK(back.columns == r.columns);
  CHECK(back.rows == r.rows);
  CHECK(parse_real(num(0.1)) == 0.1);
  CHECK(parse_real(num(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("config parsing is strict") {
  const auto good = parse_config(small_config("/tmp/x"));
  CHECK(good.family == "da");
  CHECK(good.seed == 2);
  CHECK(good.analyses == std::vector<std::string>{"trapping", "lyapunov", "census", "expanding"});
  CHECK_THROWS_AS(parse_config("[experiment]\nanalyses = lyapunov\n[system]\nfamily = da\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nanalyses = lyapunov\n[system]\nfamily = da\n[wavelets]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nanalyses = dance\n[system]\nfamily = da\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nanalyses = lyapunov\n[system]\nfamily = da\n[lyapunov]\nsteps = many\n"),
                  ConfigError);
  CHECK_THROWS_AS(build_system(parse_config("[experiment]\nanalyses = lyapunov\n[system]\nfamily = sphere\nn = 3\nd = 2\n")),
                  ConfigError);
}

TEST_CASE("experiment writes one report per analysis") {
  const auto dir = scratch("run");
  const auto cfg = parse_config(small_config(dir));
  const auto res = run_experiment(cfg, build_system(cfg));
  CHECK(res.exit_code == 0);
  CHECK(res.verdict == "PASS");
  for (const char* f : {"trapping.txt", "lyapunov.txt", "census.txt", "expanding.txt", "summary.txt", "recipe.ini"})
    CHECK(fs::exists(dir / f));
  std::ifstream in(dir / "census.txt");
  const Report r = read_report(in);
  CHECK(r.rows.size() == 3);
  fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
  const auto dir = scratch("cli");
  CHECK(cli("build da") == 0);
  CHECK(cli("build sphere --n 3 --d 2") == 2);
  CHECK(cli("build torus --n 3 --d 5") == 2);
  CHECK(cli("export plykin --format parquet --count 10 --out " + (dir / "x").string()) == 2);
  const auto bin = dir / "p.bin";
  CHECK(cli("export plykin --format binary --count 1000 --out " + bin.string()) == 0);
  CHECK(fs::file_size(bin) == kBinaryHeaderBytes + 1000 * 2 * sizeof(double));
  {
    std::ofstream(dir / "ok.ini") << small_config(dir / "ok");
    std::ofstream(dir / "bad.ini") << "[experiment]\nanalyses = lyapunov\nbogus = 1\n[system]\nfamily = da\n";
    std::ofstream(dir / "fail.ini") << "[experiment]\nanalyses = trapping, expanding\noutput = " << (dir / "fail").string()
                                    << "\n[system]\nfamily = cat\n[trapping]\nresolution = 16\n[orbit]\npoints = 20000\n";
  }
  CHECK(cli("analyze " + (dir / "ok.ini").string()) == 0);
  CHECK(cli("analyze " + (dir / "bad.ini").string()) == 2);
  CHECK(cli("analyze " + (dir / "fail.ini").string()) == 1);
  CHECK(cli("analyze " + (dir / "missing.ini").string()) == 2);
  fs::remove_all(dir);
}
