#include "attractors/acceptance.hpp"
#include "attractors/config.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace attr;

struct SystemArgs {
  std::string family;
  std::string recipe;
  int n = 2;
  int d = 1;
  std::string base = "gradient";

  void attach(CLI::App* app) {
    app->add_option("family", family, "torus, sphere, any, suspension, cat, da, plykin, north_south, rotation");
    app->add_option("--recipe", recipe, "recipe file (instead of a family)");
    app->add_option("--n", n, "manifold dimension");
    app->add_option("--d", d, "attractor dimension");
    app->add_option("--base", base, "base system for family 'any': gradient or north_south");
  }

  SystemPtr build() const {
    if (!recipe.empty()) {
      if (!family.empty()) throw ConfigError("give either a family or --recipe");
      std::ifstream is(recipe);
      if (!is) throw ConfigError("cannot read " + recipe);
      std::stringstream ss;
      ss << is.rdbuf();
      return build_from_recipe(parse_recipe(ss.str()));
    }
    if (family.empty()) throw ConfigError("a family or --recipe is required");
    return build_family(family, n, d, base);
  }
};

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ConstructionError& e) {
    std::cerr << "construction invariant failed: " << e.what() << "\n";
    return 3;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis failed: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expanding attractors: construction and numerical verification"};
  app.require_subcommand(1);

  SystemArgs build_args;
  std::string build_out;
  auto* build = app.add_subcommand("build", "construct a system and print its canonical recipe");
  build_args.attach(build);
  build->add_option("--out", build_out, "write the recipe to this file");

  std::string config_path;
  auto* analyze = app.add_subcommand("analyze", "run the analyses listed in a config file");
  analyze->add_option("config", config_path, "experiment config (INI)")->required();

  SystemArgs export_args;
  std::string format = "csv", export_out;
  long count = 100000, transient = 1000, max_points = 10000000;
  std::uint64_t seed = 1;
  auto* exp = app.add_subcommand("export", "write an attractor sample as a point cloud");
  export_args.attach(exp);
  exp->add_option("--format", format, "csv or binary");
  exp->add_option("--count", count, "number of points");
  exp->add_option("--transient", transient, "discarded initial steps");
  exp->add_option("--seed", seed, "start-point seed");
  exp->add_option("--max-points", max_points, "resource cap on --count");
  exp->add_option("--out", export_out, "output file")->required();

  std::vector<int> only;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--only", only, "criterion numbers")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*build)
    return guarded([&] {
      const auto sys = build_args.build();
      const std::string text = serialize_recipe(sys->recipe);
      if (!build_out.empty()) {
        std::ofstream os(build_out);
        if (!os) throw ConfigError("cannot write " + build_out);
        os << text;
      }
      std::cout << "# system: " << sys->name << "\n# manifold: " << sys->manifold->name()
                << "\n# recipe_hash: " << recipe_hash(sys->recipe) << "\n"
                << text;
      return 0;
    });

  if (*analyze)
    return guarded([&] {
      const auto cfg = load_config(config_path);
      const auto sys = build_system(cfg);
      const auto res = run_experiment(cfg, sys);
      write_report(std::cout, res.summary);
      return res.exit_code;
    });

  if (*exp)
    return guarded([&] {
      const auto f = parse_cloud_format(format);
      if (count < 1) throw ConfigError("--count must be positive");
      if (count > max_points)
        throw ConfigError("--count " + std::to_string(count) + " exceeds --max-points " + std::to_string(max_points));
      const auto sys = export_args.build();
      const auto s = attractor_sample(*sys, count, transient, seed);
      write_cloud_file(export_out, {sys->manifold->kind(), s.recipe_hash, s.points}, f);
      std::cout << "wrote " << s.points.size() << " points to " << export_out << "\n";
      return 0;
    });

  if (*verify)
    return guarded([&] {
      AcceptanceOptions opt;
      opt.only = only;
      bool all = true;
      run_acceptance(opt, [&](const CriterionResult& r) {
        all = all && r.pass;
        std::cout << format_line(r) << std::endl;
      });
      return all ? 0 : 1;
    });
  return 2;
}
