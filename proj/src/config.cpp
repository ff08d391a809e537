#include "attractors/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace attr {

namespace fs = std::filesystem;

SystemPtr build_family(const std::string& family, int n, int d, const std::string& base) {
  if (family == "torus") return build_torus_attractor(n, d);
  if (family == "sphere") return build_sphere_attractor(n, d);
  if (family == "any") {
    SystemPtr ms;
    if (base == "gradient")
      ms = torus_gradient_ms(n);
    else if (base == "north_south")
      ms = north_south_sphere(n);
    else
      throw ConfigError("unknown base '" + base + "' (supported: gradient, north_south)");
    return build_any_manifold(ms, d);
  }
  if (family == "suspension") return suspension(build_torus_attractor(n, d));
  if (family == "cat") return toral_automorphism(cat_matrix());
  if (family == "da") {
    const auto a = toral_automorphism(cat_matrix());
    return da_surgery(*a, default_surgery_params(*a));
  }
  if (family == "plykin") return plykin_system();
  if (family == "north_south") return north_south_sphere(n);
  if (family == "rotation") return planar_rotation();
  throw ConfigError("unknown family '" + family +
                    "' (supported: torus, sphere, any, suspension, cat, da, plykin, north_south, rotation)");
}

namespace {

// key -> type: i integer, r real, b boolean, s string, v real vector
const std::map<std::string, std::map<std::string, char>>& allowed_keys() {
  static const std::map<std::string, std::map<std::string, char>> keys = {
      {"experiment", {{"seed", 'i'}, {"output", 's'}, {"analyses", 's'}, {"max_steps", 'i'}, {"max_points", 'i'}}},
      {"system", {{"family", 's'}, {"n", 'i'}, {"d", 'i'}, {"base", 's'}, {"recipe", 's'}}},
      {"orbit", {{"points", 'i'}, {"transient", 'i'}, {"export", 's'}}},
      {"trapping", {{"resolution", 'i'}, {"delta", 'r'}}},
      {"lyapunov", {{"steps", 'i'}, {"renorm", 'i'}, {"seeds", 's'}, {"transient", 'i'}}},
      {"boxdim", {{"eps_max", 'r'}, {"eps_min", 'r'}}},
      {"cones",
       {{"aperture", 'r'}, {"lambda_min", 'r'}, {"points", 'i'}, {"mode", 's'}, {"unstable_dim", 'i'},
        {"exclude_center", 'v'}, {"exclude_radius", 'r'}}},
      {"census", {{"period", 'i'}, {"grid", 'i'}}},
      {"probe", {{"radius", 'r'}, {"bins", 'i'}}},
      {"mixing", {{"steps", 'i'}, {"grid", 'i'}, {"reference", 'b'}}},
      {"expanding", {}},
  };
  return keys;
}

long to_long(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": not an integer: '" + s + "'");
  }
}

double to_real(const std::string& s, const std::string& what) {
  try {
    return parse_real(s);
  } catch (const std::exception&) {
    throw ConfigError(what + ": not a number: '" + s + "'");
  }
}

bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(what + ": not a boolean: '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  {
    // read_ini drops sections without keys; check every header
    std::istringstream hs(text);
    std::string line;
    while (std::getline(hs, line)) {
      const auto b = line.find_first_not_of(" \t\r");
      const auto e = line.find_last_not_of(" \t\r");
      if (b == std::string::npos || line[b] != '[' || line[e] != ']') continue;
      const std::string name = line.substr(b + 1, e - b - 1);
      if (name.rfind("node", 0) != 0 && !allowed_keys().count(name))
        throw ConfigError("config: unknown section [" + name + "]");
    }
  }
  ExperimentConfig cfg;
  std::ostringstream inline_recipe;
  bool has_inline = false;
  for (const auto& [name, sec] : tree) {
    if (name.rfind("node", 0) == 0) {
      has_inline = true;
      inline_recipe << "[" << name << "]\n";
      for (const auto& [k, v] : sec) inline_recipe << k << " = " << v.get_value<std::string>() << "\n";
      continue;
    }
    const auto it = allowed_keys().find(name);
    if (it == allowed_keys().end()) throw ConfigError("config: unknown section [" + name + "]");
    auto& out = cfg.sections[name];
    for (const auto& [k, v] : sec) {
      const auto kt = it->second.find(k);
      if (kt == it->second.end()) throw ConfigError("config: unknown key '" + k + "' in [" + name + "]");
      const std::string val = v.get_value<std::string>();
      const std::string what = name + "." + k;
      switch (kt->second) {
        case 'i': (void)to_long(val, what); break;
        case 'r': (void)to_real(val, what); break;
        case 'b': (void)to_bool(val, what); break;
        case 'v':
          try {
            (void)parse_vec(val);
          } catch (const std::exception&) {
            throw ConfigError(what + ": not a vector: '" + val + "'");
          }
          break;
        default: break;
      }
      out[k] = val;
    }
  }
  const auto& ex = cfg.sections["experiment"];
  if (ex.count("seed")) cfg.seed = static_cast<std::uint64_t>(to_long(ex.at("seed"), "experiment.seed"));
  if (ex.count("output")) cfg.output = ex.at("output");
  if (ex.count("max_steps")) cfg.max_steps = to_long(ex.at("max_steps"), "experiment.max_steps");
  if (ex.count("max_points")) cfg.max_points = to_long(ex.at("max_points"), "experiment.max_points");
  if (ex.count("analyses")) cfg.analyses = split_list(ex.at("analyses"));
  if (cfg.sections.count("orbit") && cfg.sections["orbit"].count("export"))
    (void)parse_cloud_format(cfg.sections["orbit"]["export"] == "none" ? "csv" : cfg.sections["orbit"]["export"]);
  if (cfg.sections.count("cones") && cfg.sections["cones"].count("mode")) {
    const auto& m = cfg.sections["cones"]["mode"];
    if (m != "pushed" && m != "fixed") throw ConfigError("cones.mode: pushed or fixed (got '" + m + "')");
  }
  for (const auto& a : cfg.analyses)
    if (a != "orbit" && (!allowed_keys().count(a) || a == "experiment" || a == "system"))
      throw ConfigError("config: unknown analysis '" + a +
                        "' (orbit, trapping, lyapunov, boxdim, cones, census, probe, mixing, expanding)");

  const auto& sy = cfg.sections["system"];
  if (sy.count("recipe")) {
    if (has_inline) throw ConfigError("config: give either system.recipe or inline [node*] sections, not both");
    fs::path p = sy.at("recipe");
    if (p.is_relative()) p = fs::path(base_dir) / p;
    cfg.recipe = parse_recipe(read_file(p.string()));
  } else if (has_inline) {
    cfg.recipe = parse_recipe(inline_recipe.str());
  }
  if (cfg.recipe && sy.count("family")) throw ConfigError("config: system.family conflicts with a recipe");
  if (!cfg.recipe) {
    if (!sy.count("family")) throw ConfigError("config: [system] needs family or recipe");
    cfg.family = sy.at("family");
    if (sy.count("n")) cfg.n = static_cast<int>(to_long(sy.at("n"), "system.n"));
    if (sy.count("d")) cfg.d = static_cast<int>(to_long(sy.at("d"), "system.d"));
    if (sy.count("base")) cfg.base = sy.at("base");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  auto cfg = parse_config(read_file(path), fs::path(path).parent_path().string());
  return cfg;
}

SystemPtr build_system(const ExperimentConfig& cfg) {
  if (cfg.recipe) return build_from_recipe(*cfg.recipe);
  return build_family(cfg.family, cfg.n, cfg.d, cfg.base);
}

// ---------------------------------------------------------------------------

namespace {

struct Params {
  const std::map<std::string, std::string>* m;
  std::string section;
  std::string str(const std::string& k, const std::string& def) const {
    auto it = m->find(k);
    return it == m->end() ? def : it->second;
  }
  long integer(const std::string& k, long def) const {
    auto it = m->find(k);
    return it == m->end() ? def : to_long(it->second, section + "." + k);
  }
  double real(const std::string& k, double def) const {
    auto it = m->find(k);
    return it == m->end() ? def : to_real(it->second, section + "." + k);
  }
  bool boolean(const std::string& k, bool def) const {
    auto it = m->find(k);
    return it == m->end() ? def : to_bool(it->second, section + "." + k);
  }
};

struct Runner {
  const ExperimentConfig& cfg;
  const SystemPtr& sys;
  fs::path out;
  std::string hash;

  std::optional<AttractorSample> sample;
  std::optional<MarginReport> trapping;
  std::optional<LyapunovReport> lyap;
  std::optional<DimensionReport> dim;
  std::optional<ProbeReport> probe;

  Params params(const std::string& s) const {
    static const std::map<std::string, std::string> empty;
    auto it = cfg.sections.find(s);
    return {it == cfg.sections.end() ? &empty : &it->second, s};
  }

  void cap_steps(long n, const std::string& what) const {
    if (n > cfg.max_steps)
      throw ConfigError(what + " exceeds max_steps (" + std::to_string(n) + " > " + std::to_string(cfg.max_steps) + ")");
  }

  void write(const std::string& name, Report r) const {
    r.meta.insert(r.meta.begin(), {"recipe_hash", hash});
    write_report_file((out / (name + ".txt")).string(), r);
  }

  const AttractorSample& need_sample() {
    if (!sample) {
      const auto p = params("orbit");
      const long n = p.integer("points", 200000), t = p.integer("transient", 1000);
      if (n > cfg.max_points)
        throw ConfigError("orbit.points exceeds max_points (" + std::to_string(n) + " > " +
                          std::to_string(cfg.max_points) + ")");
      cap_steps(n + t, "orbit");
      sample = attractor_sample(*sys, n, t, cfg.seed);
    }
    return *sample;
  }

  const MarginReport& need_trapping() {
    if (!trapping) {
      const auto p = params("trapping");
      if (!sys->trapping) {
        trapping = MarginReport{};
        trapping->proper = false;
      } else {
        trapping = verify_trapping(*sys, *sys->trapping, static_cast<int>(p.integer("resolution", 256)),
                                   p.real("delta", 1e-6));
      }
    }
    return *trapping;
  }

  const LyapunovReport& need_lyap() {
    if (!lyap) {
      const auto p = params("lyapunov");
      const long steps = p.integer("steps", 100000);
      cap_steps(steps, "lyapunov.steps");
      std::vector<std::uint64_t> seeds;
      for (const auto& s : split_list(p.str("seeds", "1,2,3,4,5")))
        seeds.push_back(static_cast<std::uint64_t>(to_long(s, "lyapunov.seeds")));
      lyap = lyapunov_spectrum(*sys, seeded_start(*sys, cfg.seed), steps, static_cast<int>(p.integer("renorm", 5)),
                               seeds, p.integer("transient", 1000));
    }
    return *lyap;
  }

  const DimensionReport& need_dim() {
    if (!dim) {
      const auto p = params("boxdim");
      ScaleRange range;
      range.eps_max = p.real("eps_max", 0.0);
      range.eps_min = p.real("eps_min", 0.0);
      dim = box_dimension(embedded(*sys, need_sample().points), range);
    }
    return *dim;
  }

  int unstable_count() {
    const auto u = unstable_dim(need_lyap(), sys->is_flow);
    return u.value + u.neutral;
  }

  const ProbeReport& need_probe() {
    if (!probe) {
      const auto p = params("probe");
      probe = attractor_probe(*sys, need_sample(), unstable_count(), p.real("radius", 0.05),
                              static_cast<int>(p.integer("bins", 729)));
    }
    return *probe;
  }

  // returns (pass, detail)
  std::pair<bool, std::string> run(const std::string& kind) {
    if (kind == "orbit") {
      const auto& s = need_sample();
      const auto p = params("orbit");
      const std::string ex = p.str("export", "none");
      if (ex != "none") {
        const auto f = parse_cloud_format(ex);
        write_cloud_file((out / (f == CloudFormat::Csv ? "orbit.csv" : "orbit.bin")).string(),
                         {sys->manifold->kind(), hash, s.points}, f);
      }
      Report r;
      r.add("analysis", "orbit");
      r.add("points", std::to_string(s.points.size()));
      r.add("transient", std::to_string(s.transient));
      r.add("seed", std::to_string(s.seed));
      double diam = 0.0;
      const auto& pts = s.points;
      for (size_t i = 0; i < std::min<size_t>(pts.size(), 2000); ++i)
        diam = std::max(diam, sys->manifold->distance(pts[0], pts[i * (pts.size() / std::min<size_t>(pts.size(), 2000))]));
      r.add("spread_from_first", num(diam));
      write("orbit", r);
      return {true, std::to_string(s.points.size()) + " points"};
    }
    if (kind == "trapping") {
      const auto& m = need_trapping();
      write("trapping", to_report(m, sys->trapping ? sys->trapping->describe() : "none"));
      if (!m.proper) return {false, "not a proper attractor neighbourhood"};
      return {m.pass, "margin " + num(m.margin)};
    }
    if (kind == "lyapunov") {
      const auto& L = need_lyap();
      write("lyapunov", to_report(L));
      std::string d;
      for (double e : L.exponents) d += (d.empty() ? "" : " ") + num(e);
      return {L.converged, d};
    }
    if (kind == "boxdim") {
      const auto& D = need_dim();
      write("boxdim", to_report(D));
      return {D.reliable, "dimension " + num(D.dimension) + " r2 " + num(D.r2)};
    }
    if (kind == "cones") {
      const auto p = params("cones");
      const int du = static_cast<int>(p.integer("unstable_dim", sys->declared_dim.value_or(1)));
      const std::string mode = p.str("mode", "pushed");
      if (mode != "pushed" && mode != "fixed") throw ConfigError("cones.mode: pushed or fixed");
      std::vector<Vec> pts;
      const auto& s = need_sample();
      const long want = p.integer("points", 1000);
      const double r = p.real("exclude_radius", 0.0);
      const Vec c = p.m->count("exclude_center") ? parse_vec(p.m->at("exclude_center")) : Vec();
      std::vector<const Vec*> outside;
      for (const auto& x : s.points)
        if (!(r > 0.0) || sys->manifold->distance(x, c) > r) outside.push_back(&x);
      const size_t stride = std::max<size_t>(1, outside.size() / static_cast<size_t>(std::max(1L, want)));
      for (size_t i = 0; i < outside.size() && static_cast<long>(pts.size()) < want; i += stride)
        pts.push_back(*outside[i]);
      const auto C = cone_check(*sys, pts, p.real("aperture", 0.3), p.real("lambda_min", 1.1), du,
                                mode == "fixed" ? ConeReference::Fixed : ConeReference::Pushed);
      write("cones", to_report(C));
      return {C.pass, std::to_string(C.violations) + "/" + std::to_string(C.samples) + " violations"};
    }
    if (kind == "census") {
      const auto p = params("census");
      const auto C = periodic_census(*sys, static_cast<int>(p.integer("period", 1)),
                                     static_cast<int>(p.integer("grid", 16)));
      write("census", to_report(C, *sys->manifold));
      return {true, std::to_string(C.count()) + " points"};
    }
    if (kind == "probe") {
      const auto& P = need_probe();
      write("probe", to_report(P));
      return {true, P.verdict};
    }
    if (kind == "mixing") {
      const auto p = params("mixing");
      const long steps = p.integer("steps", 1000000);
      cap_steps(steps, "mixing.steps");
      const int grid = static_cast<int>(p.integer("grid", 64));
      std::vector<Vec> ref;
      Vec lo, hi;
      if (p.boolean("reference", true)) {
        ref = embedded(*sys, need_sample().points);
        lo = hi = ref[0];
        for (const auto& e : ref) {
          lo = lo.cwiseMin(e);
          hi = hi.cwiseMax(e);
        }
        hi += Vec::Constant(hi.size(), 1e-12);
      } else {
        lo = Vec::Zero(sys->manifold->embed_dim());
        hi = Vec::Ones(sys->manifold->embed_dim());
      }
      const auto M = mixing_probe(*sys, seeded_start(*sys, cfg.seed + 1), steps, grid, ref, lo, hi);
      write("mixing", to_report(M));
      return {true, "coverage " + num(M.coverage.back())};
    }
    if (kind == "expanding") {
      const auto V = expanding_attractor_check(*sys, need_trapping(), need_lyap(), need_dim(), need_probe());
      write("expanding", to_report(V));
      return {V.pass, V.summary()};
    }
    throw ConfigError("unknown analysis '" + kind + "'");
  }
};

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const SystemPtr& sys) {
  RunResult res;
  fs::create_directories(cfg.output);
  Runner run{cfg, sys, fs::path(cfg.output), recipe_hash(sys->recipe), {}, {}, {}, {}, {}};
  {
    std::ofstream os(run.out / "recipe.ini");
    os << serialize_recipe(sys->recipe);
  }
  auto& S = res.summary;
  S.add("recipe_hash", run.hash);
  S.add("system", sys->name);
  S.add("seed", std::to_string(cfg.seed));
  S.columns = {"analysis", "status", "detail"};
  for (const auto& a : cfg.analyses) {
    std::string status, detail;
    try {
      const auto [ok, d] = run.run(a);
      status = ok ? "pass" : "fail";
      detail = d;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      status = "error";
      detail = e.what();
    }
    for (auto& ch : detail)
      if (ch == ',' || ch == '\n') ch = ';';
    if (status != "pass") res.exit_code = 1;
    if (a == "expanding") res.verdict = status == "error" ? "ERROR" : detail;
    S.rows.push_back({a, status, detail});
  }
  if (!res.verdict.empty()) S.add("verdict", res.verdict);
  write_report_file((run.out / "summary.txt").string(), S);
  return res;
}

}  // namespace attr
