#include "attractors/constructors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <sstream>

namespace attr {

SystemPtr product(const std::vector<SystemPtr>& systems) {
  if (systems.size() < 2) throw std::invalid_argument("product needs at least two systems");
  std::vector<ManifoldPtr> ms;
  for (const auto& s : systems) ms.push_back(s->manifold);
  auto M = make_product(ms);
  const auto off = product_offsets(*M);
  std::vector<int> doff{0};
  for (const auto& s : systems) doff.push_back(doff.back() + s->dim());

  auto sys = std::make_shared<SystemSpec>();
  sys->name = "product(";
  for (size_t i = 0; i < systems.size(); ++i) sys->name += (i ? ", " : "") + systems[i]->name;
  sys->name += ")";
  sys->manifold = M;
  auto step = [systems, off](const Vec& x, bool fwd) {
    Vec y(x.size());
    for (size_t i = 0; i < systems.size(); ++i) {
      const Vec xi = x.segment(off[i], off[i + 1] - off[i]);
      y.segment(off[i], off[i + 1] - off[i]) = fwd ? systems[i]->forward(xi) : systems[i]->backward(xi);
    }
    return y;
  };
  sys->forward = [step](const Vec& x) { return step(x, true); };
  sys->backward = [step](const Vec& x) { return step(x, false); };
  sys->tangent = [systems, off, doff](const Vec& x) {
    Mat J = Mat::Zero(doff.back(), doff.back());
    for (size_t i = 0; i < systems.size(); ++i) {
      const int di = doff[i + 1] - doff[i];
      J.block(doff[i], doff[i], di, di) = tangent_at(*systems[i], x.segment(off[i], off[i + 1] - off[i]));
    }
    return J;
  };
  bool all_declared = true;
  int dsum = 0;
  for (const auto& s : systems) {
    all_declared = all_declared && s->declared_dim.has_value();
    if (s->declared_dim) dsum += *s->declared_dim;
  }
  if (all_declared) sys->declared_dim = dsum;
  sys->recipe.op = "product";
  for (const auto& s : systems) sys->recipe.children.push_back(s->recipe);
  sys->factors = systems;

  // Cartesian product of fixed points
  std::vector<FixedPointRecord> acc{{Vec(0), FixedKind::Saddle, {}}};
  for (size_t i = 0; i < systems.size(); ++i) {
    std::vector<FixedPointRecord> next;
    for (const auto& a : acc)
      for (const auto& b : systems[i]->fixed_points) {
        FixedPointRecord r;
        r.location = Vec(a.location.size() + b.location.size());
        r.location << a.location, b.location;
        r.multipliers = a.multipliers;
        r.multipliers.insert(r.multipliers.end(), b.multipliers.begin(), b.multipliers.end());
        next.push_back(r);
      }
    acc = std::move(next);
  }
  for (auto& r : acc) {
    std::sort(r.multipliers.begin(), r.multipliers.end(), std::greater<>());
    r.kind = *classify_multipliers(r.multipliers);
  }
  sys->fixed_points = acc;

  std::vector<RegionPtr> regions;
  for (const auto& s : systems)
    if (s->trapping) regions.push_back(s->trapping);
  if (regions.size() == systems.size()) sys->trapping = product_region(M, regions);
  validate_system(*sys);
  return sys;
}

SystemPtr with_sink(const SystemPtr& main, const SystemPtr& ms) {
  bool has_sink = false;
  for (const auto& fp : ms->fixed_points) has_sink = has_sink || fp.kind == FixedKind::Sink;
  if (!has_sink) throw ConstructionError("with_sink: " + ms->name + " has no isolated sink");
  auto p = product({main, ms});
  auto sys = std::make_shared<SystemSpec>(*p);
  sys->name = "with_sink(" + main->name + ", " + ms->name + ")";
  sys->declared_dim = main->declared_dim;
  sys->declared_orientable = main->declared_orientable;
  sys->recipe.op = "with_sink";
  return sys;
}

SystemPtr build_torus_attractor(int n, int d) {
  if (n < 2 || n > 8) throw ConfigError("torus attractors are built for 2 <= n <= 8");
  if (d < 1 || d > n - 1) throw ConfigError("torus attractor needs 1 <= d <= n-1 (got d=" + std::to_string(d) + ")");
  auto da_on = [](int k) {
    const auto a = toral_automorphism(codimension_one_anosov(k));
    return da_surgery(*a, default_surgery_params(*a));
  };
  if (d == n - 1) return da_on(n);
  return with_sink(da_on(d + 1), torus_gradient_ms(n - d - 1));
}

SystemPtr build_sphere_attractor(int n, int d) {
  if (n < 2) throw ConfigError("sphere attractors need n >= 2");
  if (d < 1 || d > n / 2)
    throw ConfigError("sphere attractor needs 1 <= d <= floor(n/2) = " + std::to_string(n / 2) + " (got d=" +
                      std::to_string(d) + ")");
  if (d == 1) {
    SystemPtr s = plykin_system();
    for (int k = 2; k < n; ++k) s = tube_spinup(s);
    return s;
  }
  return capped_product(build_sphere_attractor(2, 1), build_sphere_attractor(n - 2, d - 1));
}

SystemPtr build_any_manifold(const SystemPtr& base_ms, int d) {
  const int n = base_ms->dim();
  auto sphere = build_sphere_attractor(n, d);
  return connected_sum(base_ms, sphere, auto_neck(*base_ms, *sphere));
}

// ---------------------------------------------------------------------------
// Recipes

namespace {

void emit(const RecipeNode& r, std::vector<std::string>& sections, int& counter) {
  const int me = counter++;
  std::vector<int> kids;
  std::vector<std::string> bodies;
  std::ostringstream os;
  os << "[node" << me << "]\n";
  os << "op = " << r.op << "\n";
  for (const auto& [k, v] : r.params) os << k << " = " << v << "\n";
  const size_t slot = sections.size();
  sections.emplace_back();
  std::string children;
  for (const auto& c : r.children) {
    if (!children.empty()) children += ",";
    children += "node" + std::to_string(counter);
    emit(c, sections, counter);
  }
  if (!children.empty()) os << "children = " << children << "\n";
  sections[slot] = os.str();
}

}  // namespace

std::string serialize_recipe(const RecipeNode& r) {
  std::vector<std::string> sections;
  int counter = 0;
  emit(r, sections, counter);
  std::string out;
  for (size_t i = 0; i < sections.size(); ++i) out += (i ? "\n" : "") + sections[i];
  return out;
}

RecipeNode parse_recipe(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("recipe: ") + e.what());
  }
  std::map<std::string, const pt::ptree*> nodes;
  for (const auto& [name, sec] : tree) {
    if (name.rfind("node", 0) != 0) throw ConfigError("recipe: unexpected section [" + name + "]");
    nodes[name] = &sec;
  }
  if (!nodes.count("node0")) throw ConfigError("recipe: missing [node0]");
  std::function<RecipeNode(const std::string&, int)> build = [&](const std::string& name, int depth) {
    if (depth > 64) throw ConfigError("recipe: nesting too deep");
    auto it = nodes.find(name);
    if (it == nodes.end()) throw ConfigError("recipe: missing section [" + name + "]");
    RecipeNode r;
    for (const auto& [k, v] : *it->second) {
      const std::string val = v.get_value<std::string>();
      if (k == "op")
        r.op = val;
      else if (k == "children") {
        std::stringstream ss(val);
        std::string c;
        while (std::getline(ss, c, ',')) {
          c.erase(0, c.find_first_not_of(' '));
          c.erase(c.find_last_not_of(' ') + 1);
          r.children.push_back(build(c, depth + 1));
        }
      } else
        r.params[k] = val;
    }
    if (r.op.empty()) throw ConfigError("recipe: section [" + name + "] has no op");
    return r;
  };
  return build("node0", 0);
}

std::string recipe_hash(const RecipeNode& r) {
  const std::string s = serialize_recipe(r);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

using Params = std::map<std::string, std::string>;

void allow_only(const RecipeNode& r, std::initializer_list<const char*> keys, size_t nchildren) {
  for (const auto& [k, v] : r.params) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw ConfigError("recipe: unknown key '" + k + "' for op " + r.op);
  }
  if (r.children.size() != nchildren && nchildren != static_cast<size_t>(-1))
    throw ConfigError("recipe: op " + r.op + " expects " + std::to_string(nchildren) + " children");
}

std::string need(const Params& p, const std::string& k, const std::string& op) {
  auto it = p.find(k);
  if (it == p.end()) throw ConfigError("recipe: op " + op + " requires key '" + k + "'");
  return it->second;
}

int parse_int(const std::string& s) {
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
}

}  // namespace

SystemPtr build_from_recipe(const RecipeNode& r) {
  const auto& p = r.params;
  const auto any = static_cast<size_t>(-1);
  if (r.op == "toral_automorphism") {
    allow_only(r, {"matrix"}, 0);
    return toral_automorphism(parse_int_matrix(need(p, "matrix", r.op)));
  }
  if (r.op == "da_surgery") {
    allow_only(r, {"center", "radius", "strength", "profile", "depth", "flat_end"}, 1);
    const auto anosov = build_from_recipe(r.children[0]);
    SurgeryParams prm = default_surgery_params(*anosov);
    if (p.count("center")) prm.center = parse_vec(p.at("center"));
    if (p.count("radius")) prm.radius = parse_real(p.at("radius"));
    if (p.count("strength")) prm.strength = parse_real(p.at("strength"));
    const std::string prof = p.count("profile") ? p.at("profile") : "plateau";
    if (prof == "plateau") {
      const double depth = p.count("depth") ? parse_real(p.at("depth")) : prm.profile.depth();
      const double flat = p.count("flat_end") ? parse_real(p.at("flat_end")) : prm.profile.flat_end();
      prm.profile = SurgeryProfile::plateau(depth, flat);
    } else if (prof == "exponential") {
      prm.profile = SurgeryProfile::exponential();
    } else {
      throw ConfigError("recipe: unknown surgery profile '" + prof + "' (plateau, exponential)");
    }
    return da_surgery(*anosov, prm);
  }
  if (r.op == "plykin") {
    allow_only(r, {}, 0);
    return plykin_system();
  }
  if (r.op == "north_south") {
    allow_only(r, {"k", "c"}, 0);
    return north_south_sphere(parse_int(need(p, "k", r.op)), p.count("c") ? parse_real(p.at("c")) : 0.5);
  }
  if (r.op == "torus_gradient") {
    allow_only(r, {"k"}, 0);
    return torus_gradient_ms(parse_int(need(p, "k", r.op)));
  }
  if (r.op == "radial_logistic") {
    allow_only(r, {}, 0);
    return radial_logistic_map();
  }
  if (r.op == "planar_rotation") {
    allow_only(r, {}, 0);
    return planar_rotation();
  }
  if (r.op == "product") {
    allow_only(r, {}, any);
    std::vector<SystemPtr> kids;
    for (const auto& c : r.children) kids.push_back(build_from_recipe(c));
    return product(kids);
  }
  if (r.op == "with_sink") {
    allow_only(r, {}, 2);
    return with_sink(build_from_recipe(r.children[0]), build_from_recipe(r.children[1]));
  }
  if (r.op == "tube_spinup") {
    allow_only(r, {}, 1);
    return tube_spinup(build_from_recipe(r.children[0]));
  }
  if (r.op == "capped_product") {
    allow_only(r, {}, 2);
    return capped_product(build_from_recipe(r.children[0]), build_from_recipe(r.children[1]));
  }
  if (r.op == "connected_sum") {
    allow_only(r, {}, 2);
    const auto base = build_from_recipe(r.children[0]);
    const auto sph = build_from_recipe(r.children[1]);
    return connected_sum(base, sph, auto_neck(*base, *sph));
  }
  if (r.op == "suspension") {
    allow_only(r, {"tau"}, 1);
    return suspension(build_from_recipe(r.children[0]), p.count("tau") ? parse_real(p.at("tau")) : kSuspensionTau);
  }
  throw ConfigError("recipe: unknown op '" + r.op + "'");
}

}  // namespace attr
