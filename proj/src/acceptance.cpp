#include "attractors/acceptance.hpp"

#include "attractors/analysis.hpp"
#include "attractors/constructors.hpp"

#include <chrono>
#include <numbers>
#include <sstream>

namespace attr {

namespace {

std::string f6(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Checks {
  bool pass = true;
  std::string detail;
  void add(const std::string& what, bool ok, const std::string& info = "") {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (info.empty() ? "" : " " + info) + (ok ? "" : " [FAIL]");
  }
};

struct Pipeline {
  MarginReport trapping;
  LyapunovReport lyap;
  UnstableDim ud;
  AttractorSample sample;
  DimensionReport dim;
  ProbeReport probe;
  ExpandingVerdict verdict;
};

Pipeline pipeline(const SystemSpec& sys, long points, int trap_res, long lyap_steps, std::uint64_t seed = 1) {
  Pipeline p;
  if (sys.trapping)
    p.trapping = verify_trapping(sys, *sys.trapping, trap_res);
  else
    p.trapping.proper = false;
  p.lyap = lyapunov_spectrum(sys, seeded_start(sys, seed), lyap_steps, 5, {1, 2, 3});
  p.ud = unstable_dim(p.lyap, sys.is_flow);
  p.sample = attractor_sample(sys, points, 1000, seed);
  p.dim = box_dimension(embedded(sys, p.sample.points));
  p.probe = attractor_probe(sys, p.sample, p.ud.value + p.ud.neutral);
  p.verdict = expanding_attractor_check(sys, p.trapping, p.lyap, p.dim, p.probe);
  return p;
}

double box_of(const SystemSpec& sys, long points, std::uint64_t seed) {
  return box_dimension(embedded(sys, attractor_sample(sys, points, 1000, seed).points)).dimension;
}

std::string list(const std::vector<double>& v) {
  std::string s = "{";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + f6(v[i]);
  return s + "}";
}

SystemPtr cat_da() {
  const auto a = toral_automorphism(cat_matrix());
  return da_surgery(*a, default_surgery_params(*a));
}

// ---------------------------------------------------------------------------

Checks radial_multipliers() {
  Checks c;
  const double e = std::numbers::e;
  const double g0 = radial_flow_derivative(0.0, 1.0), g1 = radial_flow_derivative(1.0, 1.0);
  // variational equation of rho' = rho (1 - rho) integrated with RK4
  auto integrate = [](double rho) {
    const int steps = 10000;
    const double h = 1.0 / steps;
    double r = rho, v = 1.0;
    auto F = [](double r_, double v_) { return std::pair{r_ * (1 - r_), (1 - 2 * r_) * v_}; };
    for (int i = 0; i < steps; ++i) {
      const auto [a1, b1] = F(r, v);
      const auto [a2, b2] = F(r + h / 2 * a1, v + h / 2 * b1);
      const auto [a3, b3] = F(r + h / 2 * a2, v + h / 2 * b2);
      const auto [a4, b4] = F(r + h * a3, v + h * b3);
      r += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
      v += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
    }
    return std::pair{r, v};
  };
  const auto [r0, v0] = integrate(0.0);
  const auto [r1, v1] = integrate(1.0);
  const auto [rm, vm] = integrate(0.3);
  c.add("closed g'(0)-e", std::abs(g0 - e) < 1e-6, f6(g0 - e));
  c.add("closed g'(1)-1/e", std::abs(g1 - 1 / e) < 1e-6, f6(g1 - 1 / e));
  c.add("ode g'(0)-e", std::abs(v0 - e) < 1e-6, f6(v0 - e));
  c.add("ode g'(1)-1/e", std::abs(v1 - 1 / e) < 1e-6, f6(v1 - 1 / e));
  c.add("flow(0.3) closed vs ode", std::abs(radial_flow(0.3, 1.0) - rm) < 1e-9 && std::abs(radial_flow_derivative(0.3, 1.0) - vm) < 1e-9,
        f6(radial_flow(0.3, 1.0) - rm));
  (void)r0;
  (void)r1;
  return c;
}

Checks linear_oracle() {
  Checks c;
  const auto cat = toral_automorphism(cat_matrix());
  const double l = std::log((3 + std::sqrt(5.0)) / 2);
  const auto L = lyapunov_spectrum(*cat, seeded_start(*cat, 1), 1000000, 5, {1});
  c.add("lyapunov", std::abs(L.exponents[0] - l) < 1e-3 && std::abs(L.exponents[1] + l) < 1e-3, list(L.exponents));
  const auto c1 = periodic_census(*cat, 1, 16), c2 = periodic_census(*cat, 2, 16);
  c.add("census p=1", c1.count() == 1, std::to_string(c1.count()));
  c.add("census p=2", c2.count() == 5, std::to_string(c2.count()));
  return c;
}

Checks da_construction() {
  Checks c;
  const auto da = cat_da();
  const auto p = pipeline(*da, 1000000, 512, 200000);
  c.add("trapping 512^2", p.trapping.pass && p.trapping.proper && p.trapping.margin > 0, "margin " + f6(p.trapping.margin));
  const auto& src = da->fixed_points.front();
  bool rec = src.kind == FixedKind::Source;
  for (double m : src.multipliers) rec = rec && m > 1.0;
  const auto num = eigen_moduli(numeric_jacobian(*da, src.location).J);
  c.add("source multipliers", rec && num.back() > 1.0, list(num));
  c.add("lambda1>0>lambda2", p.lyap.exponents[0] > 0 && p.lyap.exponents[1] < 0, list(p.lyap.exponents));
  c.add("expanding d=1", p.verdict.pass && p.ud.value == 1, p.verdict.summary());
  std::vector<double> dims;
  double mean = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    dims.push_back(box_of(*da, 1000000, s));
    mean += dims.back() / 5;
  }
  bool ok = true;
  for (double d : dims) ok = ok && d > 1 && d < 2 && std::abs(d - mean) <= 0.05;
  c.add("box over 5 seeds", ok, list(dims));
  return c;
}

Checks product_laws() {
  Checks c;
  const auto da = cat_da();
  const auto ns = north_south_sphere(2);
  const auto spec_of = [](const SystemSpec& s) {
    return lyapunov_spectrum(s, seeded_start(s, 1), 100000, 5, {1, 2, 3});
  };
  const auto L_da = spec_of(*da), L_ns = spec_of(*ns);
  for (const auto& [name, A, B, LA, LB] :
       std::vector<std::tuple<std::string, SystemPtr, SystemPtr, LyapunovReport, LyapunovReport>>{
           {"DAxNS", da, ns, L_da, L_ns}, {"DAxDA", da, da, L_da, L_da}}) {
    const auto P = product({A, B});
    for (int per : {1, 2}) {
      const auto ca = periodic_census(*A, per, 16).count(), cb = periodic_census(*B, per, 16).count();
      const auto cp = periodic_census(*P, per, 16).count();
      c.add(name + " census p=" + std::to_string(per), cp == ca * cb,
            std::to_string(ca) + "x" + std::to_string(cb) + "=" + std::to_string(cp));
    }
    double off = 0;
    Rng rng(5);
    const int da_ = A->dim();
    for (int i = 0; i < 100; ++i) {
      const Vec x = P->manifold->random_point(rng);
      const Mat J = numeric_jacobian(*P, x).J;
      Mat B0 = Mat::Zero(J.rows(), J.cols());
      B0.topLeftCorner(da_, da_) = tangent_at(*A, x.head(A->manifold->storage()));
      B0.bottomRightCorner(B->dim(), B->dim()) = tangent_at(*B, x.tail(B->manifold->storage()));
      off = std::max(off, (J - B0).cwiseAbs().maxCoeff());
    }
    c.add(name + " block-diagonal", off < 1e-6, f6(off));
    const auto LP = spec_of(*P);
    const int up = unstable_dim(LP).value, ua = unstable_dim(LA).value, ub = unstable_dim(LB).value;
    c.add(name + " unstable_dim", up == ua + ub,
          std::to_string(ua) + "+" + std::to_string(ub) + "=" + std::to_string(up));
    std::vector<double> uni = LA.exponents;
    uni.insert(uni.end(), LB.exponents.begin(), LB.exponents.end());
    std::sort(uni.begin(), uni.end(), std::greater<>());
    double dev = 0;
    for (size_t k = 0; k < uni.size(); ++k) dev = std::max(dev, std::abs(uni[k] - LP.exponents[k]));
    c.add(name + " spectrum union", dev < 2e-2, "max dev " + f6(dev));
  }
  const auto dada = product({da, da});
  const double b_da = box_of(*da, 1000000, 1), b_pp = box_of(*dada, 1000000, 1);
  c.add("DAxDA box in (2,3)", b_pp > 2 && b_pp < 3, f6(b_pp));
  c.add("DAxDA box vs sum", std::abs(b_pp - 2 * b_da) < 0.2, f6(b_pp) + " vs " + f6(2 * b_da));
  return c;
}

Checks tube_spinup_check() {
  Checks c;
  const auto ply = plykin_system();
  const auto tube = tube_spinup(ply);
  const int nb = ply->manifold->storage();
  Rng rng(11);
  double dev = 0;
  for (int i = 0; i < 10000; ++i) {
    Vec x(nb + 1);
    x << ply->manifold->random_point(rng), 1.0;
    const Vec y = tube->forward(x), z = tube->backward(x);
    dev = std::max({dev, std::abs(y(nb) - 1.0), std::abs(z(nb) - 1.0), (y.head(nb) - ply->forward(x.head(nb))).cwiseAbs().maxCoeff(),
                    (z.head(nb) - ply->backward(x.head(nb))).cwiseAbs().maxCoeff()});
  }
  c.add("equator invariant", dev <= 1e-15, "max dev " + f6(dev));
  const auto Lp = lyapunov_spectrum(*ply, seeded_start(*ply, 1), 100000, 5, {1, 2, 3});
  const auto p = pipeline(*tube, 1000000, 128, 100000);
  const auto& Lt = p.lyap.exponents;
  bool gains = Lt.size() == 3 && std::abs(Lt[1] + 1.0) < 2e-2 && std::abs(Lt[0] - Lp.exponents[0]) < 2e-2 &&
               std::abs(Lt[2] - Lp.exponents[1]) < 2e-2;
  c.add("spectrum gains -1", gains, list(Lt) + " vs " + list(Lp.exponents));
  const auto cen = periodic_census(*tube, 1, 16);
  int poles = 0, sources = 0;
  for (const auto& q : cen.points)
    if (q.kind == FixedKind::Source) {
      ++sources;
      for (const auto& a : tube->manifold->anchors())
        if (tube->manifold->distance(q.location, a) < 1e-6) ++poles;
    }
  c.add("census sources at poles", sources == 2 && poles == 2,
        std::to_string(sources) + " sources, " + std::to_string(poles) + " at poles");
  c.add("expanding on S^3", p.verdict.pass && p.ud.value == 1 && tube->declared_dim == ply->declared_dim,
        p.verdict.summary());
  return c;
}

Checks sphere_recursion() {
  Checks c;
  bool built = true, rejected = true;
  std::string failures;
  for (int n = 2; n <= 6; ++n) {
    for (int d = 1; d <= n / 2; ++d) {
      try {
        (void)build_sphere_attractor(n, d);
      } catch (const std::exception& e) {
        built = false;
        failures += " (" + std::to_string(n) + "," + std::to_string(d) + "): " + e.what();
      }
    }
    try {
      (void)build_sphere_attractor(n, n / 2 + 1);
      rejected = false;
    } catch (const ConfigError&) {
    }
  }
  c.add("all (n,d) built", built, failures);
  c.add("d > n/2 rejected", rejected);
  const auto s = build_sphere_attractor(4, 2);
  const auto L = lyapunov_spectrum(*s, seeded_start(*s, 1), 100000, 5, {1, 2, 3});
  const int ud = unstable_dim(L).value;
  c.add("(4,2) unstable_dim=2", ud == 2, list(L.exponents));
  const double b = box_of(*s, 1000000, 1);
  c.add("(4,2) box in [2,3)", b >= 2 && b < 3, f6(b));
  bool cap = false;
  for (const auto& fp : s->fixed_points)
    cap = cap || (fp.kind == FixedKind::Source && s->manifold->degenerate(fp.location) &&
                  s->manifold->distance(s->forward(fp.location), fp.location) == 0.0);
  c.add("cap source", cap);
  return c;
}

Checks connected_sum_check() {
  Checks c;
  const auto base = torus_gradient_ms(2);
  const auto ply = plykin_system();
  const auto sum = connected_sum(base, ply, auto_neck(*base, *ply));
  const auto& M = *sum->manifold;
  const auto* neck = neck_of(*sum);
  std::vector<Vec> pts;
  Rng rng(21);
  for (int i = 0; i < 7000; ++i) pts.push_back(M.random_point(rng));
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G(0.0, 1.0);
  auto dir = [&](int n) {
    Vec v(n);
    for (int k = 0; k < n; ++k) v(k) = G(rng);
    return Vec(v / v.norm());
  };
  const auto& V = *base->sink_chart;
  const auto& Z = *ply->source_chart;
  for (int i = 0; i < 1500; ++i) {  // one fundamental annulus outside each removed ball
    const Vec v = dir(2) * neck->sink_radius * std::pow(1.0 / V.rate, U(rng));
    Point p{PointKind::Sum, {}, {base->manifold->to_point(V.from(v))}, 0.0, 0, false};
    pts.push_back(M.from_point(p));
    const Vec z = dir(2) * neck->source_radius * std::pow(Z.rate, U(rng));
    Point q{PointKind::Sum, {}, {ply->manifold->to_point(Z.from(z))}, 0.0, 1, false};
    pts.push_back(M.from_point(q));
  }
  double rt = 0;
  for (const auto& x : pts)
    rt = std::max({rt, M.distance(sum->backward(sum->forward(x)), x), M.distance(sum->forward(sum->backward(x)), x)});
  c.add("round trip 1e4 points", rt < 1e-8, f6(rt));
  const double b_sum = box_of(*sum, 1000000, 1), b_ply = box_of(*ply, 1000000, 1);
  c.add("box shift", std::abs(b_sum - b_ply) < 0.05, f6(b_sum) + " vs " + f6(b_ply));
  int reached = 0;
  const int starts = 20;
  for (int i = 0; i < starts; ++i) {
    Point p{PointKind::Sum, {}, {base->manifold->to_point(base->manifold->random_point(rng))}, 0.0, 0, false};
    Vec x = M.from_point(p);
    for (int k = 0; k < 100000; ++k) {
      if (sum->trapping->depth(x) >= 0.0) {
        ++reached;
        break;
      }
      x = sum->forward(x);
    }
  }
  c.add("base orbits reach attractor", reached == starts, std::to_string(reached) + "/" + std::to_string(starts));
  return c;
}

Checks suspension_check() {
  Checks c;
  const auto da = cat_da();
  const auto s = suspension(da);
  Rng rng(31);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  double dev = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec x = s->manifold->random_point(rng);
    const double a = U(rng), b = U(rng);
    dev = std::max(dev, s->manifold->distance(s->flow(s->flow(x, a), b), s->flow(x, a + b)));
  }
  c.add("flow property", dev < 1e-8, f6(dev));
  const auto L = lyapunov_spectrum(*s, seeded_start(*s, 1), 100000, 5, {1, 2, 3});
  const auto& e = L.exponents;
  c.add("spectrum {+,0,-}", e.size() == 3 && e[0] > 0 && std::abs(e[1]) < kNeutralTol && e[2] < 0, list(e));
  const double bs = box_of(*s, 1000000, 1), bd = box_of(*da, 1000000, 1);
  c.add("box = base + 1", std::abs(bs - (bd + 1)) < 0.15, f6(bs) + " vs " + f6(bd) + "+1");
  return c;
}

Checks negative_controls() {
  Checks c;
  const auto cat = toral_automorphism(cat_matrix());
  const auto pc = pipeline(*cat, 200000, 128, 20000);
  c.add("anosov fails trapping", pc.verdict.summary() == "FAIL(trapping)", pc.verdict.summary());
  const auto ns = north_south_sphere(2);
  const auto pn = pipeline(*ns, 200000, 128, 20000);
  c.add("north-south fails expanding", !pn.verdict.pass && pn.ud.value == 0, pn.verdict.summary());
  const auto rot = planar_rotation();
  const auto smp = attractor_sample(*rot, 2000, 100, 1);
  const auto cr = cone_check(*rot, smp.points, 0.3, 1.01, 1, ConeReference::Fixed);
  c.add("rotation fails cones", !cr.pass && cr.violations * 10 >= cr.samples * 9,
        std::to_string(cr.violations) + "/" + std::to_string(cr.samples) + " violations");
  return c;
}

struct Criterion {
  int id;
  const char* name;
  double budget;
  Checks (*run)();
};

const Criterion kCriteria[] = {
    {1, "radial multipliers", 1, radial_multipliers},
    {2, "linear oracle", 10, linear_oracle},
    {3, "DA construction", 300, da_construction},
    {4, "product laws", 900, product_laws},
    {5, "tube spin-up", 300, tube_spinup_check},
    {6, "sphere recursion", 1800, sphere_recursion},
    {7, "connected sum", 300, connected_sum_check},
    {8, "suspension", 600, suspension_check},
    {9, "negative controls", 600, negative_controls},
};

}  // namespace

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os.precision(3);
  os << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << " (" << r.name << "): " << r.detail << " [" << std::fixed
     << r.seconds << " s]";
  return os.str();
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (const auto& cr : kCriteria) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), cr.id) == opt.only.end()) continue;
    CriterionResult r;
    r.id = cr.id;
    r.name = cr.name;
    r.budget = cr.budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto c = cr.run();
      r.pass = c.pass;
      r.detail = c.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.seconds > r.budget) {
      r.pass = false;
      r.detail += "; runtime over budget " + f6(r.budget) + " s [FAIL]";
    }
    if (on_result) on_result(r);
    out.push_back(r);
  }
  return out;
}

}  // namespace attr
