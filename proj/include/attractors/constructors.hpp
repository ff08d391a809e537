#pragma once

#include "attractors/base_systems.hpp"

namespace attr {

SystemPtr product(const std::vector<SystemPtr>& systems);
SystemPtr with_sink(const SystemPtr& main, const SystemPtr& ms);

// Tube state [x, rho], rho in [0, 2]; the invariant sphere is rho = 1 and the poles
// rho = 0, 2 are the new sources.
constexpr double kTubeHalfWidth = 0.5;
SystemPtr tube_spinup(const SystemPtr& system, std::shared_ptr<const Diffeotopy> dtp = nullptr,
                      BumpProfile theta = {});

struct InvariantDisk {
  SystemPtr owner;
  RegionPtr region;
  double margin = 0.0;
};
// Verifies f(D) inside D with positive margin and that the designated source lies outside.
InvariantDisk invariant_disk(const SystemPtr& sys, int resolution = 128);

// Capped state [inf_flag, x_left, x_right]: the one-point compactification of the
// product of the punctured factor spheres. inf_flag = 1 is the cap source.
SystemPtr capped_product(const SystemPtr& left, const SystemPtr& right);

struct NeckParams {
  Vec sink_center;       // omega on the base manifold
  double sink_radius;    // |V| < sink_radius in the base sink chart
  Vec source_center;     // alpha on the sphere
  double source_radius;  // |Z| < source_radius in the sphere source chart
  double exponent;       // |V| = K |Z|^-exponent on the neck
  double K;
  double collar_width;   // radial extent of one fundamental annulus in the Z chart
  double sink_margin = 0, source_margin = 0;
};
NeckParams auto_neck(const SystemSpec& base, const SystemSpec& sphere);
// Sum state [side, x_base, x_sphere]; side 0 is the base part, 1 the sphere part.
SystemPtr connected_sum(const SystemPtr& base, const SystemPtr& sphere, const NeckParams& neck);
const NeckParams* neck_of(const SystemSpec& sum);

constexpr double kSuspensionTau = 0.6180339887498949;
// State [x, s], s in [0, 1), with (x, 1) ~ (f(x), 0).
SystemPtr suspension(const SystemPtr& system, double tau = kSuspensionTau);

SystemPtr build_torus_attractor(int n, int d);
SystemPtr build_sphere_attractor(int n, int d);
SystemPtr build_any_manifold(const SystemPtr& base_ms, int d);

// Recipes: INI-like canonical text, content hash, and reconstruction.
std::string serialize_recipe(const RecipeNode& r);
RecipeNode parse_recipe(const std::string& text);
std::string recipe_hash(const RecipeNode& r);
SystemPtr build_from_recipe(const RecipeNode& r);

}  // namespace attr
