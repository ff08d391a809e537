#pragma once

#include "attractors/regions.hpp"

namespace attr {

// theta: even, theta(0) = 0, theta = 1 for |x| >= 1.
struct BumpProfile {
  double operator()(double x) const;
};

// Radial surgery profile psi(u), u = |x - p| / r0, with psi(0) = 1 and psi = 0 for u >= 1.
// phi(u) = d/du (u psi(u)) is the multiplier added along the stable direction.
class SurgeryProfile {
 public:
  enum class Kind { Plateau, Exponential };

  // phi = 1 on a core, quintic step down to -depth, flat, quintic step back to 0 at u = 1.
  static SurgeryProfile plateau(double depth, double flat_end = 0.9);
  static SurgeryProfile exponential();

  Kind kind() const { return kind_; }
  double psi(double u) const;
  double dpsi(double u) const;
  double phi(double u) const;
  double min_phi() const { return min_phi_; }
  double max_G() const { return max_G_; }      // max of u psi(u)
  double core() const { return u1_; }          // psi == 1 on [0, core]
  double depth() const { return m_; }
  double flat_end() const { return u2_; }
  std::string describe() const;

 private:
  double G(double u) const;
  void finish();

  Kind kind_ = Kind::Plateau;
  double m_ = 0, u1_ = 0, w1_ = 0, u2_ = 0;
  double min_phi_ = 0, max_G_ = 0;
};

struct SurgeryParams {
  Vec center;
  double radius = 0.49;
  double strength = 0.0;
  SurgeryProfile profile = SurgeryProfile::exponential();
};

Eigen::MatrixXi cat_matrix();
// Deterministic unimodular hyperbolic matrix on T^n with exactly one contracting eigenvalue.
Eigen::MatrixXi codimension_one_anosov(int n);

SystemPtr toral_automorphism(const Eigen::MatrixXi& A);

// Conformal-core defaults: the stable multiplier at the source is raised to the weakest unstable one.
SurgeryParams default_surgery_params(const SystemSpec& anosov);
double minimal_source_strength(const SystemSpec& anosov, const SurgeryProfile& profile);
SystemPtr da_surgery(const SystemSpec& anosov, const SurgeryParams& params);

SystemPtr plykin_system();
SystemPtr north_south_sphere(int k, double c = 0.5);
SystemPtr torus_gradient_ms(int k);
SystemPtr planar_rotation();

// Time-t map of rho' = rho (1 - rho) on [0, 1], mirrored through rho -> 2 - rho on [1, 2].
double radial_flow(double rho, double t);
double radial_flow_derivative(double rho, double t);
SystemPtr radial_logistic_map();

std::shared_ptr<const Diffeotopy> make_diffeotopy(const SystemSpec& sys);

}  // namespace attr
