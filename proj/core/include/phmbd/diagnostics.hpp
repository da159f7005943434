#pragma once

#include <stdexcept>
#include <vector>

#include "phmbd/integrate.hpp"

namespace phmbd {

struct DiagnosticsReport {
  std::vector<double> t;
  std::vector<double> H;
  std::vector<double> dH;  // H^{n+1} - H^n, one shorter than H
  std::vector<Vec3> L;
  std::vector<double> max_g;
  std::vector<double> max_gv;
  std::vector<int> iterations;

  double max_relative_energy_drift = 0.0;  // max |H^n - H^0| / |H^0|
  double max_energy_increment = 0.0;       // max |dH|
  Vec3 max_momentum_drift = Vec3::Zero();  // per component max |L^n - L^0|
  double max_constraint = 0.0;
  double max_velocity_constraint = 0.0;
};

DiagnosticsReport conservation_report(const Trajectory& traj, const MultibodySystem& sys);

struct ConstraintSample {
  double g = 0.0;
  double gv = 0.0;
};
std::vector<ConstraintSample> constraint_report(const Trajectory& traj, const MultibodySystem& sys);

// h * y^T u over one step, with inputs and port outputs at the midpoint.
// For the GGL scheme the output carries the gamma-dependent velocity correction.
double step_input_energy(const MultibodySystem& sys, const SystemState& s0, const SystemState& s1, double h,
                         Scheme scheme = Scheme::Midpoint);

// Right-hand side of the discrete angular momentum balance for one midpoint step:
// -h sum_k [phi_m x grad V - phi_m x f_phi - sum_i d_i,m x f_i].
Vec3 angular_momentum_increment(const MultibodySystem& sys, const SystemState& s0, const SystemState& s1,
                                double h);

class AlignmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ErrorSet {
  double q = 0.0;
  double v = 0.0;
  double lambda = 0.0;
  double H = 0.0;
  double L = 0.0;
};

// Componentwise RMS at t = tbar. lambda uses the midpoint multiplier of the step
// ending at tbar; H is compared in absolute terms.
ErrorSet rms_error(const Trajectory& traj, const Trajectory& ref, double tbar, const MultibodySystem& sys);

struct SlopeFit {
  double slope = 0.0;
  int points = 0;
  std::vector<int> excluded;  // indices with e <= 0
};

// Least-squares slope of log e against log h over points with e > 0.
SlopeFit convergence_order(const std::vector<double>& h, const std::vector<double>& e);

struct ConvergenceOrders {
  SlopeFit q, v, lambda, H, L;
};
ConvergenceOrders convergence_orders(const std::vector<double>& h, const std::vector<ErrorSet>& errors);

}  // namespace phmbd
