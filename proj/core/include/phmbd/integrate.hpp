#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phmbd/assembly.hpp"

namespace phmbd {

enum class Scheme { Midpoint, MidpointGGL };
enum class JacobianMode { Analytic, FiniteDifference };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);  // "mp" | "mp-ggl"

struct IntegratorConfig {
  Scheme scheme = Scheme::Midpoint;
  double h = 1e-3;
  double t_end = 0.0;
  double newton_tol = 1e-9;
  int newton_max_iter = 50;
  JacobianMode jacobian_mode = JacobianMode::Analytic;
};

// Step unknowns are packed as y = (q1, v1, lambda_bar) for the midpoint scheme
// and y = (q1, v1, lambda_bar, gamma_bar) for the GGL variant.
int unknown_count(const MultibodySystem& sys, Scheme s);

Vec midpoint_residual(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h);
Mat midpoint_jacobian(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h);
Vec ggl_residual(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h);
Mat ggl_jacobian(const MultibodySystem& sys, const SystemState& s0, const Vec& y, double h);

// Central differences, relative step 1e-6.
Mat finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step = 1e-6);

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  std::string reason;
  Vec x;
};

// Full-step Newton with at least one iteration; converged iff ||r||_inf <= tol
// within max_iter iterations.
NewtonReport newton_solve(const std::function<Vec(const Vec&)>& residual,
                          const std::function<Mat(const Vec&)>& jacobian, const Vec& guess,
                          double tol, int max_iter);

struct StepFailure {
  int step = 0;  // index of the step that failed (state step -> step+1)
  double t = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  std::string reason;
};

class NewtonFailure : public std::runtime_error {
 public:
  explicit NewtonFailure(StepFailure info);
  const StepFailure& info() const { return info_; }

 private:
  StepFailure info_;
};

struct StepResult {
  SystemState state;
  int iterations = 0;
  double residual_norm = 0.0;
};

struct Trajectory {
  std::vector<SystemState> states;
  std::vector<int> newton_iterations;    // 0 for the initial state
  std::vector<double> residual_norms;
  double h = 0.0;
  Scheme scheme = Scheme::Midpoint;
  std::optional<StepFailure> failure;

  bool completed() const { return !failure.has_value(); }
};

class Integrator {
 public:
  Integrator(const MultibodySystem& sys, IntegratorConfig config);

  const IntegratorConfig& config() const { return config_; }

  // Advances by h. q_prev, when given, seeds the position guess by extrapolation.
  StepResult step(const SystemState& s, const Vec* q_prev = nullptr, int step_index = 0) const;
  Trajectory simulate(const SystemState& initial) const;

  Vec residual(const SystemState& s0, const Vec& y) const;
  Mat jacobian(const SystemState& s0, const Vec& y) const;
  Vec initial_guess(const SystemState& s, const Vec* q_prev) const;

 private:
  const MultibodySystem* sys_;
  IntegratorConfig config_;
};

SystemState step(const MultibodySystem& sys, const SystemState& s, const IntegratorConfig& config);
Trajectory simulate(const MultibodySystem& sys, const SystemState& initial, const IntegratorConfig& config);

// Number of steps on the grid t^n = n h covering [0, t_end].
long step_count(double h, double t_end);

}  // namespace phmbd
