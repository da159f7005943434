#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "phmbd/assembly.hpp"
#include "phmbd/joints.hpp"

namespace phmbd {

struct BodySetup {
  int index = 0;
  double mass = 1.0;
  Vec3 inertias = Vec3::Ones();
  Vec3 gravity = Vec3::Zero();
  Vec3 dimensions = Vec3::Zero();
  Vec12 initial_position = Vec12::Zero();
  Vec12 initial_velocity = Vec12::Zero();
  Vec6 multiplier = Vec6::Zero();

  bool operator==(const BodySetup&) const = default;
};

struct JointSetup {
  PairType type = PairType::Spherical;
  std::optional<int> constraints;
  std::array<int, 2> body_indices{0, 0};
  Vec3 joint_location = Vec3::Zero();
  std::optional<Vec3> reference_axis;

  bool operator==(const JointSetup&) const = default;
};

// Wrench = f(t) * (force, torque). Programs: "ramp_decay" (peak f_max at t = 0.5,
// zero after t = 1) and "constant" (f = f_max).
struct LoadSetup {
  int body = 0;
  std::string program = "constant";
  double f_max = 1.0;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  Vec3 r_material = Vec3::Zero();

  bool operator==(const LoadSetup&) const = default;
};

struct ScenarioConfig {
  std::string name;
  std::vector<BodySetup> bodies;
  std::vector<JointSetup> joints;
  std::vector<LoadSetup> loads;
  double h = 1e-3;
  double t_end = 1.0;

  bool operator==(const ScenarioConfig&) const = default;
};

// Parses and validates a JSON scenario. Unknown keys, wrong arities and
// inconsistent initial configurations raise ConfigurationError.
ScenarioConfig parse_scenario(const std::string& text);
std::string serialize_scenario(const ScenarioConfig& config);

struct BuiltSystem {
  MultibodySystem system;
  SystemState initial;
};
BuiltSystem build_system(const ScenarioConfig& config);

double load_factor(const std::string& program, double f_max, double t);
double ramp_decay(double t, double f_max);
// Ramp-and-decay wrench of the closed loop: F = 8 f e1, tau = 6 f e1, f_max = 100.
Vec6 closed_loop_load(double t);

std::vector<std::string> builtin_scenario_names();
std::optional<std::string> builtin_scenario_text(const std::string& name);

// Lookup order: an existing file path, then <dir>/<name>[.json] for each directory
// in MBD_SCENARIO_PATH (':'-separated), then the bundled scenarios.
std::string resolve_scenario(const std::string& name_or_path);

// Slider-crank layout: crank on a ground revolute, rod between a spherical pair on
// the crank and a universal pair on the block, block on a ground prismatic pair.
struct SliderCrankGeometry {
  int crank = 0, rod = 1, block = 2;
  Vec3 pivot = Vec3::Zero();        // revolute location
  Vec3 crank_joint = Vec3::Zero();  // crank-rod point
  Vec3 block_joint = Vec3::Zero();  // rod-block point
  Vec3 rod_axis = Vec3::Zero();     // rod director locked by the universal pair
  Vec3 block_normal = Vec3::UnitX();
  Vec3 slide_axis = Vec3::UnitX();
  std::vector<Vec12> configs;
};

SliderCrankGeometry slider_crank_geometry(const ScenarioConfig& config);

struct SliderCrankVelocities {
  Vec3 crank_velocity = Vec3::Zero();
  Vec3 crank_omega = Vec3::Zero();
  Vec3 rod_velocity = Vec3::Zero();
  Vec3 rod_omega = Vec3::Zero();
  double slide_rate = 0.0;
  std::vector<Vec12> velocities;  // director velocities, d_i_dot = omega x d_i
};

// Solves the 7x7 system for (v_rod, omega_rod, slide rate) given the crank rate.
// Throws ConfigurationError if the geometry makes it singular.
SliderCrankVelocities slider_crank_initial_velocities(const SliderCrankGeometry& geometry,
                                                      const Vec3& crank_omega);

}  // namespace phmbd
