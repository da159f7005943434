#include "phmbd/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "builtin_scenarios.hpp"

namespace phmbd {

using nlohmann::json;

namespace {

constexpr double kConsistencyTol = 1e-6;
constexpr double kAxisNormTol = 1e-9;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigurationError(where + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(where, "unknown key '" + it.key() + "'");
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing field '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> vector_field(const json& j, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != N)
    fail(where, "expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = number(j[static_cast<size_t>(i)], where);
  return v;
}

template <typename Derived>
json to_json(const Eigen::MatrixBase<Derived>& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

const char* kRowNames[6] = {"|d1|=1", "|d2|=1", "|d3|=1", "d1.d2=0", "d1.d3=0", "d2.d3=0"};

void validate(const ScenarioConfig& c) {
  if (c.bodies.empty()) fail("bodies", "at least one body is required");
  const int nb = static_cast<int>(c.bodies.size());
  for (int k = 0; k < nb; ++k) {
    const BodySetup& b = c.bodies[static_cast<size_t>(k)];
    const std::string where = "bodies[" + std::to_string(k) + "]";
    if (b.index != k) fail(where, "body indices must be dense from 0 (found " + std::to_string(b.index) + ")");
    const Vec6 g = internal_constraints(b.initial_position);
    for (int r = 0; r < 6; ++r) {
      if (std::abs(g[r]) > kConsistencyTol) {
        std::ostringstream os;
        os << "initial position violates internal constraint row " << r + 1 << " (" << kRowNames[r]
           << "), value " << g[r];
        fail(where, os.str());
      }
    }
  }
  for (size_t j = 0; j < c.joints.size(); ++j) {
    const JointSetup& js = c.joints[j];
    const std::string where = "joints[" + std::to_string(j) + "]";
    for (int idx : js.body_indices)
      if (idx < 0 || idx >= nb) fail(where, "body index " + std::to_string(idx) + " out of range");
    if (js.constraints && *js.constraints != constraint_count(js.type)) {
      fail(where, to_string(js.type) + " pair has " + std::to_string(constraint_count(js.type)) +
                      " constraints, document says " + std::to_string(*js.constraints));
    }
    if (js.type != PairType::Spherical && !js.reference_axis) fail(where, "reference_axis is required");
    if (js.reference_axis && std::abs(js.reference_axis->norm() - 1.0) > kAxisNormTol)
      fail(where, "reference_axis must have unit norm");
  }
  for (size_t l = 0; l < c.loads.size(); ++l) {
    const LoadSetup& ld = c.loads[l];
    const std::string where = "loads[" + std::to_string(l) + "]";
    if (ld.body < 0 || ld.body >= nb) fail(where, "body index out of range");
    if (ld.program != "ramp_decay" && ld.program != "constant") fail(where, "unknown program '" + ld.program + "'");
  }
  if (!(c.h > 0.0)) fail("integrator", "h must be positive");
  if (c.t_end < 0.0) fail("integrator", "t_end must be non-negative");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("malformed scenario document: ") + e.what());
  }
  reject_unknown(doc, {"name", "bodies", "joints", "loads", "integrator"}, "scenario");

  ScenarioConfig c;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) fail("name", "expected a string");
    c.name = it->get<std::string>();
  }

  const json& bodies = require(doc, "bodies", "scenario");
  if (!bodies.is_array()) fail("bodies", "expected an array");
  for (size_t k = 0; k < bodies.size(); ++k) {
    const json& b = bodies[k];
    const std::string where = "bodies[" + std::to_string(k) + "]";
    reject_unknown(b, {"index", "mass", "inertias", "gravity", "dimensions", "initial_position",
                       "initial_velocity", "multiplier"}, where);
    BodySetup s;
    const json& idx = require(b, "index", where);
    if (!idx.is_number_integer()) fail(where + ".index", "expected an integer");
    s.index = idx.get<int>();
    s.mass = number(require(b, "mass", where), where + ".mass");
    s.inertias = vector_field<3>(require(b, "inertias", where), where + ".inertias");
    if (b.contains("gravity")) s.gravity = vector_field<3>(b["gravity"], where + ".gravity");
    if (b.contains("dimensions")) s.dimensions = vector_field<3>(b["dimensions"], where + ".dimensions");
    s.initial_position = vector_field<12>(require(b, "initial_position", where), where + ".initial_position");
    s.initial_velocity = vector_field<12>(require(b, "initial_velocity", where), where + ".initial_velocity");
    if (b.contains("multiplier")) s.multiplier = vector_field<6>(b["multiplier"], where + ".multiplier");
    c.bodies.push_back(s);
  }

  if (auto it = doc.find("joints"); it != doc.end()) {
    if (!it->is_array()) fail("joints", "expected an array");
    for (size_t j = 0; j < it->size(); ++j) {
      const json& jj = (*it)[j];
      const std::string where = "joints[" + std::to_string(j) + "]";
      reject_unknown(jj, {"type", "constraints", "body_indices", "joint_location", "reference_axis"}, where);
      JointSetup s;
      const json& type = require(jj, "type", where);
      if (!type.is_string()) fail(where + ".type", "expected a string");
      try {
        s.type = pair_type_from_string(type.get<std::string>());
      } catch (const ConfigurationError& e) {
        fail(where, e.what());
      }
      if (jj.contains("constraints")) {
        if (!jj["constraints"].is_number_integer()) fail(where + ".constraints", "expected an integer");
        s.constraints = jj["constraints"].get<int>();
      }
      const json& bi = require(jj, "body_indices", where);
      if (!bi.is_array() || bi.size() != 2 || !bi[0].is_number_integer() || !bi[1].is_number_integer())
        fail(where + ".body_indices", "expected two integers");
      s.body_indices = {bi[0].get<int>(), bi[1].get<int>()};
      s.joint_location = vector_field<3>(require(jj, "joint_location", where), where + ".joint_location");
      if (jj.contains("reference_axis"))
        s.reference_axis = vector_field<3>(jj["reference_axis"], where + ".reference_axis");
      c.joints.push_back(s);
    }
  }

  if (auto it = doc.find("loads"); it != doc.end()) {
    if (!it->is_array()) fail("loads", "expected an array");
    for (size_t l = 0; l < it->size(); ++l) {
      const json& lj = (*it)[l];
      const std::string where = "loads[" + std::to_string(l) + "]";
      reject_unknown(lj, {"body", "program", "f_max", "force", "torque", "r_material"}, where);
      LoadSetup s;
      const json& body = require(lj, "body", where);
      if (!body.is_number_integer()) fail(where + ".body", "expected an integer");
      s.body = body.get<int>();
      const json& prog = require(lj, "program", where);
      if (!prog.is_string()) fail(where + ".program", "expected a string");
      s.program = prog.get<std::string>();
      if (lj.contains("f_max")) s.f_max = number(lj["f_max"], where + ".f_max");
      if (lj.contains("force")) s.force = vector_field<3>(lj["force"], where + ".force");
      if (lj.contains("torque")) s.torque = vector_field<3>(lj["torque"], where + ".torque");
      if (lj.contains("r_material")) s.r_material = vector_field<3>(lj["r_material"], where + ".r_material");
      c.loads.push_back(s);
    }
  }

  if (auto it = doc.find("integrator"); it != doc.end()) {
    reject_unknown(*it, {"h", "t_end"}, "integrator");
    if (it->contains("h")) c.h = number((*it)["h"], "integrator.h");
    if (it->contains("t_end")) c.t_end = number((*it)["t_end"], "integrator.t_end");
  }

  validate(c);
  return c;
}

std::string serialize_scenario(const ScenarioConfig& c) {
  json doc;
  doc["name"] = c.name;
  doc["bodies"] = json::array();
  for (const BodySetup& b : c.bodies) {
    doc["bodies"].push_back({{"index", b.index},
                             {"mass", b.mass},
                             {"inertias", to_json(b.inertias)},
                             {"gravity", to_json(b.gravity)},
                             {"dimensions", to_json(b.dimensions)},
                             {"initial_position", to_json(b.initial_position)},
                             {"initial_velocity", to_json(b.initial_velocity)},
                             {"multiplier", to_json(b.multiplier)}});
  }
  doc["joints"] = json::array();
  for (const JointSetup& j : c.joints) {
    json jj = {{"type", to_string(j.type)},
               {"body_indices", {j.body_indices[0], j.body_indices[1]}},
               {"joint_location", to_json(j.joint_location)}};
    if (j.constraints) jj["constraints"] = *j.constraints;
    if (j.reference_axis) jj["reference_axis"] = to_json(*j.reference_axis);
    doc["joints"].push_back(jj);
  }
  doc["loads"] = json::array();
  for (const LoadSetup& l : c.loads) {
    doc["loads"].push_back({{"body", l.body},
                            {"program", l.program},
                            {"f_max", l.f_max},
                            {"force", to_json(l.force)},
                            {"torque", to_json(l.torque)},
                            {"r_material", to_json(l.r_material)}});
  }
  doc["integrator"] = {{"h", c.h}, {"t_end", c.t_end}};
  return doc.dump(2);
}

double ramp_decay(double t, double f_max) {
  if (t < 0.0 || t > 1.0) return 0.0;
  if (t <= 0.5) return 2.0 * f_max * t;
  return 2.0 * f_max * (1.0 - t);
}

double load_factor(const std::string& program, double f_max, double t) {
  if (program == "ramp_decay") return ramp_decay(t, f_max);
  if (program == "constant") return f_max;
  throw ConfigurationError("unknown load program '" + program + "'");
}

Vec6 closed_loop_load(double t) {
  const double f = ramp_decay(t, 100.0);
  Vec6 u;
  u << 8.0 * f, 0.0, 0.0, 6.0 * f, 0.0, 0.0;
  return u;
}

BuiltSystem build_system(const ScenarioConfig& c) {
  std::vector<RigidBody> bodies;
  std::vector<Vec12> configs;
  for (const BodySetup& b : c.bodies) {
    bodies.push_back(RigidBody::create(b.index, b.mass, b.inertias, b.gravity, b.dimensions));
    configs.push_back(b.initial_position);
  }
  std::vector<CompiledJoint> joints;
  for (size_t j = 0; j < c.joints.size(); ++j) {
    const JointSetup& js = c.joints[j];
    JointSpec spec;
    spec.type = js.type;
    spec.body_a = js.body_indices[0];
    spec.body_b = js.body_indices[1];
    spec.location = js.joint_location;
    spec.reference_axis = js.reference_axis;
    joints.push_back(compile(spec, configs));
    const CompiledJoint& cj = joints.back();
    const Vec r = cj.residual(configs[static_cast<size_t>(spec.body_a)], configs[static_cast<size_t>(spec.body_b)]);
    if (r.size() > 0 && r.lpNorm<Eigen::Infinity>() > kConsistencyTol) {
      std::ostringstream os;
      os << "initial configuration violates the joint constraints, max residual " << r.lpNorm<Eigen::Infinity>();
      fail("joints[" + std::to_string(j) + "]", os.str());
    }
  }
  std::vector<BodyLoad> loads;
  for (const LoadSetup& l : c.loads) {
    BodyLoad bl;
    bl.body = l.body;
    bl.r_material = l.r_material;
    const LoadSetup copy = l;
    bl.wrench = [copy](double t) {
      const double f = load_factor(copy.program, copy.f_max, t);
      Vec6 u;
      u << f * copy.force, f * copy.torque;
      return u;
    };
    loads.push_back(std::move(bl));
  }

  BuiltSystem out{MultibodySystem(std::move(bodies), std::move(joints), std::move(loads)), {}};
  const MultibodySystem& sys = out.system;
  Vec q(sys.n()), v(sys.n()), lambda = Vec::Zero(sys.m());
  for (size_t k = 0; k < c.bodies.size(); ++k) {
    q.segment<12>(12 * static_cast<int>(k)) = c.bodies[k].initial_position;
    v.segment<12>(12 * static_cast<int>(k)) = c.bodies[k].initial_velocity;
    lambda.segment<6>(6 * static_cast<int>(k)) = c.bodies[k].multiplier;
  }
  out.initial = make_state(sys, q, v, lambda);
  return out;
}

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> names;
  for (const auto& s : builtin::scenarios()) names.emplace_back(s.name);
  return names;
}

std::optional<std::string> builtin_scenario_text(const std::string& name) {
  for (const auto& s : builtin::scenarios())
    if (name == s.name) return std::string(s.text);
  return std::nullopt;
}

namespace {

std::optional<std::string> read_file(const std::filesystem::path& p) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(p, ec)) return std::nullopt;
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::string resolve_scenario(const std::string& name) {
  if (auto text = read_file(name)) return *text;
  if (const char* env = std::getenv("MBD_SCENARIO_PATH")) {
    std::stringstream dirs(env);
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
      if (dir.empty()) continue;
      if (auto text = read_file(std::filesystem::path(dir) / name)) return *text;
      if (auto text = read_file(std::filesystem::path(dir) / (name + ".json"))) return *text;
    }
  }
  if (auto text = builtin_scenario_text(name)) return *text;
  throw ConfigurationError("scenario '" + name + "' not found (not a file, not in MBD_SCENARIO_PATH, not bundled)");
}

SliderCrankGeometry slider_crank_geometry(const ScenarioConfig& c) {
  SliderCrankGeometry g;
  for (const BodySetup& b : c.bodies) g.configs.push_back(b.initial_position);
  const JointSetup *rev = nullptr, *sph = nullptr, *uni = nullptr, *pri = nullptr;
  for (const JointSetup& j : c.joints) {
    if (j.type == PairType::Revolute && j.body_indices[0] == j.body_indices[1]) rev = &j;
    if (j.type == PairType::Spherical) sph = &j;
    if (j.type == PairType::Universal) uni = &j;
    if (j.type == PairType::Prismatic && j.body_indices[0] == j.body_indices[1]) pri = &j;
  }
  if (!rev || !sph || !uni || !pri) throw ConfigurationError("scenario does not have the slider-crank joint layout");
  g.crank = rev->body_indices[0];
  g.block = pri->body_indices[0];
  g.rod = -1;
  for (int idx : sph->body_indices)
    if (idx != g.crank) g.rod = idx;
  if (g.rod < 0 || g.rod == g.block) throw ConfigurationError("cannot identify the connecting rod");
  g.pivot = rev->joint_location;
  g.crank_joint = sph->joint_location;
  g.block_joint = uni->joint_location;

  // Universal pair: the rod director most orthogonal to the block axis is locked.
  JointSpec us;
  us.type = PairType::Universal;
  us.body_a = uni->body_indices[0];
  us.body_b = uni->body_indices[1];
  us.location = uni->joint_location;
  us.reference_axis = uni->reference_axis;
  const CompiledJoint cu = compile(us, g.configs);
  const Vec12& qa = g.configs[static_cast<size_t>(us.body_a)];
  const Vec12& qb = g.configs[static_cast<size_t>(us.body_b)];
  const bool rod_is_b = us.body_b == g.rod;
  const Vec12& q_rod = rod_is_b ? qb : qa;
  const Vec12& q_other = rod_is_b ? qa : qb;
  g.rod_axis = director(q_rod, cu.locked_directors()[0]);
  g.block_normal = Vec3::Zero();
  for (int i = 0; i < 3; ++i) g.block_normal += (*uni->reference_axis)[i] * director(q_other, i);

  const Vec12& q_block = g.configs[static_cast<size_t>(g.block)];
  g.slide_axis = Vec3::Zero();
  for (int i = 0; i < 3; ++i) g.slide_axis += (*pri->reference_axis)[i] * director(q_block, i);
  return g;
}

SliderCrankVelocities slider_crank_initial_velocities(const SliderCrankGeometry& g, const Vec3& crank_omega) {
  const Vec12& qc = g.configs[static_cast<size_t>(g.crank)];
  const Vec12& qr = g.configs[static_cast<size_t>(g.rod)];
  const Vec12& qk = g.configs[static_cast<size_t>(g.block)];
  SliderCrankVelocities out;
  out.crank_omega = crank_omega;
  out.crank_velocity = crank_omega.cross(position(qc) - g.pivot);
  const Vec3 v_joint = out.crank_velocity + crank_omega.cross(g.crank_joint - position(qc));

  const Vec3 rho_c = g.block_joint - position(qr);
  const Vec3 rho_b = g.crank_joint - position(qr);
  // unknowns (v_rod, omega_rod, slide rate)
  Eigen::Matrix<double, 7, 7> A = Eigen::Matrix<double, 7, 7>::Zero();
  Eigen::Matrix<double, 7, 1> b = Eigen::Matrix<double, 7, 1>::Zero();
  A.block<3, 3>(0, 0).setIdentity();
  A.block<3, 3>(0, 3) = -hat(rho_c);
  A.block<3, 1>(0, 6) = -g.slide_axis;
  A.block<3, 3>(3, 0).setIdentity();
  A.block<3, 3>(3, 3) = -hat(rho_b);
  b.segment<3>(3) = v_joint;
  A.block<1, 3>(6, 3) = g.rod_axis.cross(g.block_normal).transpose();

  Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> lu(A);
  if (!lu.isInvertible()) throw ConfigurationError("slider-crank velocity system is singular for this geometry");
  const Eigen::Matrix<double, 7, 1> x = lu.solve(b);
  out.rod_velocity = x.segment<3>(0);
  out.rod_omega = x.segment<3>(3);
  out.slide_rate = x[6];

  out.velocities.assign(g.configs.size(), Vec12::Zero());
  out.velocities[static_cast<size_t>(g.crank)] = rigid_velocity(qc, out.crank_velocity, crank_omega);
  out.velocities[static_cast<size_t>(g.rod)] = rigid_velocity(qr, out.rod_velocity, out.rod_omega);
  out.velocities[static_cast<size_t>(g.block)] = rigid_velocity(qk, out.slide_rate * g.slide_axis, Vec3::Zero());
  return out;
}

}  // namespace phmbd
