#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "phmbd/scenario.hpp"
#include "support/scenarios.hpp"

namespace phmbd {
namespace {

using json = nlohmann::json;
using testing::builtin_config;

json builtin_doc(const std::string& name) { return json::parse(*builtin_scenario_text(name)); }

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigurationError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() / ("phmbd_scenarios_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  void write(const std::string& file, const std::string& text) const { std::ofstream(path_ / file) << text; }

 private:
  std::filesystem::path path_;
};

TEST(Builtins, AllPresentAndValid) {
  const auto names = builtin_scenario_names();
  ASSERT_EQ(names.size(), 3u);
  for (const char* name : {"flying_pair", "closed_loop", "slider_crank"}) {
    ASSERT_TRUE(builtin_scenario_text(name).has_value()) << name;
    EXPECT_NO_THROW(testing::builtin_system(name)) << name;
  }
  EXPECT_FALSE(builtin_scenario_text("pendulum").has_value());
}

TEST(Builtins, FlyingPairTableValues) {
  const ScenarioConfig c = builtin_config("flying_pair");
  ASSERT_EQ(c.bodies.size(), 2u);
  ASSERT_EQ(c.joints.size(), 1u);
  EXPECT_EQ(c.joints[0].type, PairType::Cylindrical);
  EXPECT_EQ(c.joints[0].constraints, 4);
  EXPECT_EQ(*c.joints[0].reference_axis, Vec3::UnitZ());
  EXPECT_EQ(c.h, 0.001);
  EXPECT_EQ(c.t_end, 0.7);
  EXPECT_EQ(c.bodies[0].gravity, Vec3::Zero());
}

TEST(Builtins, ClosedLoopAndSliderCrankTableValues) {
  const ScenarioConfig loop = builtin_config("closed_loop");
  EXPECT_EQ(loop.bodies.size(), 4u);
  EXPECT_EQ(loop.joints.size(), 4u);
  ASSERT_EQ(loop.loads.size(), 1u);
  EXPECT_EQ(loop.loads[0].program, "ramp_decay");
  EXPECT_EQ(loop.loads[0].f_max, 100.0);
  EXPECT_EQ(loop.h, 0.1);
  EXPECT_EQ(loop.t_end, 10.0);

  const BuiltSystem crank = testing::builtin_system("slider_crank");
  EXPECT_EQ(crank.system.m(), 35);
  EXPECT_EQ(crank.system.n(), 36);
  EXPECT_EQ(builtin_config("slider_crank").bodies[2].mass, 2.0);
}

TEST(Serialize, RoundTrip) {
  for (const std::string& name : builtin_scenario_names()) {
    const ScenarioConfig c = builtin_config(name);
    EXPECT_EQ(parse_scenario(serialize_scenario(c)), c) << name;
  }
}

TEST(Parse, RejectsInconsistentDirectors) {
  json doc = builtin_doc("flying_pair");
  // |d1|^2 = 1.2
  doc["bodies"][0]["initial_position"][3] = std::sqrt(1.2);
  const std::string msg = error_of(doc.dump());
  EXPECT_TRUE(contains(msg, "internal constraint row 1")) << msg;
  EXPECT_TRUE(contains(msg, "bodies[0]")) << msg;
}

TEST(Parse, RejectsUnknownKeys) {
  for (const char* path : {"", "bodies", "joints", "integrator"}) {
    json doc = builtin_doc("closed_loop");
    json* target = &doc;
    if (std::string(path) == "bodies") target = &doc["bodies"][1];
    if (std::string(path) == "joints") target = &doc["joints"][0];
    if (std::string(path) == "integrator") target = &doc["integrator"];
    (*target)["damping"] = 0.1;
    EXPECT_TRUE(contains(error_of(doc.dump()), "unknown key 'damping'")) << path;
  }
}

TEST(Parse, RejectsWrongArity) {
  json doc = builtin_doc("flying_pair");
  doc["bodies"][0]["inertias"] = {1.0, 2.0};
  EXPECT_TRUE(contains(error_of(doc.dump()), "expected an array of 3 numbers"));
  doc = builtin_doc("flying_pair");
  doc["bodies"][1]["initial_velocity"].push_back(0.0);
  EXPECT_TRUE(contains(error_of(doc.dump()), "expected an array of 12 numbers"));
  doc = builtin_doc("flying_pair");
  doc["joints"][0]["body_indices"] = {0};
  EXPECT_TRUE(contains(error_of(doc.dump()), "expected two integers"));
}

TEST(Parse, RejectsMissingFieldsAndBadValues) {
  json doc = builtin_doc("flying_pair");
  doc["bodies"][0].erase("mass");
  EXPECT_TRUE(contains(error_of(doc.dump()), "missing field 'mass'"));

  doc = builtin_doc("flying_pair");
  doc["joints"][0]["constraints"] = 5;
  EXPECT_FALSE(error_of(doc.dump()).empty());

  doc = builtin_doc("flying_pair");
  doc["joints"][0].erase("reference_axis");
  EXPECT_TRUE(contains(error_of(doc.dump()), "reference_axis is required"));

  doc = builtin_doc("flying_pair");
  doc["joints"][0]["reference_axis"] = {0, 0, 2};
  EXPECT_TRUE(contains(error_of(doc.dump()), "unit norm"));

  doc = builtin_doc("flying_pair");
  doc["joints"][0]["type"] = "Screw";
  EXPECT_FALSE(error_of(doc.dump()).empty());

  doc = builtin_doc("flying_pair");
  doc["bodies"][1]["index"] = 3;
  EXPECT_TRUE(contains(error_of(doc.dump()), "dense"));

  doc = builtin_doc("flying_pair");
  doc["integrator"]["h"] = 0.0;
  EXPECT_TRUE(contains(error_of(doc.dump()), "h must be positive"));

  doc = builtin_doc("closed_loop");
  doc["loads"][0]["program"] = "sine";
  EXPECT_TRUE(contains(error_of(doc.dump()), "unknown program"));

  EXPECT_TRUE(contains(error_of("{ not json"), "malformed scenario document"));
}

TEST(Parse, RejectsJointBodyOutOfRange) {
  json doc = builtin_doc("closed_loop");
  doc["joints"][1]["body_indices"] = {1, 4};
  EXPECT_TRUE(contains(error_of(doc.dump()), "out of range"));
}

TEST(Build, MultipliersSeedInternalRows) {
  json doc = builtin_doc("flying_pair");
  doc["bodies"][1]["multiplier"] = {1, 2, 3, 4, 5, 6};
  const BuiltSystem b = build_system(parse_scenario(doc.dump()));
  EXPECT_EQ(b.initial.lambda[6], 1.0);
  EXPECT_EQ(b.initial.lambda[11], 6.0);
  EXPECT_EQ(b.initial.lambda.tail(4).norm(), 0.0);
}

TEST(Loads, RampDecayProgram) {
  EXPECT_EQ(ramp_decay(0.0, 100.0), 0.0);
  EXPECT_DOUBLE_EQ(ramp_decay(0.25, 100.0), 50.0);
  EXPECT_DOUBLE_EQ(ramp_decay(0.5, 100.0), 100.0);
  EXPECT_DOUBLE_EQ(ramp_decay(0.75, 100.0), 50.0);
  EXPECT_EQ(ramp_decay(1.0, 100.0), 0.0);
  EXPECT_EQ(ramp_decay(2.0, 100.0), 0.0);
  EXPECT_EQ(load_factor("constant", 3.0, 7.0), 3.0);
  EXPECT_THROW(load_factor("sine", 1.0, 0.0), ConfigurationError);
  Vec6 u;
  u << 400, 0, 0, 300, 0, 0;
  EXPECT_LE((closed_loop_load(0.25) - u).norm(), 1e-12);
}

TEST(Resolve, LookupOrder) {
  TempDir dir;
  json doc = builtin_doc("flying_pair");
  doc["name"] = "custom";
  dir.write("custom.json", doc.dump());
  json shadow = builtin_doc("closed_loop");
  shadow["name"] = "shadowed";
  dir.write("closed_loop.json", shadow.dump());

  const std::string file = (dir.path() / "custom.json").string();
  EXPECT_EQ(parse_scenario(resolve_scenario(file)).name, "custom");

  ::unsetenv("MBD_SCENARIO_PATH");
  EXPECT_THROW(resolve_scenario("custom"), ConfigurationError);
  EXPECT_EQ(parse_scenario(resolve_scenario("closed_loop")).name, "closed_loop");

  const std::string env = "/nonexistent/dir:" + dir.path().string();
  ::setenv("MBD_SCENARIO_PATH", env.c_str(), 1);
  EXPECT_EQ(parse_scenario(resolve_scenario("custom")).name, "custom");
  EXPECT_EQ(parse_scenario(resolve_scenario("custom.json")).name, "custom");
  EXPECT_EQ(parse_scenario(resolve_scenario("closed_loop")).name, "shadowed");
  EXPECT_EQ(parse_scenario(resolve_scenario("slider_crank")).name, "slider_crank");
  ::unsetenv("MBD_SCENARIO_PATH");

  try {
    resolve_scenario("no_such_scenario");
    FAIL() << "expected a configuration error";
  } catch (const ConfigurationError& e) {
    EXPECT_TRUE(contains(e.what(), "not found"));
  }
}

TEST(SliderCrank, GeometryFromTable) {
  const SliderCrankGeometry g = slider_crank_geometry(builtin_config("slider_crank"));
  EXPECT_EQ(g.crank, 0);
  EXPECT_EQ(g.rod, 1);
  EXPECT_EQ(g.block, 2);
  EXPECT_EQ(g.pivot, Vec3(0, 0.1, 0.12));
  EXPECT_EQ(g.slide_axis, Vec3::UnitX());
  EXPECT_LE((g.rod_axis - Vec3(0, -0.894427, 0.447214)).norm(), 1e-12);
  EXPECT_THROW(slider_crank_geometry(builtin_config("closed_loop")), ConfigurationError);
}

TEST(SliderCrank, InitialVelocitiesReproduceTable) {
  const ScenarioConfig c = builtin_config("slider_crank");
  const SliderCrankVelocities sol = slider_crank_initial_velocities(slider_crank_geometry(c), Vec3(6, 0, 0));
  EXPECT_LE((sol.rod_velocity - Vec3(0.12, -0.24, 0)).norm(), 1e-6);
  EXPECT_NEAR(sol.slide_rate, 0.24, 1e-6);
  ASSERT_EQ(sol.velocities.size(), 3u);
  for (size_t k = 0; k < 3; ++k) {
    EXPECT_LE((sol.velocities[k] - c.bodies[k].initial_velocity).cwiseAbs().maxCoeff(), 1e-5) << "body " << k;
  }
  // the solved field is consistent with the compiled joints
  const BuiltSystem b = build_system(c);
  Vec v(36);
  for (int k = 0; k < 3; ++k) v.segment<12>(12 * k) = sol.velocities[static_cast<size_t>(k)];
  const Vec gv = b.system.constraint_jacobian(b.initial.q).bottomRows(17) * v;
  EXPECT_LE(gv.cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace phmbd
