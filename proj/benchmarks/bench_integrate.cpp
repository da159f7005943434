#include <benchmark/benchmark.h>

#include "phmbd/diagnostics.hpp"
#include "phmbd/interconnect.hpp"
#include "phmbd/scenario.hpp"

namespace {

using namespace phmbd;

BuiltSystem builtin(const char* name) { return build_system(parse_scenario(*builtin_scenario_text(name))); }

void BM_FlyingPairRun(benchmark::State& state) {
  const BuiltSystem b = builtin("flying_pair");
  IntegratorConfig cfg;
  cfg.scheme = state.range(0) == 0 ? Scheme::Midpoint : Scheme::MidpointGGL;
  cfg.h = 0.001;
  cfg.t_end = 0.7;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(b.system, b.initial, cfg));
}
BENCHMARK(BM_FlyingPairRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ClosedLoopRun(benchmark::State& state) {
  const BuiltSystem b = builtin("closed_loop");
  IntegratorConfig cfg;
  cfg.h = 0.1;
  cfg.t_end = 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(b.system, b.initial, cfg));
}
BENCHMARK(BM_ClosedLoopRun)->Unit(benchmark::kMillisecond);

void BM_SliderCrankStep(benchmark::State& state) {
  const BuiltSystem b = builtin("slider_crank");
  IntegratorConfig cfg;
  cfg.scheme = state.range(0) == 0 ? Scheme::Midpoint : Scheme::MidpointGGL;
  cfg.h = 0.01;
  const Integrator integ(b.system, cfg);
  SystemState s = b.initial;
  if (cfg.scheme == Scheme::MidpointGGL) s.gamma = Vec::Zero(b.system.m());
  for (auto _ : state) benchmark::DoNotOptimize(integ.step(s));
}
BENCHMARK(BM_SliderCrankStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_StepJacobian(benchmark::State& state) {
  const BuiltSystem b = builtin("closed_loop");
  IntegratorConfig cfg;
  cfg.h = 0.1;
  cfg.jacobian_mode = state.range(0) == 0 ? JacobianMode::Analytic : JacobianMode::FiniteDifference;
  const Integrator integ(b.system, cfg);
  const Vec y = integ.initial_guess(b.initial, nullptr);
  for (auto _ : state) benchmark::DoNotOptimize(integ.jacobian(b.initial, y));
}
BENCHMARK(BM_StepJacobian)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_NullspaceEquivalence(benchmark::State& state) {
  const BuiltSystem b = builtin("flying_pair");
  const CompiledJoint& j = b.system.joints()[0];
  const Vec12 qa = body_block(b.initial.q, 0), qb = body_block(b.initial.q, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nullspace_equivalence(internal_port_matrices(j, qa, qb), j.jacobian(qa, qb), qa, qb));
  }
}
BENCHMARK(BM_NullspaceEquivalence)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
