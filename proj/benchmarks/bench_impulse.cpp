#include "impulse/expr.hpp"
#include "impulse/laws.hpp"
#include "impulse/models.hpp"
#include "impulse/simulator.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace impulse;

ContactFrame random_frame(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto fill = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
  };
  const Matrix a = fill(n, n);
  return ContactFrame{a.transpose() * a + 0.2 * Matrix::Identity(n, n), fill(1, n), fill(n / 2, n)};
}

void BM_TripleSplit(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Index n = state.range(0);
  const ContactFrame frame = random_frame(n, rng);
  const Vector qdot = Vector::LinSpaced(n, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(triple_split(frame, qdot));
}
BENCHMARK(BM_TripleSplit)->Arg(2)->Arg(3)->Arg(6);

void BM_ProjectionOracle(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Index n = state.range(0);
  const ContactFrame frame = random_frame(n, rng);
  const Vector qdot = Vector::LinSpaced(n, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(projection_oracle(frame.metric, frame.stick, qdot));
}
BENCHMARK(BM_ProjectionOracle)->Arg(3)->Arg(6);

void BM_ResolveRodImpact(benchmark::State& state) {
  const ModelSpec rod = build_rod(1.0, 1.0, 1.0 / 3.0);
  const GeneralizedState s{0.0, Vector{{0.0, std::sin(1.0), 1.0}}, Vector{{0.2, -1.0, 0.3}}};
  const ContactLaw law = ContactLaw::coulomb_static(0.5, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(resolve_impact(rod.system, s, law));
}
BENCHMARK(BM_ResolveRodImpact);

void BM_ExprParse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(expr::parse("y - L*sin(th) + sqrt(x^2 + 1) / (2 + cos(th))"));
}
BENCHMARK(BM_ExprParse);

void BM_ExprEvaluateTree(benchmark::State& state) {
  const expr::Expr e = expr::parse("y - L*sin(th) + sqrt(x^2 + 1) / (2 + cos(th))");
  const expr::Environment env{{"x", 0.3}, {"y", 1.2}, {"L", 1.0}, {"th", 0.7}};
  for (auto _ : state) benchmark::DoNotOptimize(expr::evaluate(e, env));
}
BENCHMARK(BM_ExprEvaluateTree);

void BM_ExprEvaluateBound(benchmark::State& state) {
  const expr::Expr e = expr::parse("y - L*sin(th) + sqrt(x^2 + 1) / (2 + cos(th))");
  const expr::BoundExpr bound(e, {"x", "y", "L", "th"});
  const double values[] = {0.3, 1.2, 1.0, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(bound(values));
}
BENCHMARK(BM_ExprEvaluateBound);

void BM_BounceSimulation(benchmark::State& state) {
  ScenarioConfig config(build_point(1.0).system);
  config.law = ContactLaw::restitution(0.5);
  config.initial = GeneralizedState{0.0, Vector{{0.0, 1.0}}, Vector::Zero(2)};
  config.force = Vector{{0.0, -10.0}};
  config.t_end = 5.0;
  config.step = 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(config));
}
BENCHMARK(BM_BounceSimulation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
