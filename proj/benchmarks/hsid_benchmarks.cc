// Copyright 2026 The hsid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "hsid/arm_mesh.h"
#include "hsid/bem_swimmer.h"
#include "hsid/fem_arm.h"
#include "hsid/hierarchical_grid.h"
#include "hsid/tasks.h"

namespace hsid {
namespace {

class SineMap final : public ExpensiveMap {
 public:
  explicit SineMap(int d) : d_(d) {}
  int input_dim() const override { return d_; }
  int output_dim() const override { return 12; }
  MapSample Evaluate(const Eigen::VectorXd& x) const override {
    MapSample s{Eigen::VectorXd(12), Eigen::MatrixXd(12, d_)};
    for (int k = 0; k < 12; ++k) {
      const double a = (1.0 + 0.1 * k) * x.sum();
      s.value[k] = std::sin(a);
      s.jacobian.row(k).setConstant((1.0 + 0.1 * k) * std::cos(a));
    }
    return s;
  }

 private:
  int d_;
};

// Cached-cell interpolation cost with and without the Hessian.
void BM_GridQuery(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const bool hessian = state.range(1) != 0;
  HierarchicalGrid grid(std::make_shared<SineMap>(d), 0.5, 0.1);
  grid.SetLevel(grid.max_level());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(0.0, 0.2);
  std::vector<Eigen::VectorXd> points(64, Eigen::VectorXd(d));
  for (auto& p : points) {
    for (int i = 0; i < d; ++i) p[i] = uni(rng);
    grid.Query(p, hessian);
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(grid.Query(points[i++ % points.size()], hessian));
}
BENCHMARK(BM_GridQuery)->Args({2, 0})->Args({2, 1})->Args({3, 0})->Args({3, 1});

// One exact quasistatic equilibrium solve with sensitivities.
void BM_ArmQuasistatic(benchmark::State& state) {
  auto model = std::make_shared<ArmModel>(MakeArmMesh({}), ArmConfig{});
  ArmQuasistaticMap map(model);
  double t = 0.0;
  for (auto _ : state) {
    t += 0.01;
    benchmark::DoNotOptimize(map.Evaluate(Eigen::Vector2d(1.0 + 0.5 * std::sin(t), 1.0 + 0.5 * std::cos(t))));
  }
}
BENCHMARK(BM_ArmQuasistatic)->Unit(benchmark::kMillisecond);

// One exact boundary-element added-mass evaluation with shape derivatives.
void BM_SwimmerAddedMass(benchmark::State& state) {
  SwimmerConfig config;
  for (auto& link : config.links) link.panels = static_cast<int>(state.range(0));
  auto model = std::make_shared<SwimmerModel>(config);
  SwimmerFluidMap map(model);
  double t = 0.0;
  for (auto _ : state) {
    t += 0.01;
    benchmark::DoNotOptimize(map.Evaluate(Eigen::Vector3d(0.3 * std::sin(t), 0.2 * std::cos(t), -0.1 * std::sin(t))));
  }
}
BENCHMARK(BM_SwimmerAddedMass)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace hsid

BENCHMARK_MAIN();
