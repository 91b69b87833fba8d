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
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "hsid/error.h"
#include "hsid/hierarchical_grid.h"
#include "test_maps.h"

namespace hsid {
namespace {

using ::hsid::testing::LambdaMap;
using ::hsid::testing::MakeSineProductMap;

std::shared_ptr<LambdaMap> ConstantMap(int d, Eigen::VectorXd c) {
  return std::make_shared<LambdaMap>(d, c.size(), [c, d](const Eigen::VectorXd&) {
    return MapSample{c, Eigen::MatrixXd::Zero(c.size(), d)};
  });
}

std::vector<double> Positions(const HierarchicalGrid& g, const std::vector<LatticeCoord>& cell) {
  std::vector<double> out;
  for (const auto& c : cell) {
    Eigen::VectorXd p = g.Position(c);
    out.insert(out.end(), p.data(), p.data() + p.size());
  }
  return out;
}

TEST(LocateCellTest, OneDimensionFloorCeil) {
  HierarchicalGrid g(MakeSineProductMap(1, 1), 0.5, 0.5);
  auto cell = g.LocateCell(Eigen::VectorXd::Constant(1, 0.7), 0);
  ASSERT_EQ(cell.size(), 2u);
  EXPECT_DOUBLE_EQ(g.Position(cell[0])[0], 0.5);
  EXPECT_DOUBLE_EQ(g.Position(cell[1])[0], 1.0);
}

TEST(LocateCellTest, FourDimensionsGiveSixteenCorners) {
  HierarchicalGrid g(MakeSineProductMap(4, 1), 0.5, 0.2);
  Eigen::VectorXd x(4);
  x << 0.1, -0.3, 1.7, 0.25;
  EXPECT_EQ(g.LocateCell(x, 0).size(), 16u);
  EXPECT_EQ(g.LocateCell(x, 2).size(), 16u);
}

TEST(LocateCellTest, OnLatticeQueriesFloor) {
  HierarchicalGrid g(MakeSineProductMap(2, 1), 0.5, 0.2);
  auto cell = g.LocateCell(Eigen::Vector2d(0.5, 0.5), 1);
  std::vector<double> expected = {0.5, 0.5, 0.75, 0.5, 0.5, 0.75, 0.75, 0.75};
  EXPECT_EQ(Positions(g, cell), expected);
}

TEST(LocateCellTest, NegativeCoordinatesFloorDown) {
  HierarchicalGrid g(MakeSineProductMap(1, 1), 0.5, 0.5);
  auto cell = g.LocateCell(Eigen::VectorXd::Constant(1, -0.2), 0);
  EXPECT_DOUBLE_EQ(g.Position(cell[0])[0], -0.5);
  EXPECT_DOUBLE_EQ(g.Position(cell[1])[0], 0.0);
}

TEST(LocateCellTest, NonFiniteInputRejected) {
  HierarchicalGrid g(MakeSineProductMap(2, 1), 0.5, 0.2);
  EXPECT_THROW(g.LocateCell(Eigen::Vector2d(NAN, 0.0)), InvalidInputError);
  EXPECT_THROW(g.Interpolate(Eigen::Vector2d(0.0, INFINITY)), InvalidInputError);
}

TEST(EnsureCornersTest, FirstQueryEvaluatesAllCornersThenNone) {
  auto map = MakeSineProductMap(4, 2);
  HierarchicalGrid g(map, 0.5, 0.2);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 0.3);
  auto cell = g.LocateCell(x);
  EXPECT_EQ(g.EnsureCorners(cell), 16);
  EXPECT_EQ(g.EnsureCorners(cell), 0);
  EXPECT_EQ(map->calls(), 16);
  EXPECT_EQ(g.exact_eval_count(), 16);
}

TEST(EnsureCornersTest, FinerLevelReusesCoincidingCorners) {
  for (int d = 1; d <= 4; ++d) {
    auto map = MakeSineProductMap(d, 1);
    HierarchicalGrid g(map, 0.5, 0.1);
    // A point in the lower-left fine sub-cell of a coarse cell.
    Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 0.05);
    g.EnsureCorners(g.LocateCell(x, 0));
    auto fine = g.LocateCell(x, 1);
    // Oracle: fine corners whose indices are all even coincide with coarse
    // corners (index halving), and those were just evaluated.
    int coinciding = 0;
    for (const auto& c : fine) {
      bool even = true;
      for (auto i : c.index) even = even && (i % 2 == 0);
      coinciding += even;
    }
    const int fresh = g.EnsureCorners(fine);
    EXPECT_EQ(fresh, (1 << d) - coinciding);
    EXPECT_LT(fresh, 1 << d);
  }
}

TEST(EnsureCornersTest, BackingFailureCarriesPosition) {
  auto map = std::make_shared<LambdaMap>(1, 1, [](const Eigen::VectorXd& x) -> MapSample {
    if (x[0] > 0.9) throw ModelError("boom");
    return MapSample{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1)};
  });
  HierarchicalGrid g(map, 0.5, 0.5);
  try {
    g.Interpolate(Eigen::VectorXd::Constant(1, 0.7));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    ASSERT_EQ(e.position().size(), 1u);
    EXPECT_DOUBLE_EQ(e.position()[0], 1.0);
  }
  // The failed corner is not stored; the healthy one is.
  EXPECT_EQ(g.exact_eval_count(), 1);
}

TEST(InterpolateTest, CornerExactness) {
  auto map = MakeSineProductMap(3, 4);
  HierarchicalGrid g(map, 0.5, 0.1);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int level = 0; level <= g.max_level(); ++level) {
    g.SetLevel(level);
    for (int trial = 0; trial < 20; ++trial) g.Interpolate(Eigen::Vector3d(u(rng), u(rng), u(rng)));
  }
  for (int level = 0; level <= g.max_level(); ++level) {
    g.SetLevel(level);
    const double h = g.cell_size();
    for (const auto& s : g.Samples()) {
      // Only samples on this level's lattice are corners here.
      bool on_lattice = true;
      for (int k = 0; k < 3; ++k) on_lattice = on_lattice && std::fmod(s->position[k], h) == 0.0;
      if (!on_lattice) continue;
      MapQuery q = g.Interpolate(s->position);
      // Corner is the lower corner of the located cell: basis weights are
      // exactly 0/1 there.
      EXPECT_EQ(q.value, s->value);
      EXPECT_EQ(q.jacobian, s->jacobian);
    }
  }
}

TEST(InterpolateTest, ConstantReproduction) {
  Eigen::VectorXd c(3);
  c << 1.5, -2.0, 0.25;
  HierarchicalGrid g(ConstantMap(2, c), 0.5, 0.2);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    MapQuery q = g.Interpolate(Eigen::Vector2d(u(rng), u(rng)), true);
    EXPECT_LT((q.value - c).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(q.jacobian.cwiseAbs().maxCoeff(), 1e-13);
    for (const auto& h : q.hessian) EXPECT_LT(h.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(InterpolateTest, UnivariateCubicIsExact) {
  auto poly = [](double x) { return 2.0 - 0.5 * x + 3.0 * x * x - 1.25 * x * x * x; };
  auto dpoly = [](double x) { return -0.5 + 6.0 * x - 3.75 * x * x; };
  auto map = std::make_shared<LambdaMap>(1, 1, [&](const Eigen::VectorXd& x) {
    return MapSample{Eigen::VectorXd::Constant(1, poly(x[0])),
                     Eigen::MatrixXd::Constant(1, 1, dpoly(x[0]))};
  });
  HierarchicalGrid g(map, 0.5, 0.5);
  for (double x = 0.5; x < 1.0; x += 0.0371) {
    MapQuery q = g.Interpolate(Eigen::VectorXd::Constant(1, x), true);
    EXPECT_NEAR(q.value[0], poly(x), 1e-13);
    EXPECT_NEAR(q.jacobian(0, 0), dpoly(x), 1e-12);
    EXPECT_NEAR(q.hessian[0](0, 0), 6.0 - 7.5 * x, 1e-10);
  }
}

TEST(InterpolateTest, BilinearCrossTermIsReproduced) {
  // f = x*y*z + x*y has nonzero mixed partials; the reconstructed twist
  // makes pairwise cross terms exact.
  auto map = std::make_shared<LambdaMap>(2, 1, [](const Eigen::VectorXd& x) {
    MapSample s{Eigen::VectorXd::Constant(1, x[0] * x[1] + x[0] * x[0]), Eigen::MatrixXd(1, 2)};
    s.jacobian << x[1] + 2 * x[0], x[0];
    return s;
  });
  HierarchicalGrid g(map, 0.5, 0.5);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector2d x(u(rng), u(rng));
    MapQuery q = g.Interpolate(x);
    EXPECT_NEAR(q.value[0], x[0] * x[1] + x[0] * x[0], 1e-13);
  }
}

// Central differences of the interpolant itself, away from cell faces.
TEST(InterpolateTest, JacobianAndHessianMatchFiniteDifferences) {
  for (int d : {1, 2, 3, 4}) {
    HierarchicalGrid g(MakeSineProductMap(d, 3), 0.5, 0.2);
    std::mt19937 rng(100 + d);
    std::uniform_real_distribution<double> cellpos(0.1, 0.9);
    std::uniform_int_distribution<int> cellidx(-3, 3);
    const double h = g.cell_size();
    const double eps = 1e-6;
    for (int trial = 0; trial < 25; ++trial) {
      Eigen::VectorXd x(d);
      for (int k = 0; k < d; ++k) x[k] = (cellidx(rng) + cellpos(rng)) * h;
      MapQuery q = g.Interpolate(x, true);
      for (int k = 0; k < d; ++k) {
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += eps;
        xm[k] -= eps;
        MapQuery qp = g.Interpolate(xp, false), qm = g.Interpolate(xm, false);
        Eigen::VectorXd fd = (qp.value - qm.value) / (2 * eps);
        EXPECT_LT((fd - q.jacobian.col(k)).norm(), 1e-6 * std::max(1.0, q.jacobian.col(k).norm()));
        Eigen::MatrixXd fdj = (qp.jacobian - qm.jacobian) / (2 * eps);
        EXPECT_LT((fdj - q.hessian[k]).norm(), 1e-5 * std::max(1.0, q.hessian[k].norm()));
      }
    }
  }
}

// Value and gradient agree from both sides of interior faces.
TEST(InterpolateTest, ContinuousFirstDerivativesAcrossFaces) {
  const int d = 3;
  HierarchicalGrid g(MakeSineProductMap(d, 2), 0.5, 0.2);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = g.cell_size();
  for (int trial = 0; trial < 30; ++trial) {
    const int face_dim = trial % d;
    std::vector<std::int64_t> lower = {-1, 0, 1};
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x[k] = (lower[k] + u(rng)) * h;
    x[face_dim] = (lower[face_dim] + 1) * h;  // upper face of this cell
    std::vector<std::int64_t> upper = lower;
    upper[face_dim] += 1;
    MapQuery a = g.InterpolateInCell(x, lower);
    MapQuery b = g.InterpolateInCell(x, upper);
    EXPECT_LT((a.value - b.value).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((a.jacobian - b.jacobian).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(RefineTest, MaxRefinementsFromThreshold) {
  EXPECT_EQ(MaxRefinements(0.5, 0.2), 2);
  EXPECT_EQ(MaxRefinements(0.3, 0.1), 2);
  EXPECT_EQ(MaxRefinements(1.0, 1.0), 0);
  EXPECT_EQ(MaxRefinements(1.0, 2.0), 0);
  EXPECT_THROW(MaxRefinements(0.0, 1.0), InvalidInputError);
}

TEST(RefineTest, LevelsUpToRThenExhausted) {
  HierarchicalGrid g(MakeSineProductMap(2, 1), 0.5, 0.2);
  EXPECT_EQ(g.level(), 0);
  EXPECT_EQ(g.Refine(), 1);
  EXPECT_EQ(g.Refine(), 2);
  EXPECT_DOUBLE_EQ(g.cell_size(), 0.125);
  EXPECT_THROW(g.Refine(), LevelExhaustedError);

  HierarchicalGrid flat(MakeSineProductMap(2, 1), 1.0, 1.0);
  EXPECT_EQ(flat.max_level(), 0);
  EXPECT_THROW(flat.Refine(), LevelExhaustedError);
}

TEST(RefineTest, SamplesSurviveRefinement) {
  auto map = MakeSineProductMap(2, 1);
  HierarchicalGrid g(map, 0.5, 0.2);
  Eigen::Vector2d x(0.1, 0.1);
  g.Interpolate(x);
  g.Refine();
  g.Refine();
  // Fine cell [0, 0.125]^2 shares only the origin with the coarse cell.
  EXPECT_EQ(g.EnsureCorners(g.LocateCell(x)), 3);
  EXPECT_EQ(map->calls(), 7);
}

TEST(StatsTest, CountsTrackStore) {
  HierarchicalGrid g(MakeSineProductMap(2, 1), 0.5, 0.2);
  EXPECT_EQ(g.stats().exact_eval_count, 0);
  g.Interpolate(Eigen::Vector2d(0.2, 0.3));
  GridStats s = g.stats();
  EXPECT_EQ(s.exact_eval_count, 4);
  EXPECT_EQ(s.per_level[0], 4);
  ASSERT_EQ(s.eval_trace.size(), 1u);
  EXPECT_EQ(s.eval_trace[0], std::make_pair(std::int64_t{1}, std::int64_t{4}));
  g.Interpolate(Eigen::Vector2d(0.21, 0.3));
  EXPECT_EQ(g.stats().eval_trace.size(), 1u);
}

// Memoization: for random query logs across levels, the count of exact
// evaluations equals the number of distinct lattice positions touched.
TEST(StatsTest, MemoizationProperty) {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 3;
    auto map = MakeSineProductMap(d, 1);
    HierarchicalGrid g(map, 0.5, 0.1);
    std::set<std::vector<double>> touched;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> lvl(0, g.max_level());
    std::vector<std::pair<int, Eigen::VectorXd>> log;
    for (int q = 0; q < 60; ++q) {
      Eigen::VectorXd x(d);
      for (int k = 0; k < d; ++k) x[k] = u(rng);
      log.emplace_back(lvl(rng), x);
    }
    for (const auto& [level, x] : log) {
      g.SetLevel(level);
      g.Interpolate(x);
      const double h = 0.5 / (1 << level);
      for (int c = 0; c < (1 << d); ++c) {
        std::vector<double> p(d);
        for (int k = 0; k < d; ++k) p[k] = (std::floor(x[k] / h) + ((c >> k) & 1)) * h;
        touched.insert(p);
      }
    }
    EXPECT_EQ(g.exact_eval_count(), static_cast<std::int64_t>(touched.size()));
    EXPECT_EQ(map->calls(), static_cast<long>(touched.size()));
    // Replaying the log evaluates nothing new.
    for (const auto& [level, x] : log) {
      g.SetLevel(level);
      g.Interpolate(x);
    }
    EXPECT_EQ(map->calls(), static_cast<long>(touched.size()));
  }
}

TEST(ConcurrencyTest, ParallelQueriesCountDistinctCorners) {
  auto map = MakeSineProductMap(3, 8);
  HierarchicalGrid g(map, 0.5, 0.2);
  std::vector<Eigen::Vector3d> points;
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 400; ++i) points.emplace_back(u(rng), u(rng), u(rng));
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < points.size(); i += 4) g.Interpolate(points[i]);
    });
  }
  for (auto& w : workers) w.join();

  HierarchicalGrid serial(MakeSineProductMap(3, 8), 0.5, 0.2);
  for (const auto& p : points) serial.Interpolate(p);
  EXPECT_EQ(g.exact_eval_count(), serial.exact_eval_count());
  EXPECT_GE(map->calls(), g.exact_eval_count());
}

TEST(PersistenceTest, RoundTripIsBitExact) {
  auto map = MakeSineProductMap(3, 5);
  HierarchicalGrid g(map, 0.3, 0.1);
  auto replay = [](HierarchicalGrid& grid) {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int level = 0; level <= grid.max_level(); ++level) {
      grid.SetLevel(level);
      for (int i = 0; i < 10; ++i) grid.Interpolate(Eigen::Vector3d(u(rng), u(rng), u(rng)));
    }
  };
  replay(g);
  std::stringstream buf;
  g.Save(buf);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.substr(0, 4), "HSIG");

  auto loaded = HierarchicalGrid::Load(buf, map);
  EXPECT_EQ(loaded->exact_eval_count(), g.exact_eval_count());
  EXPECT_EQ(loaded->base_cell(), g.base_cell());
  auto a = g.Samples(), b = loaded->Samples();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->position, b[i]->position);
    EXPECT_EQ(a[i]->value, b[i]->value);
    EXPECT_EQ(a[i]->jacobian, b[i]->jacobian);
  }
  std::stringstream again;
  loaded->Save(again);
  EXPECT_EQ(again.str(), bytes);
  // Loaded samples are reused: replaying the query log calls nothing.
  const long calls = map->calls();
  replay(*loaded);
  EXPECT_EQ(map->calls(), calls);
}

TEST(PersistenceTest, RejectsBadInput) {
  auto map = MakeSineProductMap(2, 1);
  std::stringstream junk("NOPE1234");
  EXPECT_THROW(HierarchicalGrid::Load(junk, map), InvalidInputError);
  HierarchicalGrid g(map, 0.5, 0.2);
  std::stringstream buf;
  g.Save(buf);
  EXPECT_THROW(HierarchicalGrid::Load(buf, MakeSineProductMap(3, 1)), InvalidInputError);
}

TEST(DeterminismTest, SameQueriesSameStore) {
  auto run = [] {
    HierarchicalGrid g(MakeSineProductMap(2, 3), 0.5, 0.2);
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 30; ++i) g.Interpolate(Eigen::Vector2d(u(rng), u(rng)));
    std::stringstream s;
    g.Save(s);
    return s.str();
  };
  EXPECT_EQ(run(), run());
}

TEST(ExactBypassTest, CountsCallsAndMemoizesIdenticalInputs) {
  auto map = MakeSineProductMap(2, 2);
  ExactBypass exact(map);
  Eigen::Vector2d x(0.3, -0.2);
  MapQuery q = exact.Query(x, false);
  MapSample truth = testing::SineProduct(x, 2);
  EXPECT_EQ(q.value, truth.value);
  EXPECT_EQ(q.jacobian, truth.jacobian);
  exact.Query(x, false);
  EXPECT_EQ(exact.exact_eval_count(), 1);
  MapQuery qh = exact.Query(x, true);
  EXPECT_EQ(exact.exact_eval_count(), 5);
  ASSERT_EQ(qh.hessian.size(), 2u);
  EXPECT_EQ(exact.level(), -1);
}

}  // namespace
}  // namespace hsid
