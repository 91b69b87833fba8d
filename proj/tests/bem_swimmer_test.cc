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
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hsid/bem_swimmer.h"
#include "hsid/error.h"
#include "hsid/hierarchical_grid.h"

namespace hsid {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRho = 1000.0;

// Translational added mass of a single closed body along `dir`.
double TranslationAddedMass(const BoundaryMesh& mesh, const Eigen::Vector2d& dir) {
  BemSolver solver(mesh);
  const Eigen::VectorXd sigma = (dir.transpose() * mesh.Normals()).transpose();
  const Eigen::VectorXd phi = solver.Solve(sigma);
  return -kRho * (phi.array() * sigma.array() * mesh.Lengths().array()).sum();
}

SwimmerConfig CoarseConfig(int panels = 32) {
  SwimmerConfig c;
  for (auto& l : c.links) l.panels = panels;
  return c;
}

Eigen::Vector3d RandomJoints(std::mt19937& rng, double reach) {
  std::uniform_real_distribution<double> uni(-reach, reach);
  return {uni(rng), uni(rng), uni(rng)};
}

TEST(BemTest, CircleDipolePotential) {
  const double a = 0.5, U = 1.3;
  BoundaryMesh mesh;
  AppendEllipse(mesh, Eigen::Vector2d(0.3, -0.2), 0.0, a, a, 128, 0);
  BemSolver solver(mesh);
  const Eigen::VectorXd sigma = U * mesh.Normals().row(0).transpose();
  const Eigen::VectorXd phi = solver.Solve(sigma);
  const Eigen::Matrix2Xd x = mesh.Midpoints();
  double err = 0.0;
  for (int p = 0; p < mesh.num_panels(); ++p) {
    const double th = std::atan2(x(1, p) + 0.2, x(0, p) - 0.3);
    err = std::max(err, std::abs(phi[p] + U * a * std::cos(th)));
  }
  EXPECT_LT(err / (U * a), 0.02);
  EXPECT_LT(solver.Residual(phi, sigma), 1e-8 * U);
}

TEST(BemTest, CircleAddedMass) {
  const double a = 0.2;
  BoundaryMesh mesh;
  AppendEllipse(mesh, Eigen::Vector2d::Zero(), 0.3, a, a, 128, 0);
  const double oracle = kRho * kPi * a * a;
  EXPECT_NEAR(TranslationAddedMass(mesh, {1, 0}), oracle, 0.02 * oracle);
  EXPECT_NEAR(TranslationAddedMass(mesh, {0, 1}), oracle, 0.02 * oracle);
  // Rotation about the centre moves no fluid.
  BemSolver solver(mesh);
  const Eigen::Matrix2Xd x = mesh.Midpoints(), n = mesh.Normals();
  Eigen::VectorXd sigma(mesh.num_panels());
  for (int p = 0; p < mesh.num_panels(); ++p) sigma[p] = n.col(p).dot(Eigen::Vector2d(-x(1, p), x(0, p)));
  const Eigen::VectorXd phi = solver.Solve(sigma);
  const double rot = -kRho * (phi.array() * sigma.array() * mesh.Lengths().array()).sum();
  EXPECT_LT(std::abs(rot), 1e-6 * oracle * a * a);
}

TEST(BemTest, EllipseAddedMass) {
  const double a = 0.1, b = 0.025, angle = 0.4;
  BoundaryMesh mesh;
  AppendEllipse(mesh, Eigen::Vector2d(1.0, 2.0), angle, a, b, 256, 0);
  const Eigen::Vector2d along(std::cos(angle), std::sin(angle));
  const Eigen::Vector2d across(-std::sin(angle), std::cos(angle));
  EXPECT_NEAR(TranslationAddedMass(mesh, along), kRho * kPi * b * b, 0.03 * kRho * kPi * b * b);
  EXPECT_NEAR(TranslationAddedMass(mesh, across), kRho * kPi * a * a, 0.03 * kRho * kPi * a * a);
}

TEST(BemTest, ExpansionModeReportsNetFlux) {
  const double a = 0.3;
  BoundaryMesh mesh;
  AppendEllipse(mesh, Eigen::Vector2d::Zero(), 0.0, a, a, 64, 0);
  BemSolver solver(mesh);
  const Eigen::VectorXd sigma = Eigen::VectorXd::Ones(mesh.num_panels());
  const Eigen::VectorXd flux = solver.NetFlux(sigma);
  ASSERT_EQ(flux.size(), 1);
  // Polygon perimeter converges to the circle's.
  EXPECT_NEAR(flux[0], 2 * kPi * a, 2e-3);
  // Translation modes carry no net flux.
  const Eigen::VectorXd trans = mesh.Normals().row(0).transpose();
  EXPECT_LT(std::abs(solver.NetFlux(trans)[0]), 1e-12);
}

TEST(BemTest, GeometryScaling) {
  // Translation potential scales linearly with length for a fixed velocity.
  BoundaryMesh small, big;
  AppendEllipse(small, Eigen::Vector2d(0.1, 0.0), 0.2, 0.1, 0.04, 48, 0);
  AppendEllipse(small, Eigen::Vector2d(-0.15, 0.05), -0.3, 0.08, 0.03, 40, 1);
  big.start = 2.0 * small.start;
  big.end = 2.0 * small.end;
  big.body = small.body;
  const Eigen::VectorXd sigma = small.Normals().row(1).transpose();
  const Eigen::VectorXd phi_small = BemSolver(small).Solve(sigma);
  const Eigen::VectorXd phi_big = BemSolver(big).Solve(sigma);
  EXPECT_LT((phi_big - 2.0 * phi_small).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BemTest, DegeneratePanelIsRejected) {
  BoundaryMesh mesh;
  AppendEllipse(mesh, Eigen::Vector2d::Zero(), 0.0, 1.0, 1.0, 8, 0);
  mesh.end.col(3) = mesh.start.col(3);
  EXPECT_THROW(AssembleBem(mesh), ModelError);
}

TEST(SwimmerModelTest, DefaultShape) {
  SwimmerModel model;
  EXPECT_EQ(model.num_panels(), 256);
  EXPECT_EQ(model.num_joints(), 3);
  EXPECT_NEAR(model.total_mass(), 4 * 1000 * kPi * 0.1 * 0.025, 1e-12);
  const auto k = model.LinkKinematics(Eigen::Vector3d::Zero());
  for (int l = 0; l < 4; ++l) EXPECT_NEAR(k.centers(1, l), 0.0, 1e-15);
  EXPECT_LT(k.centers(0, 3), k.centers(0, 0));
  EXPECT_GT(model.Clearance(Eigen::Vector3d::Constant(1.35)), 0.0);
}

TEST(SwimmerModelTest, RejectsOverlappingJointBox) {
  SwimmerConfig c;
  c.joint_limit = 1.6;
  EXPECT_THROW(SwimmerModel{c}, ModelError);
  c = SwimmerConfig{};
  c.gap_ratio = 0.02;
  EXPECT_THROW(SwimmerModel{c}, ModelError);
  c = SwimmerConfig{};
  c.links.pop_back();
  EXPECT_THROW(SwimmerModel{c}, ModelError);
}

TEST(SwimmerModelTest, StraightSwimmerDecouplesSurgeAndSway) {
  SwimmerModel model;
  const FluidSolve fs = model.Fluid(Eigen::Vector3d::Zero(), Vector6d::Unit(0));
  const Matrix6d& A = fs.added_mass;
  const double scale = A.cwiseAbs().maxCoeff();
  for (int c = 1; c < 6; ++c) EXPECT_LT(std::abs(A(0, c)), 1e-6 * scale);
  EXPECT_LT(fs.residual, 1e-8);
  // Zero velocity gives zero potential.
  EXPECT_EQ(model.Fluid(Eigen::Vector3d::Zero(), Vector6d::Zero()).phi.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SwimmerModelTest, AddedMassIsSymmetricPositiveSemidefinite) {
  SwimmerModel model(CoarseConfig());
  std::mt19937 rng(1);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Vector3d q = RandomJoints(rng, 1.0);
    const Matrix6d A = model.AddedMass(q, model.FluidMatrix(q));
    EXPECT_EQ((A - A.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix6d> eig(A);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(SwimmerModelTest, FluidEnergyIsFrameInvariant) {
  SwimmerModel model(CoarseConfig());
  const Eigen::Vector3d q(0.4, -0.7, 0.2);
  const Eigen::Vector2d V(0.3, -0.1);
  const double omega = 0.8;
  auto energy = [&](double beta) {
    Eigen::Matrix2d R;
    R << std::cos(beta), -std::sin(beta), std::sin(beta), std::cos(beta);
    BoundaryMesh mesh = model.Boundary(q);
    mesh.start = R * mesh.start;
    mesh.end = R * mesh.end;
    const Eigen::Matrix2Xd x = mesh.Midpoints(), n = mesh.Normals();
    Eigen::VectorXd sigma(mesh.num_panels());
    for (int p = 0; p < mesh.num_panels(); ++p) {
      sigma[p] = n.col(p).dot(R * V + omega * Eigen::Vector2d(-x(1, p), x(0, p)));
    }
    const Eigen::VectorXd phi = BemSolver(mesh).Solve(sigma);
    return -0.5 * kRho * (phi.array() * sigma.array() * mesh.Lengths().array()).sum();
  };
  const double e0 = energy(0.0);
  EXPECT_NEAR(energy(1.1), e0, 1e-10 * e0);
  // Same energy from the body-frame added mass.
  Vector6d v = Vector6d::Zero();
  v << V, omega, 0, 0, 0;
  const Matrix6d A = model.AddedMass(q, model.FluidMatrix(q));
  EXPECT_NEAR(0.5 * v.dot(A * v), e0, 1e-10 * e0);
}

TEST(SwimmerModelTest, GeometryDerivativesMatchFiniteDifferences) {
  SwimmerModel model(CoarseConfig());
  const Eigen::Vector3d q(0.3, -0.5, 0.8);
  std::vector<Eigen::MatrixXd> dN;
  model.NormalVelocityMap(q, &dN);
  std::array<Matrix6d, 3> dM;
  model.BodyMass(q, &dM);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    const Eigen::MatrixXd fdN = (model.NormalVelocityMap(qp) - model.NormalVelocityMap(qm)) / (2 * h);
    EXPECT_LT((dN[i] - fdN).cwiseAbs().maxCoeff(), 1e-8);
    const Matrix6d fdM = (model.BodyMass(qp) - model.BodyMass(qm)) / (2 * h);
    EXPECT_LT((dM[i] - fdM).cwiseAbs().maxCoeff(), 1e-7 * dM[i].cwiseAbs().maxCoeff() + 1e-12);
  }
}

TEST(SwimmerMapTest, FlattenedValueAndJacobian) {
  auto model = std::make_shared<SwimmerModel>(CoarseConfig());
  SwimmerFluidMap map(model);
  EXPECT_EQ(map.input_dim(), 3);
  EXPECT_EQ(map.output_dim(), 6 * model->num_panels());
  const Eigen::Vector3d q(0.2, 0.1, -0.3);
  const MapSample s = map.Evaluate(q);
  const Eigen::MatrixXd F = model->FluidMatrix(q);
  EXPECT_EQ((Eigen::Map<const Eigen::MatrixXd>(s.value.data(), F.rows(), 6) - F).cwiseAbs().maxCoeff(), 0.0);
  const double h = 1e-4;
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    const Eigen::MatrixXd fd = (model->FluidMatrix(qp) - model->FluidMatrix(qm)) / (2 * h);
    const Eigen::VectorXd col = Eigen::Map<const Eigen::VectorXd>(fd.data(), fd.size());
    EXPECT_LT((s.jacobian.col(j) - col).cwiseAbs().maxCoeff(), 1e-6 * col.cwiseAbs().maxCoeff());
  }
  EXPECT_THROW(map.Evaluate(Eigen::Vector3d(0, 1.5, 0)), InvalidInputError);
}

TEST(SwimmerMapTest, FirstTouchCellNeedsEightCorners) {
  auto model = std::make_shared<SwimmerModel>(CoarseConfig());
  auto map = std::make_shared<SwimmerFluidMap>(model);
  HierarchicalGrid grid(map, 0.3, 0.1);
  grid.Query(Eigen::Vector3d(0.1, -0.2, 0.05), false);
  EXPECT_EQ(grid.exact_eval_count(), 8);
  grid.Query(Eigen::Vector3d(0.12, -0.25, 0.07), false);
  EXPECT_EQ(grid.exact_eval_count(), 8);
  // Outside the evaluation box the failure carries the corner position.
  EXPECT_THROW(grid.Query(Eigen::Vector3d(1.5, 0.0, 0.0), false), SolverError);
}

class SwimmerDynamicsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    model_ = std::make_shared<SwimmerModel>(CoarseConfig());
    map_ = std::make_shared<SwimmerFluidMap>(model_);
  }
  SwimmerState RandomState(std::mt19937& rng) {
    std::normal_distribution<double> g(0.0, 0.3);
    SwimmerState s;
    s.pose << g(rng), g(rng), g(rng);
    s.q = RandomJoints(rng, 0.9);
    for (int i = 0; i < 6; ++i) s.velocity[i] = g(rng);
    return s;
  }
  std::shared_ptr<SwimmerModel> model_;
  std::shared_ptr<SwimmerFluidMap> map_;
};

TEST_F(SwimmerDynamicsTest, MassIsPositiveDefinite) {
  std::mt19937 rng(7);
  for (int t = 0; t < 100; ++t) {
    SwimmerState s = RandomState(rng);
    const RigidDynamics rd = ComputeRigidDynamics(*model_, s);
    EXPECT_LT((rd.mass - rd.mass.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix6d> eig(rd.mass);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST_F(SwimmerDynamicsTest, ZeroVelocityGivesZeroBias) {
  ExactBypass exact(map_);
  std::mt19937 rng(9);
  SwimmerState s = RandomState(rng);
  s.velocity.setZero();
  EXPECT_EQ(ComputeRigidDynamics(*model_, s).coriolis.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(FluidForce(*model_, s, exact).cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(SwimmerDynamicsTest, CoriolisSkewProperty) {
  ExactBypass exact(map_);
  std::mt19937 rng(11);
  for (int t = 0; t < 5; ++t) {
    const SwimmerState s = RandomState(rng);
    const SwimmerInertia in = ComputeInertia(*model_, s, exact.Query(s.q, false));
    const Matrix6d C = CoriolisMatrix(in.d_mass, s.velocity);
    // Mdot from finite differences of the total mass along the motion.
    const double h = 1e-6;
    SwimmerState sp = s, sm = s;
    sp.pose += h * s.velocity.head<3>();
    sp.q += h * s.velocity.tail<3>();
    sm.pose -= h * s.velocity.head<3>();
    sm.q -= h * s.velocity.tail<3>();
    const Matrix6d Mdot = (ComputeInertia(*model_, sp, exact.Query(sp.q, false)).mass -
                           ComputeInertia(*model_, sm, exact.Query(sm.q, false)).mass) /
                          (2 * h);
    const double scale = s.velocity.squaredNorm() * Mdot.cwiseAbs().maxCoeff();
    EXPECT_LT(std::abs(s.velocity.dot((Mdot - 2 * C) * s.velocity)), 1e-6 * scale);
    // The analytic derivative agrees with the finite-difference Mdot.
    Matrix6d Mdot_analytic = Matrix6d::Zero();
    for (int k = 0; k < 6; ++k) Mdot_analytic += in.d_mass[k] * s.velocity[k];
    EXPECT_LT((Mdot_analytic - Mdot).cwiseAbs().maxCoeff(), 1e-5 * Mdot.cwiseAbs().maxCoeff());
    const Matrix6d N = Mdot_analytic - 2 * C;
    EXPECT_LT((N + N.transpose()).cwiseAbs().maxCoeff(), 1e-10 * N.cwiseAbs().maxCoeff());
  }
}

TEST_F(SwimmerDynamicsTest, SteadyTranslationFeelsNoForce) {
  ExactBypass exact(map_);
  SwimmerState s;
  s.pose << 0.2, -0.1, 0.6;
  s.velocity << 0.3, -0.2, 0.0, 0.0, 0.0, 0.0;
  const Vector6d f = FluidForce(*model_, s, exact);
  EXPECT_LT(f.head<2>().norm(), 1e-9);
  // Along a symmetry axis the Munk moment and joint loads vanish as well.
  s.velocity << 0.3 * std::cos(0.6), 0.3 * std::sin(0.6), 0.0, 0.0, 0.0, 0.0;
  EXPECT_LT(FluidForce(*model_, s, exact).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_F(SwimmerDynamicsTest, RestStaysAtRest) {
  ExactBypass exact(map_);
  SwimmerState s;
  s.pose << 0.5, 0.5, 0.3;
  s.q << 0.2, -0.1, 0.4;
  const SwimmerState n = StepSwimmer(*model_, s, Eigen::Vector3d::Zero(), 1e-3, exact);
  EXPECT_EQ((Flatten(n) - Flatten(s)).cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(SwimmerDynamicsTest, MomentumIsConserved) {
  ExactBypass exact(map_);
  SwimmerState s;
  s.velocity << 0.05, 0.02, 0.0, 0.0, 0.0, 0.0;
  const Eigen::Vector2d p0 = LinearMomentum(*model_, s, exact);
  double drift = 0.0;
  for (int i = 0; i < 500; ++i) {
    Eigen::Vector3d u;
    for (int j = 0; j < 3; ++j) u[j] = 0.05 * std::sin(2 * kPi * i * 1e-3 - j);
    s = StepSwimmer(*model_, s, u, 1e-3, exact, nullptr, i);
    drift = std::max(drift, (LinearMomentum(*model_, s, exact) - p0).norm() / p0.norm());
  }
  EXPECT_LT(drift, 1e-3);
}

TEST_F(SwimmerDynamicsTest, TravellingWaveSwimsForward) {
  HierarchicalGrid grid(map_, 0.3, 0.1);
  grid.SetLevel(grid.max_level());
  SwimmerState s;
  const Eigen::Vector2d c0 = model_->CenterOfMass(s);
  const double dt = 2e-3;
  for (int i = 0; i < 500; ++i) {
    Eigen::Vector3d u;
    for (int j = 0; j < 3; ++j) u[j] = 0.3 * std::sin(2 * kPi * i * dt - j * kPi / 2);
    s = StepSwimmer(*model_, s, u, dt, grid, nullptr, i);
  }
  EXPECT_GT(model_->CenterOfMass(s)[0] - c0[0], 0.0);
}

TEST_F(SwimmerDynamicsTest, StepDerivativesMatchFiniteDifferences) {
  HierarchicalGrid grid(map_, 0.3, 0.1);
  grid.SetLevel(grid.max_level());
  SwimmerState s;
  s.pose << 0.1, 0.2, 0.3;
  s.q << 0.21, -0.34, 0.46;  // away from cell faces at spacing 0.075
  s.velocity << 0.1, -0.05, 0.2, 0.3, -0.4, 0.5;
  const Eigen::Vector3d u(0.02, -0.01, 0.03);
  SwimmerStepDerivatives d;
  StepSwimmer(*model_, s, u, 1e-3, grid, &d);
  const double h = 1e-6;
  Eigen::Matrix<double, 12, 12> fd;
  for (int c = 0; c < 12; ++c) {
    SwimmerVector zp = Flatten(s), zm = zp;
    zp[c] += h;
    zm[c] -= h;
    fd.col(c) = (Flatten(StepSwimmer(*model_, Unflatten(zp), u, 1e-3, grid)) -
                 Flatten(StepSwimmer(*model_, Unflatten(zm), u, 1e-3, grid))) /
                (2 * h);
  }
  EXPECT_LT((d.d_state - fd).cwiseAbs().maxCoeff(), 1e-6);
  Eigen::Matrix<double, 12, 3> fu;
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3d up = u, um = u;
    up[c] += h;
    um[c] -= h;
    fu.col(c) = (Flatten(StepSwimmer(*model_, s, up, 1e-3, grid)) -
                 Flatten(StepSwimmer(*model_, s, um, 1e-3, grid))) /
                (2 * h);
  }
  EXPECT_LT((d.d_u - fu).cwiseAbs().maxCoeff(), 1e-8);
}

TEST_F(SwimmerDynamicsTest, BadStepsAreReported) {
  ExactBypass exact(map_);
  SwimmerState s;
  EXPECT_THROW(StepSwimmer(*model_, s, Eigen::Vector3d::Zero(), 1.0, exact), InvalidInputError);
  s.velocity[0] = std::nan("");
  try {
    StepSwimmer(*model_, s, Eigen::Vector3d::Zero(), 1e-3, exact, nullptr, 17);
    FAIL() << "expected blow-up";
  } catch (const BlowUpError& e) {
    EXPECT_EQ(e.step(), 17);
  }
}

TEST_F(SwimmerDynamicsTest, JointLimitsClampAndStopTheJoint) {
  ExactBypass exact(map_);
  SwimmerState s;
  s.q << 0.999, 0.0, 0.0;
  s.velocity << 0, 0, 0, 2.0, 0, 0;
  const SwimmerState n = StepSwimmer(*model_, s, Eigen::Vector3d::Zero(), 1e-3, exact);
  EXPECT_EQ(n.q[0], model_->config().joint_limit);
  EXPECT_EQ(n.velocity[3], 0.0);
}

TEST_F(SwimmerDynamicsTest, SurrogateForceTracksExactForce) {
  ExactBypass exact(map_);
  HierarchicalGrid grid(map_, 0.3, 0.1);
  grid.SetLevel(grid.max_level());
  std::mt19937 rng(21);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const SwimmerState s = RandomState(rng);
    const Vector6d a = FluidForce(*model_, s, exact);
    const Vector6d b = FluidForce(*model_, s, grid);
    worst = std::max(worst, (a - b).norm() / a.norm());
  }
  EXPECT_LT(worst, 0.05);
}

}  // namespace
}  // namespace hsid
