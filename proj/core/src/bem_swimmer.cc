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

#include "hsid/bem_swimmer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "hsid/error.h"

namespace hsid {
namespace {

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;

Eigen::Vector2d Perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }  // e_z x v

double Cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

Eigen::Matrix2d Rotation(double angle) {
  Eigen::Matrix2d R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return R;
}

// Antiderivative of ln(s^2 + h^2) in s.
double LogAntiderivative(double s, double h) {
  const double r2 = s * s + h * h;
  double out = -2.0 * s;
  if (r2 > 0.0) out += s * std::log(r2);
  if (h > 0.0) out += 2.0 * h * std::atan(s / h);
  return out;
}

Matrix6d Sym(const Matrix6d& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd Reshape(const double* data, int rows) {
  return Eigen::Map<const Eigen::MatrixXd>(data, rows, 6);
}

}  // namespace

int BoundaryMesh::num_bodies() const {
  return static_cast<int>(std::set<int>(body.begin(), body.end()).size());
}

Eigen::Matrix2Xd BoundaryMesh::Midpoints() const { return 0.5 * (start + end); }

Eigen::Matrix2Xd BoundaryMesh::Normals() const {
  Eigen::Matrix2Xd n(2, num_panels());
  for (int p = 0; p < num_panels(); ++p) {
    const Eigen::Vector2d t = (end.col(p) - start.col(p)).normalized();
    n.col(p) = Eigen::Vector2d(t.y(), -t.x());
  }
  return n;
}

Eigen::VectorXd BoundaryMesh::Lengths() const { return (end - start).colwise().norm().transpose(); }

void AppendEllipse(BoundaryMesh& mesh, const Eigen::Vector2d& center, double angle, double a,
                   double b, int panels, int body) {
  if (panels < 3 || !(a > 0) || !(b > 0)) throw ModelError("ellipse: invalid shape or panel count");
  const Eigen::Matrix2d R = Rotation(angle);
  const int n0 = mesh.num_panels();
  mesh.start.conservativeResize(2, n0 + panels);
  mesh.end.conservativeResize(2, n0 + panels);
  auto point = [&](int k) {
    const double t = 2.0 * std::numbers::pi * k / panels;
    return Eigen::Vector2d(center + R * Eigen::Vector2d(a * std::cos(t), b * std::sin(t)));
  };
  for (int k = 0; k < panels; ++k) {
    mesh.start.col(n0 + k) = point(k);
    mesh.end.col(n0 + k) = point(k + 1);
    mesh.body.push_back(body);
  }
}

BemOperators AssembleBem(const BoundaryMesh& mesh) {
  const int n = mesh.num_panels();
  if (n == 0) throw ModelError("bem: empty boundary");
  const Eigen::Matrix2Xd mid = mesh.Midpoints();
  const Eigen::VectorXd len = mesh.Lengths();
  for (int j = 0; j < n; ++j) {
    if (!(len[j] >= 1e-12)) throw ModelError("bem: degenerate panel " + std::to_string(j));
  }
  BemOperators ops;
  ops.single_layer.resize(n, n);
  ops.double_layer.resize(n, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector2d t = (mesh.end.col(j) - mesh.start.col(j)) / len[j];
    const Eigen::Vector2d nrm(t.y(), -t.x());
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d a = mesh.start.col(j) - mid.col(i);
      const Eigen::Vector2d b = mesh.end.col(j) - mid.col(i);
      const double h = std::abs(a.dot(nrm));
      const double integral = 0.5 * (LogAntiderivative(b.dot(t), h) - LogAntiderivative(a.dot(t), h));
      ops.single_layer(i, j) = -kInvTwoPi * integral;
      // dG/dn_y integrates to minus the subtended angle over 2 pi.
      ops.double_layer(i, j) = i == j ? 0.0 : -kInvTwoPi * std::atan2(Cross(a, b), a.dot(b));
    }
  }
  return ops;
}

BemSolver::BemSolver(const BoundaryMesh& mesh) : mesh_(mesh), ops_(AssembleBem(mesh)) {
  const int n = mesh_.num_panels();
  lu_.compute(0.5 * Eigen::MatrixXd::Identity(n, n) - ops_.double_layer);
}

Eigen::MatrixXd BemSolver::Solve(const Eigen::MatrixXd& normal_velocity) const {
  if (normal_velocity.rows() != mesh_.num_panels()) throw InvalidInputError("bem: rhs has wrong size");
  return lu_.solve(-ops_.single_layer * normal_velocity);
}

double BemSolver::Residual(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& normal_velocity) const {
  const Eigen::MatrixXd r = 0.5 * phi - ops_.double_layer * phi + ops_.single_layer * normal_velocity;
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

Eigen::VectorXd BemSolver::NetFlux(const Eigen::VectorXd& normal_velocity) const {
  const int bodies = *std::max_element(mesh_.body.begin(), mesh_.body.end()) + 1;
  Eigen::VectorXd flux = Eigen::VectorXd::Zero(bodies);
  const Eigen::VectorXd len = mesh_.Lengths();
  for (int p = 0; p < mesh_.num_panels(); ++p) flux[mesh_.body[p]] += normal_velocity[p] * len[p];
  return flux;
}

SwimmerModel::SwimmerModel(SwimmerConfig config) : config_(std::move(config)) {
  const auto& c = config_;
  if (c.links.size() != 4) throw ModelError("swimmer: exactly 4 links are supported");
  for (const auto& l : c.links) {
    if (!(l.a > 0) || !(l.b > 0) || !(l.density > 0) || l.panels < 8) {
      throw ModelError("swimmer: invalid link geometry");
    }
    num_panels_ += l.panels;
    total_mass_ += l.density * std::numbers::pi * l.a * l.b;
  }
  if (!(c.fluid_density > 0) || !(c.gap_ratio > 0) || !(c.joint_limit > 0) || c.box_margin < 0 ||
      !(c.torque_limit >= 0) || !(c.dt > 0) || !(c.max_dt >= c.dt) || !(c.fd_step > 0)) {
    throw ModelError("swimmer: config parameter out of range");
  }
  for (int k = 0; k < num_links(); ++k) {
    for (int p = 0; p < c.links[k].panels; ++p) panel_link_.push_back(k);
  }
  panel_lengths_ = Boundary(Eigen::VectorXd::Zero(num_joints())).Lengths();
  // Sampled guard that links never overlap inside the evaluation box.
  const double reach = c.joint_limit + c.box_margin;
  constexpr int kSamples = 5;
  Eigen::VectorXd q(num_joints());
  for (int idx = 0; idx < kSamples * kSamples * kSamples; ++idx) {
    int rest = idx;
    for (int j = 0; j < num_joints(); ++j) {
      q[j] = -reach + 2.0 * reach * (rest % kSamples) / (kSamples - 1);
      rest /= kSamples;
    }
    if (Clearance(q) <= 0.0) throw ModelError("swimmer: links overlap inside the joint box");
  }
}

bool SwimmerModel::InBox(const Eigen::VectorXd& q) const {
  if (q.size() != num_joints() || !q.allFinite()) return false;
  return q.cwiseAbs().maxCoeff() <= config_.joint_limit + config_.box_margin;
}

SwimmerModel::Kinematics SwimmerModel::LinkKinematics(const Eigen::VectorXd& q) const {
  if (q.size() != num_joints()) throw InvalidInputError("swimmer: joint vector has wrong size");
  double min_b = config_.links[0].b;
  for (const auto& l : config_.links) min_b = std::min(min_b, l.b);
  const double half_gap = 0.5 * config_.gap_ratio * min_b;
  Kinematics k;
  k.centers = Eigen::Matrix2Xd::Zero(2, num_links());
  k.angles = Eigen::VectorXd::Zero(num_links());
  k.joints.resize(2, num_joints());
  for (int j = 0; j < num_joints(); ++j) {
    const Eigen::Vector2d back(config_.links[j].a + half_gap, 0.0);
    k.joints.col(j) = k.centers.col(j) - Rotation(k.angles[j]) * back;
    k.angles[j + 1] = k.angles[j] + q[j];
    const Eigen::Vector2d front(config_.links[j + 1].a + half_gap, 0.0);
    k.centers.col(j + 1) = k.joints.col(j) - Rotation(k.angles[j + 1]) * front;
  }
  return k;
}

BoundaryMesh SwimmerModel::Boundary(const Eigen::VectorXd& q) const {
  const Kinematics k = LinkKinematics(q);
  BoundaryMesh mesh;
  for (int l = 0; l < num_links(); ++l) {
    const auto& link = config_.links[l];
    AppendEllipse(mesh, k.centers.col(l), k.angles[l], link.a, link.b, link.panels, l);
  }
  return mesh;
}

double SwimmerModel::Clearance(const Eigen::VectorXd& q) const {
  const Kinematics k = LinkKinematics(q);
  const BoundaryMesh mesh = Boundary(q);
  double out = std::numeric_limits<double>::infinity();
  for (int p = 0; p < mesh.num_panels(); ++p) {
    const Eigen::Vector2d x = mesh.start.col(p);
    for (int l = 0; l < num_links(); ++l) {
      if (l == mesh.body[p]) continue;
      const Eigen::Vector2d local = Rotation(-k.angles[l]) * (x - k.centers.col(l));
      const auto& link = config_.links[l];
      out = std::min(out, std::pow(local.x() / link.a, 2) + std::pow(local.y() / link.b, 2) - 1.0);
    }
  }
  return out;
}

Eigen::MatrixXd SwimmerModel::NormalVelocityMap(const Eigen::VectorXd& q,
                                                std::vector<Eigen::MatrixXd>* dq) const {
  const Kinematics k = LinkKinematics(q);
  const BoundaryMesh mesh = Boundary(q);
  const Eigen::Matrix2Xd mid = mesh.Midpoints();
  const Eigen::Matrix2Xd nrm = mesh.Normals();
  const int P = num_panels(), nj = num_joints();
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(P, 6);
  if (dq) dq->assign(nj, Eigen::MatrixXd::Zero(P, 6));
  for (int p = 0; p < P; ++p) {
    const int link = panel_link_[p];
    const Eigen::Vector2d x = mid.col(p), n = nrm.col(p);
    N(p, 0) = n.x();
    N(p, 1) = n.y();
    N(p, 2) = n.dot(Perp(x));
    for (int j = 0; j < link; ++j) N(p, 3 + j) = n.dot(Perp(x - k.joints.col(j)));
    if (!dq) continue;
    for (int i = 0; i < link; ++i) {
      // Joint i rotates everything behind it about its hinge point.
      const Eigen::Vector2d dn = Perp(n);
      const Eigen::Vector2d dx = Perp(x - k.joints.col(i));
      Eigen::MatrixXd& D = (*dq)[i];
      D(p, 0) = dn.x();
      D(p, 1) = dn.y();
      D(p, 2) = dn.dot(Perp(x)) + n.dot(Perp(dx));
      for (int j = 0; j < link; ++j) {
        const Eigen::Vector2d dJ = j > i ? Perp(k.joints.col(j) - k.joints.col(i)) : Eigen::Vector2d::Zero();
        D(p, 3 + j) = dn.dot(Perp(x - k.joints.col(j))) + n.dot(Perp(dx - dJ));
      }
    }
  }
  return N;
}

Eigen::MatrixXd SwimmerModel::FluidMatrix(const Eigen::VectorXd& q, bool check_box) const {
  if (check_box && !InBox(q)) {
    throw InvalidInputError("swimmer: joint angles outside the evaluation box");
  }
  BemSolver solver(Boundary(q));
  return solver.Solve(NormalVelocityMap(q));
}

FluidSolve SwimmerModel::Fluid(const Eigen::VectorXd& q, const Vector6d& body_velocity) const {
  if (!InBox(q)) throw InvalidInputError("swimmer: joint angles outside the evaluation box");
  BemSolver solver(Boundary(q));
  const Eigen::MatrixXd N = NormalVelocityMap(q);
  FluidSolve out;
  out.f_matrix = solver.Solve(N);
  out.normal_velocity = N * body_velocity;
  out.phi = out.f_matrix * body_velocity;
  out.residual = solver.Residual(out.phi, out.normal_velocity);
  out.added_mass = AddedMass(q, out.f_matrix);
  return out;
}

Matrix6d SwimmerModel::AddedMass(const Eigen::VectorXd& q, const Eigen::MatrixXd& f,
                                 const std::vector<Eigen::MatrixXd>* df,
                                 std::array<Matrix6d, 3>* dA) const {
  if (f.rows() != num_panels() || f.cols() != 6) throw InvalidInputError("swimmer: f has wrong shape");
  std::vector<Eigen::MatrixXd> dN;
  const Eigen::MatrixXd N = NormalVelocityMap(q, dA ? &dN : nullptr);
  const double rho = config_.fluid_density;
  // Fluid kinetic energy is -rho/2 times the boundary integral of phi dphi/dn.
  const Eigen::MatrixXd WN = panel_lengths_.asDiagonal() * N;
  const Matrix6d A = -rho * Sym(f.transpose() * WN);
  if (dA) {
    if (!df || df->size() != static_cast<std::size_t>(num_joints())) {
      throw InvalidInputError("swimmer: added mass derivative needs df/dq");
    }
    for (int i = 0; i < num_joints(); ++i) {
      (*dA)[i] = -rho * Sym((*df)[i].transpose() * WN +
                            f.transpose() * (panel_lengths_.asDiagonal() * dN[i]));
    }
  }
  return A;
}

Matrix6d SwimmerModel::BodyMass(const Eigen::VectorXd& q, std::array<Matrix6d, 3>* dM) const {
  const Kinematics k = LinkKinematics(q);
  Matrix6d M = Matrix6d::Zero();
  if (dM) dM->fill(Matrix6d::Zero());
  for (int l = 0; l < num_links(); ++l) {
    const auto& link = config_.links[l];
    const double m = link.density * std::numbers::pi * link.a * link.b;
    const Eigen::Vector3d inertia(m, m, 0.25 * m * (link.a * link.a + link.b * link.b));
    Eigen::Matrix<double, 3, 6> T = Eigen::Matrix<double, 3, 6>::Zero();
    T(0, 0) = T(1, 1) = T(2, 2) = 1.0;
    T.block<2, 1>(0, 2) = Perp(k.centers.col(l));
    for (int j = 0; j < l; ++j) {
      T.block<2, 1>(0, 3 + j) = Perp(k.centers.col(l) - k.joints.col(j));
      T(2, 3 + j) = 1.0;
    }
    M += T.transpose() * inertia.asDiagonal() * T;
    if (!dM) continue;
    for (int i = 0; i < l; ++i) {
      const Eigen::Vector2d dc = Perp(k.centers.col(l) - k.joints.col(i));
      Eigen::Matrix<double, 3, 6> dT = Eigen::Matrix<double, 3, 6>::Zero();
      dT.block<2, 1>(0, 2) = Perp(dc);
      for (int j = 0; j < l; ++j) {
        const Eigen::Vector2d dJ = j > i ? Perp(k.joints.col(j) - k.joints.col(i)) : Eigen::Vector2d::Zero();
        dT.block<2, 1>(0, 3 + j) = Perp(dc - dJ);
      }
      const Eigen::Matrix<double, 6, 6> term = T.transpose() * inertia.asDiagonal() * dT;
      (*dM)[i] += term + term.transpose();
    }
  }
  return M;
}

Eigen::Vector2d SwimmerModel::CenterOfMass(const SwimmerState& s) const {
  const Kinematics k = LinkKinematics(s.q);
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (int l = 0; l < num_links(); ++l) {
    const auto& link = config_.links[l];
    c += link.density * std::numbers::pi * link.a * link.b * k.centers.col(l);
  }
  return s.pose.head<2>() + Rotation(s.pose[2]) * c / total_mass_;
}

Eigen::Vector2d SwimmerModel::CenterOfMassVelocity(const SwimmerState& s) const {
  const Kinematics k = LinkKinematics(s.q);
  const Eigen::Matrix2d R = Rotation(s.pose[2]);
  const Eigen::Vector2d v = R.transpose() * s.velocity.head<2>();
  Eigen::Vector2d vc = Eigen::Vector2d::Zero();
  for (int l = 0; l < num_links(); ++l) {
    const auto& link = config_.links[l];
    Eigen::Vector2d vl = v + s.velocity[2] * Perp(k.centers.col(l));
    for (int j = 0; j < l; ++j) vl += s.velocity[3 + j] * Perp(k.centers.col(l) - k.joints.col(j));
    vc += link.density * std::numbers::pi * link.a * link.b * vl;
  }
  return R * vc / total_mass_;
}

SwimmerFluidMap::SwimmerFluidMap(std::shared_ptr<const SwimmerModel> model) : model_(std::move(model)) {
  if (!model_) throw InvalidInputError("swimmer map: null model");
}

MapSample SwimmerFluidMap::Evaluate(const Eigen::VectorXd& q) const {
  if (!model_->InBox(q)) throw InvalidInputError("swimmer: joint angles outside the evaluation box");
  const int m = output_dim(), d = input_dim();
  const double h = model_->config().fd_step;
  MapSample out;
  const Eigen::MatrixXd F = model_->FluidMatrix(q);
  out.value = Eigen::Map<const Eigen::VectorXd>(F.data(), m);
  out.jacobian.resize(m, d);
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    const Eigen::MatrixXd Fp = model_->FluidMatrix(qp, false);
    const Eigen::MatrixXd Fm = model_->FluidMatrix(qm, false);
    out.jacobian.col(j) = Eigen::Map<const Eigen::VectorXd>(Fp.data(), m) / (2 * h) -
                          Eigen::Map<const Eigen::VectorXd>(Fm.data(), m) / (2 * h);
  }
  return out;
}

Matrix6d BodyVelocityTransform(double theta) {
  Matrix6d Q = Matrix6d::Identity();
  Q.topLeftCorner<2, 2>() = Rotation(theta).transpose();
  return Q;
}

Matrix6d BodyVelocityTransformDerivative(double theta) {
  Matrix6d Q = Matrix6d::Zero();
  Eigen::Matrix2d dR;
  dR << -std::sin(theta), -std::cos(theta), std::cos(theta), -std::sin(theta);
  Q.topLeftCorner<2, 2>() = dR.transpose();
  return Q;
}

Matrix6d CoriolisMatrix(const std::array<Matrix6d, 6>& dM, const Vector6d& xdot) {
  Matrix6d C = Matrix6d::Zero();
  for (int k = 0; k < 6; ++k) {
    if (xdot[k] == 0.0) continue;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) C(i, j) += 0.5 * (dM[k](i, j) + dM[j](i, k) - dM[i](j, k)) * xdot[k];
    }
  }
  return C;
}

namespace {

// World-frame mass matrix and coordinate derivatives from a body-frame mass
// and its joint derivatives.
void ToWorld(const Matrix6d& body, const std::array<Matrix6d, 3>& d_body, double theta,
             Matrix6d* mass, std::array<Matrix6d, 6>* d_mass) {
  const Matrix6d Q = BodyVelocityTransform(theta);
  const Matrix6d dQ = BodyVelocityTransformDerivative(theta);
  *mass = Q.transpose() * body * Q;
  (*d_mass)[0] = (*d_mass)[1] = Matrix6d::Zero();
  const Matrix6d t = dQ.transpose() * body * Q;
  (*d_mass)[2] = t + t.transpose();
  for (int i = 0; i < 3; ++i) (*d_mass)[3 + i] = Q.transpose() * d_body[i] * Q;
}

Eigen::Matrix<double, 6, 3> ControlMatrix() {
  Eigen::Matrix<double, 6, 3> J = Eigen::Matrix<double, 6, 3>::Zero();
  J.bottomRows<3>().setIdentity();
  return J;
}

}  // namespace

RigidDynamics ComputeRigidDynamics(const SwimmerModel& model, const SwimmerState& s) {
  std::array<Matrix6d, 3> dM;
  const Matrix6d M = model.BodyMass(s.q, &dM);
  RigidDynamics out;
  std::array<Matrix6d, 6> d_mass;
  ToWorld(M, dM, s.pose[2], &out.mass, &d_mass);
  out.coriolis = CoriolisMatrix(d_mass, s.velocity) * s.velocity;
  out.control = ControlMatrix();
  return out;
}

SwimmerInertia ComputeInertia(const SwimmerModel& model, const SwimmerState& s, const MapQuery& f) {
  const int P = model.num_panels();
  if (f.value.size() != 6 * P || f.jacobian.cols() != 3) {
    throw InvalidInputError("swimmer: surrogate output has wrong shape");
  }
  const Eigen::MatrixXd F = Reshape(f.value.data(), P);
  std::vector<Eigen::MatrixXd> dF;
  for (int i = 0; i < 3; ++i) dF.push_back(Reshape(f.jacobian.col(i).data(), P));
  std::array<Matrix6d, 3> dA, dM;
  const Matrix6d A = model.AddedMass(s.q, F, &dF, &dA);
  const Matrix6d M = model.BodyMass(s.q, &dM);
  std::array<Matrix6d, 3> d_total;
  for (int i = 0; i < 3; ++i) d_total[i] = dM[i] + dA[i];
  SwimmerInertia out;
  ToWorld(M + A, d_total, s.pose[2], &out.mass, &out.d_mass);
  ToWorld(A, dA, s.pose[2], &out.added_mass, &out.d_added_mass);
  return out;
}

Vector6d FluidForce(const SwimmerModel& model, const SwimmerState& s, Surrogate& f) {
  const SwimmerInertia in = ComputeInertia(model, s, f.Query(s.q, false));
  return -CoriolisMatrix(in.d_added_mass, s.velocity) * s.velocity;
}

Vector6d SwimmerAcceleration(const SwimmerModel& model, const SwimmerState& s,
                             const Eigen::Vector3d& u, const MapQuery& f) {
  const SwimmerInertia in = ComputeInertia(model, s, f);
  const Vector6d rhs = ControlMatrix() * u - CoriolisMatrix(in.d_mass, s.velocity) * s.velocity;
  return in.mass.ldlt().solve(rhs);
}

SwimmerVector Flatten(const SwimmerState& s) {
  SwimmerVector z;
  z << s.pose, s.q, s.velocity;
  return z;
}

SwimmerState Unflatten(const SwimmerVector& z) {
  SwimmerState s;
  s.pose = z.segment<3>(0);
  s.q = z.segment<3>(3);
  s.velocity = z.segment<6>(6);
  return s;
}

SwimmerState StepSwimmer(const SwimmerModel& model, const SwimmerState& s, const Eigen::Vector3d& u,
                         double dt, Surrogate& f, SwimmerStepDerivatives* derivs, int step_index) {
  if (!(dt > 0) || dt > model.config().max_dt) {
    throw InvalidInputError("swimmer: time step outside (0, max_dt]");
  }
  if (!Flatten(s).allFinite() || !u.allFinite()) {
    throw BlowUpError("swimmer: non-finite state at step " + std::to_string(step_index), step_index);
  }
  const MapQuery fq = f.Query(s.q, false);
  const SwimmerInertia in = ComputeInertia(model, s, fq);
  const Matrix6d C = CoriolisMatrix(in.d_mass, s.velocity);
  const auto ldlt = in.mass.ldlt();
  const Vector6d acc = ldlt.solve(ControlMatrix() * u - C * s.velocity);

  SwimmerState next;
  next.pose = s.pose + dt * s.velocity.head<3>();
  next.q = s.q + dt * s.velocity.tail<3>();
  next.velocity = s.velocity + dt * acc;
  next.pose[2] = std::remainder(next.pose[2], 2.0 * std::numbers::pi);
  if (next.pose[2] <= -std::numbers::pi) next.pose[2] += 2.0 * std::numbers::pi;
  if (!Flatten(next).allFinite()) {
    throw BlowUpError("swimmer: non-finite state at step " + std::to_string(step_index), step_index);
  }
  std::array<bool, 3> clamped{};
  const double limit = model.config().joint_limit;
  for (int j = 0; j < 3; ++j) {
    if (std::abs(next.q[j]) > limit) {
      next.q[j] = std::copysign(limit, next.q[j]);
      next.velocity[3 + j] = 0.0;
      clamped[j] = true;
    }
  }
  if (!derivs) return next;

  // d acc / d(theta, q) by central differences through the surrogate;
  // velocity and control enter analytically.
  Eigen::Matrix<double, 6, 12> da = Eigen::Matrix<double, 6, 12>::Zero();
  constexpr double kStep = 1e-6;
  for (int c = 2; c < 6; ++c) {
    SwimmerState sp = s, sm = s;
    if (c == 2) {
      sp.pose[2] += kStep;
      sm.pose[2] -= kStep;
      da.col(c) = (SwimmerAcceleration(model, sp, u, fq) - SwimmerAcceleration(model, sm, u, fq)) /
                  (2 * kStep);
    } else {
      sp.q[c - 3] += kStep;
      sm.q[c - 3] -= kStep;
      da.col(c) = (SwimmerAcceleration(model, sp, u, f.Query(sp.q, false)) -
                   SwimmerAcceleration(model, sm, u, f.Query(sm.q, false))) /
                  (2 * kStep);
    }
  }
  da.rightCols<6>() = ldlt.solve(Matrix6d(-2.0 * C));
  derivs->d_state.setIdentity();
  derivs->d_state.block<6, 6>(0, 6) = dt * Matrix6d::Identity();
  derivs->d_state.bottomRows<6>() += dt * da;
  derivs->d_u.setZero();
  derivs->d_u.bottomRows<6>() = dt * ldlt.solve(ControlMatrix());
  for (int j = 0; j < 3; ++j) {
    if (!clamped[j]) continue;
    derivs->d_state.row(3 + j).setZero();
    derivs->d_state.row(9 + j).setZero();
    derivs->d_u.row(3 + j).setZero();
    derivs->d_u.row(9 + j).setZero();
  }
  return next;
}

Eigen::Vector2d LinearMomentum(const SwimmerModel& model, const SwimmerState& s, Surrogate& f) {
  const SwimmerInertia in = ComputeInertia(model, s, f.Query(s.q, false));
  return (in.mass * s.velocity).head<2>();
}

}  // namespace hsid
