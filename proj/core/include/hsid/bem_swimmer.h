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

#ifndef HSID_BEM_SWIMMER_H_
#define HSID_BEM_SWIMMER_H_

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hsid/surrogate.h"

namespace hsid {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

// Closed polygonal boundaries, one or more bodies. Panel p runs from
// start.col(p) to end.col(p); every body is traversed counter-clockwise so
// the outward normal lies to the right of the panel direction.
struct BoundaryMesh {
  Eigen::Matrix2Xd start;
  Eigen::Matrix2Xd end;
  std::vector<int> body;

  int num_panels() const { return static_cast<int>(start.cols()); }
  int num_bodies() const;
  Eigen::Matrix2Xd Midpoints() const;
  Eigen::Matrix2Xd Normals() const;
  Eigen::VectorXd Lengths() const;
};

// Appends an ellipse with semi-axes (a, b) rotated by `angle` about `center`,
// sampled uniformly in the parameter angle.
void AppendEllipse(BoundaryMesh& mesh, const Eigen::Vector2d& center, double angle, double a,
                   double b, int panels, int body);

// Collocation operators of the exterior Laplace problem with G = -ln(r)/(2 pi)
// and constant panels. single_layer(i, j) integrates G over panel j at the
// midpoint of panel i; double_layer(i, j) integrates dG/dn_y. Both use exact
// segment integrals. Throws ModelError on panels shorter than 1e-12 m.
struct BemOperators {
  Eigen::MatrixXd single_layer;
  Eigen::MatrixXd double_layer;
};
BemOperators AssembleBem(const BoundaryMesh& mesh);

// Factorized exterior Neumann solver: (I/2 - D) phi = -S sigma for the
// boundary potential phi given the outward normal velocity sigma.
class BemSolver {
 public:
  explicit BemSolver(const BoundaryMesh& mesh);

  Eigen::MatrixXd Solve(const Eigen::MatrixXd& normal_velocity) const;
  // Max-norm residual of the boundary equation for a computed phi.
  double Residual(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& normal_velocity) const;
  // Net outward flux of sigma through each body's boundary.
  Eigen::VectorXd NetFlux(const Eigen::VectorXd& normal_velocity) const;

  const BemOperators& operators() const { return ops_; }

 private:
  BoundaryMesh mesh_;
  BemOperators ops_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct SwimmerLink {
  double a = 0.1;          // semi-axis along the link (m)
  double b = 0.025;        // semi-axis across the link (m)
  double density = 1000.0; // kg/m^2
  int panels = 64;
};

struct SwimmerConfig {
  std::vector<SwimmerLink> links = std::vector<SwimmerLink>(4);
  double fluid_density = 1000.0;  // kg/m^2
  double gap_ratio = 0.2;         // gap between link tips as a fraction of min b
  double joint_limit = 1.0;       // rad, symmetric
  double box_margin = 0.35;       // rad beyond the limits where f is still defined
  double torque_limit = 0.05;     // N m
  double dt = 1e-3;               // s
  double max_dt = 5e-3;           // s, explicit stability bound
  double fd_step = 1e-5;          // rad, for df/dq
};

// Generalized coordinates: base pose (x, y, theta) of the head link and the
// joint angles q. `velocity` holds their time derivatives.
struct SwimmerState {
  Eigen::Vector3d pose = Eigen::Vector3d::Zero();
  Eigen::Vector3d q = Eigen::Vector3d::Zero();
  Vector6d velocity = Vector6d::Zero();
};

struct FluidSolve {
  Eigen::VectorXd phi;
  Eigen::VectorXd normal_velocity;
  Eigen::MatrixXd f_matrix;  // P x 6, phi = f_matrix * body velocity
  Matrix6d added_mass;
  double residual = 0.0;
};

// Rigid-body terms in world generalized coordinates: M xdd + C = J u.
struct RigidDynamics {
  Matrix6d mass;
  Vector6d coriolis;
  Eigen::Matrix<double, 6, 3> control;
};

// The swimmer geometry lives in the body frame of the head link; the chain
// extends towards -x. Body velocity is (R^T (xd, yd), thetad, qd).
class SwimmerModel {
 public:
  explicit SwimmerModel(SwimmerConfig config = {});

  const SwimmerConfig& config() const { return config_; }
  int num_links() const { return static_cast<int>(config_.links.size()); }
  int num_joints() const { return num_links() - 1; }
  int num_panels() const { return num_panels_; }
  // Joint angles with |q_j| <= joint_limit + box_margin.
  bool InBox(const Eigen::VectorXd& q) const;

  // Link centres, link angles and joint points in the head frame.
  struct Kinematics {
    Eigen::Matrix2Xd centers;
    Eigen::VectorXd angles;
    Eigen::Matrix2Xd joints;
  };
  Kinematics LinkKinematics(const Eigen::VectorXd& q) const;

  BoundaryMesh Boundary(const Eigen::VectorXd& q) const;
  // Smallest value of (implicit ellipse function - 1) of one link evaluated
  // at the boundary vertices of its neighbours; negative means overlap.
  double Clearance(const Eigen::VectorXd& q) const;

  // Normal velocity of each panel midpoint per unit body velocity (P x 6),
  // and its derivative with respect to each joint angle.
  Eigen::MatrixXd NormalVelocityMap(const Eigen::VectorXd& q,
                                    std::vector<Eigen::MatrixXd>* dq = nullptr) const;
  const Eigen::VectorXd& panel_lengths() const { return panel_lengths_; }

  // The expensive map: potential per unit body velocity (P x 6) from one BEM
  // solve. Throws InvalidInputError outside the joint box.
  Eigen::MatrixXd FluidMatrix(const Eigen::VectorXd& q, bool check_box = true) const;
  FluidSolve Fluid(const Eigen::VectorXd& q, const Vector6d& body_velocity) const;

  // Added mass in the body frame from a potential map f (P x 6); with
  // df (3 entries of P x 6) also returns the joint derivatives.
  Matrix6d AddedMass(const Eigen::VectorXd& q, const Eigen::MatrixXd& f,
                     const std::vector<Eigen::MatrixXd>* df = nullptr,
                     std::array<Matrix6d, 3>* dA = nullptr) const;

  // Rigid mass in the body frame and its joint derivatives.
  Matrix6d BodyMass(const Eigen::VectorXd& q, std::array<Matrix6d, 3>* dM = nullptr) const;

  double total_mass() const { return total_mass_; }
  Eigen::Vector2d CenterOfMass(const SwimmerState& s) const;
  Eigen::Vector2d CenterOfMassVelocity(const SwimmerState& s) const;

 private:
  SwimmerConfig config_;
  int num_panels_ = 0;
  std::vector<int> panel_link_;
  Eigen::VectorXd panel_lengths_;
  double total_mass_ = 0.0;
};

// ExpensiveMap over the joint angles: value is f(q) flattened column-major
// (6P entries), Jacobian by central differences of the BEM solve.
class SwimmerFluidMap final : public ExpensiveMap {
 public:
  explicit SwimmerFluidMap(std::shared_ptr<const SwimmerModel> model);
  int input_dim() const override { return model_->num_joints(); }
  int output_dim() const override { return 6 * model_->num_panels(); }
  MapSample Evaluate(const Eigen::VectorXd& q) const override;
  const SwimmerModel& model() const { return *model_; }

 private:
  std::shared_ptr<const SwimmerModel> model_;
};

// World-frame transform of body velocities, Q(theta), and its theta
// derivative.
Matrix6d BodyVelocityTransform(double theta);
Matrix6d BodyVelocityTransformDerivative(double theta);

// Christoffel construction: C(xd) with Cij = sum_k Gamma_ijk xd_k from the
// partial derivatives of the mass matrix (one per generalized coordinate).
Matrix6d CoriolisMatrix(const std::array<Matrix6d, 6>& dM, const Vector6d& xdot);

RigidDynamics ComputeRigidDynamics(const SwimmerModel& model, const SwimmerState& s);

// Total generalized mass (rigid plus added) and its coordinate derivatives,
// with the fluid part taken from the surrogate.
struct SwimmerInertia {
  Matrix6d mass;
  Matrix6d added_mass;
  std::array<Matrix6d, 6> d_mass;
  std::array<Matrix6d, 6> d_added_mass;
};
SwimmerInertia ComputeInertia(const SwimmerModel& model, const SwimmerState& s,
                              const MapQuery& f);

// Velocity-dependent fluid force -(dA/dt) xd + 1/2 d(xd^T A xd)/dx in world
// coordinates.
Vector6d FluidForce(const SwimmerModel& model, const SwimmerState& s, Surrogate& f);

// Generalized acceleration from (M + A) xdd = J u - (C_rigid + C_fluid).
Vector6d SwimmerAcceleration(const SwimmerModel& model, const SwimmerState& s,
                             const Eigen::Vector3d& u, const MapQuery& f);

// Flattened state z = (pose, q, velocity) in R^12.
using SwimmerVector = Eigen::Matrix<double, 12, 1>;
SwimmerVector Flatten(const SwimmerState& s);
SwimmerState Unflatten(const SwimmerVector& z);

struct SwimmerStepDerivatives {
  Eigen::Matrix<double, 12, 12> d_state;
  Eigen::Matrix<double, 12, 3> d_u;
};

// One explicit Euler step. Joint angles leaving the limits are clamped and
// their velocity zeroed; theta is wrapped to (-pi, pi]. Throws BlowUpError
// naming `step_index` when the state becomes non-finite and InvalidInputError
// when dt exceeds the configured bound.
SwimmerState StepSwimmer(const SwimmerModel& model, const SwimmerState& s,
                         const Eigen::Vector3d& u, double dt, Surrogate& f,
                         SwimmerStepDerivatives* derivs = nullptr, int step_index = 0);

// World linear momentum including the fluid impulse (base rows of (M+A) xd).
Eigen::Vector2d LinearMomentum(const SwimmerModel& model, const SwimmerState& s, Surrogate& f);

}  // namespace hsid

#endif  // HSID_BEM_SWIMMER_H_
