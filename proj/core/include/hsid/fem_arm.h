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

#ifndef HSID_FEM_ARM_H_
#define HSID_FEM_ARM_H_

#include <atomic>
#include <deque>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hsid/arm_mesh.h"
#include "hsid/surrogate.h"

namespace hsid {

struct ArmConfig {
  double young0 = 1000.0;     // stiff material (N/m, planar)
  double young1 = 300.0;      // soft material
  double poisson = 0.3;
  double density = 2.0;       // kg/m^2
  double gravity = 9.81;      // m/s^2, 0 disables
  double rayleigh = 0.1;      // mass-proportional damping (1/s)
  double newton_tol = 1e-8;   // relative to ForceScale()
  int newton_max_iters = 50;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

struct QuasistaticResult {
  Eigen::VectorXd x;          // equilibrium free-vertex positions
  Eigen::MatrixXd dx_du;      // N x d sensitivity
  int iterations = 0;
  double residual = 0.0;      // max-norm of p + c at x
};

// Planar line-actuated elastic arm. The state x stacks the (x, y) positions
// of the free vertices, N = 2 * #free. Immutable after construction; all
// methods are reentrant.
class ArmModel {
 public:
  ArmModel(ArmMesh mesh, ArmConfig config);

  const ArmMesh& mesh() const { return mesh_; }
  const ArmConfig& config() const { return config_; }
  int state_dim() const { return static_cast<int>(dof_vertex_.size()) * 2; }
  int num_lines() const { return static_cast<int>(mesh_.lines.size()); }

  Eigen::VectorXd RestState() const;
  // Diagonal of the lumped mass matrix M (free dofs).
  const Eigen::VectorXd& mass() const { return mass_; }
  // Total weight, or 1 with gravity disabled.
  double ForceScale() const;

  // p(x): stable neo-Hookean elastic forces plus gravity on free dofs.
  // Optionally returns dp/dx. Inverted elements are tolerated and counted.
  Eigen::VectorXd InternalForce(const Eigen::VectorXd& x,
                                SparseMatrix* stiffness = nullptr,
                                bool with_gravity = true) const;
  double ElasticEnergy(const Eigen::VectorXd& x) const;
  // Elastic forces on every vertex (2 x V), fixed ones included.
  Eigen::Matrix2Xd ElasticVertexForces(const Eigen::Matrix2Xd& positions) const;

  // c(x, u): line j pulls each routed vertex with tension u_j towards both
  // chain neighbours (one-sided at the ends). Throws on negative u.
  Eigen::VectorXd ControlForce(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                               SparseMatrix* dc_dx = nullptr,
                               Eigen::MatrixXd* dc_du = nullptr) const;
  // Same without the sign check; latent coordinates may be negative.
  Eigen::VectorXd SignedControlForce(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                     SparseMatrix* dc_dx = nullptr,
                                     Eigen::MatrixXd* dc_du = nullptr) const;

  // Solves p(x) + c(x, u) = 0 by Newton with backtracking, starting at x_init.
  // Throws SolverError on divergence.
  QuasistaticResult QuasistaticSolve(const Eigen::VectorXd& u,
                                     const Eigen::VectorXd& x_init) const;
  // Same solve with signed line forces, used for latent coordinates that may
  // leave the tension-only range.
  QuasistaticResult QuasistaticSolveSigned(const Eigen::VectorXd& u,
                                           const Eigen::VectorXd& x_init) const {
    return Solve(u, x_init, true);
  }

  Eigen::Matrix2Xd Positions(const Eigen::VectorXd& x) const;
  Eigen::Vector2d Tip(const Eigen::VectorXd& x) const;
  // Rows of x holding the tip (x, y); -1 if the tip is fixed.
  int tip_dof() const { return vertex_dof_[mesh_.tip]; }

  int inverted_element_count() const { return inverted_.load(); }

 private:
  struct Element {
    std::array<int, 3> v;
    Eigen::Matrix2d rest_inv;
    double area;
    double mu, lambda;
  };

  Eigen::Matrix2Xd Expand(const Eigen::VectorXd& x) const;
  QuasistaticResult Solve(const Eigen::VectorXd& u, const Eigen::VectorXd& x_init,
                          bool signed_u) const;

  ArmMesh mesh_;
  ArmConfig config_;
  std::vector<Element> elements_;
  std::vector<int> vertex_dof_;  // vertex -> first dof or -1 if fixed
  std::vector<int> dof_vertex_;  // free index -> vertex
  Eigen::VectorXd mass_;
  Eigen::VectorXd gravity_force_;
  mutable std::atomic<int> inverted_{0};
};

// The quasistatic map alpha -> x*(alpha) with dx*/dalpha, d = #lines,
// m = N. Each solve is warm-started from the nearest previously solved point.
class ArmQuasistaticMap final : public ExpensiveMap {
 public:
  explicit ArmQuasistaticMap(std::shared_ptr<const ArmModel> model,
                             std::size_t warm_start_capacity = 2048);
  int input_dim() const override { return model_->num_lines(); }
  int output_dim() const override { return model_->state_dim(); }
  MapSample Evaluate(const Eigen::VectorXd& alpha) const override;
  const ArmModel& model() const { return *model_; }

 private:
  std::shared_ptr<const ArmModel> model_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  mutable std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> solved_;
};

// Latent state of the projected dynamics: alpha at steps i and i-1.
struct LatentState {
  Eigen::VectorXd alpha;
  Eigen::VectorXd alpha_prev;
};

struct ProjectedStepResult {
  Eigen::VectorXd alpha;      // alpha_{i+1}
  Eigen::VectorXd x;          // f(alpha_{i+1})
  int iterations = 0;
  double residual = 0.0;
  // Filled when derivatives are requested: d alpha_{i+1} / d(alpha_i,
  // alpha_{i-1}, u).
  Eigen::MatrixXd d_alpha, d_alpha_prev, d_u;
};

struct ProjectedStepOptions {
  double dt = 0.02;
  bool damping = true;  // Rayleigh term from ArmConfig
  bool derivatives = false;
};

// One implicit step of the Galerkin-projected dynamics
//   J^T M (f(a) - 2 f(a_i) + f(a_{i-1})) / dt^2 + J^T beta M (f(a) - f(a_i)) / dt
//     = J^T (p(f(a)) + c(f(a), u)),   J = df/da at a,
// solved for a = alpha_{i+1} by Newton, with f and its derivatives taken from
// `f` (grid or exact). Throws SolverError carrying the alpha iterate.
ProjectedStepResult ProjectedStep(const ArmModel& model, const LatentState& state,
                                  const Eigen::VectorXd& u, Surrogate& f,
                                  const ProjectedStepOptions& options);

}  // namespace hsid

#endif  // HSID_FEM_ARM_H_
