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

#include "hsid/fem_arm.h"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseLU>

#include "hsid/error.h"

namespace hsid {
namespace {

Eigen::Matrix2d Cofactor(const Eigen::Matrix2d& F) {
  Eigen::Matrix2d c;
  c << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
  return c;
}

// First Piola-Kirchhoff stress of the stable neo-Hookean energy
//   psi = mu/2 (|F|^2 - 2) - mu (J - 1) + lambda/2 (J - 1)^2.
Eigen::Matrix2d Stress(const Eigen::Matrix2d& F, double mu, double lambda) {
  const double J = F.determinant();
  return mu * F - mu * Cofactor(F) + lambda * (J - 1.0) * Cofactor(F);
}

Eigen::Matrix2d StressDifferential(const Eigen::Matrix2d& F, const Eigen::Matrix2d& dF,
                                   double mu, double lambda) {
  const double J = F.determinant();
  const Eigen::Matrix2d cof = Cofactor(F);
  const Eigen::Matrix2d dcof = Cofactor(dF);
  return mu * dF - mu * dcof + lambda * cof.cwiseProduct(dF).sum() * cof +
         lambda * (J - 1.0) * dcof;
}

double Energy(const Eigen::Matrix2d& F, double mu, double lambda) {
  const double J = F.determinant();
  return 0.5 * mu * (F.squaredNorm() - 2.0) - mu * (J - 1.0) +
         0.5 * lambda * (J - 1.0) * (J - 1.0);
}

double MaxAbs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

std::vector<double> ToStd(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

ArmModel::ArmModel(ArmMesh mesh, ArmConfig config)
    : mesh_(std::move(mesh)), config_(config) {
  ValidateArmMesh(mesh_);
  if (!(config_.young0 > 0) || !(config_.young1 > 0) || !(config_.density > 0) ||
      !(config_.poisson > -1.0 && config_.poisson < 0.5) || config_.gravity < 0 ||
      config_.rayleigh < 0 || !(config_.newton_tol > 0) || config_.newton_max_iters < 1) {
    throw ModelError("arm config: parameter out of range");
  }
  const int nv = mesh_.num_vertices();
  vertex_dof_.assign(nv, 0);
  for (int v : mesh_.fixed) vertex_dof_[v] = -1;
  for (int v = 0; v < nv; ++v) {
    if (vertex_dof_[v] == 0) {
      vertex_dof_[v] = 2 * static_cast<int>(dof_vertex_.size());
      dof_vertex_.push_back(v);
    }
  }
  if (dof_vertex_.empty()) throw ModelError("arm mesh: every vertex is fixed");

  Eigen::VectorXd vertex_mass = Eigen::VectorXd::Zero(nv);
  for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
    Element e;
    e.v = mesh_.triangles[t];
    Eigen::Matrix2d Dm;
    Dm.col(0) = mesh_.rest.col(e.v[1]) - mesh_.rest.col(e.v[0]);
    Dm.col(1) = mesh_.rest.col(e.v[2]) - mesh_.rest.col(e.v[0]);
    e.rest_inv = Dm.inverse();
    e.area = 0.5 * Dm.determinant();
    const double E = mesh_.material[t] == 0 ? config_.young0 : config_.young1;
    const double nu = config_.poisson;
    e.mu = E / (2.0 * (1.0 + nu));
    e.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    elements_.push_back(e);
    for (int v : e.v) vertex_mass[v] += config_.density * e.area / 3.0;
  }
  const int n = state_dim();
  mass_.resize(n);
  gravity_force_ = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < dof_vertex_.size(); ++i) {
    const double m = vertex_mass[dof_vertex_[i]];
    if (!(m > 0)) throw ModelError("arm mesh: free vertex without mass");
    mass_[2 * i] = mass_[2 * i + 1] = m;
    gravity_force_[2 * i + 1] = -m * config_.gravity;
  }
}

double ArmModel::ForceScale() const {
  const double w = gravity_force_.cwiseAbs().sum();
  return w > 0 ? w : 1.0;
}

Eigen::VectorXd ArmModel::RestState() const {
  Eigen::VectorXd x(state_dim());
  for (std::size_t i = 0; i < dof_vertex_.size(); ++i) x.segment<2>(2 * i) = mesh_.rest.col(dof_vertex_[i]);
  return x;
}

Eigen::Matrix2Xd ArmModel::Expand(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim()) throw InvalidInputError("arm: state has wrong size");
  Eigen::Matrix2Xd pos = mesh_.rest;
  for (std::size_t i = 0; i < dof_vertex_.size(); ++i) pos.col(dof_vertex_[i]) = x.segment<2>(2 * i);
  return pos;
}

Eigen::Matrix2Xd ArmModel::Positions(const Eigen::VectorXd& x) const { return Expand(x); }

Eigen::Vector2d ArmModel::Tip(const Eigen::VectorXd& x) const {
  const int dof = vertex_dof_[mesh_.tip];
  return dof < 0 ? Eigen::Vector2d(mesh_.rest.col(mesh_.tip)) : Eigen::Vector2d(x.segment<2>(dof));
}

Eigen::Matrix2Xd ArmModel::ElasticVertexForces(const Eigen::Matrix2Xd& pos) const {
  Eigen::Matrix2Xd f = Eigen::Matrix2Xd::Zero(2, pos.cols());
  for (const Element& e : elements_) {
    Eigen::Matrix2d Ds;
    Ds.col(0) = pos.col(e.v[1]) - pos.col(e.v[0]);
    Ds.col(1) = pos.col(e.v[2]) - pos.col(e.v[0]);
    const Eigen::Matrix2d F = Ds * e.rest_inv;
    if (F.determinant() <= 0) inverted_.fetch_add(1, std::memory_order_relaxed);
    const Eigen::Matrix2d H = -e.area * Stress(F, e.mu, e.lambda) * e.rest_inv.transpose();
    f.col(e.v[1]) += H.col(0);
    f.col(e.v[2]) += H.col(1);
    f.col(e.v[0]) -= H.col(0) + H.col(1);
  }
  return f;
}

Eigen::VectorXd ArmModel::InternalForce(const Eigen::VectorXd& x, SparseMatrix* stiffness,
                                        bool with_gravity) const {
  const Eigen::Matrix2Xd pos = Expand(x);
  const Eigen::Matrix2Xd fv = ElasticVertexForces(pos);
  Eigen::VectorXd p(state_dim());
  for (std::size_t i = 0; i < dof_vertex_.size(); ++i) p.segment<2>(2 * i) = fv.col(dof_vertex_[i]);
  if (with_gravity) p += gravity_force_;
  if (!stiffness) return p;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(elements_.size() * 36);
  for (const Element& e : elements_) {
    Eigen::Matrix2d Ds;
    Ds.col(0) = pos.col(e.v[1]) - pos.col(e.v[0]);
    Ds.col(1) = pos.col(e.v[2]) - pos.col(e.v[0]);
    const Eigen::Matrix2d F = Ds * e.rest_inv;
    for (int a = 0; a < 6; ++a) {
      const int col_dof = vertex_dof_[e.v[a / 2]];
      if (col_dof < 0) continue;
      Eigen::Matrix2d dDs = Eigen::Matrix2d::Zero();
      const int comp = a % 2;
      switch (a / 2) {
        case 0: dDs(comp, 0) = dDs(comp, 1) = -1.0; break;
        case 1: dDs(comp, 0) = 1.0; break;
        default: dDs(comp, 1) = 1.0; break;
      }
      const Eigen::Matrix2d dF = dDs * e.rest_inv;
      const Eigen::Matrix2d dH =
          -e.area * StressDifferential(F, dF, e.mu, e.lambda) * e.rest_inv.transpose();
      const Eigen::Vector2d df[3] = {-dH.col(0) - dH.col(1), dH.col(0), dH.col(1)};
      for (int b = 0; b < 3; ++b) {
        const int row_dof = vertex_dof_[e.v[b]];
        if (row_dof < 0) continue;
        triplets.emplace_back(row_dof, col_dof + comp, df[b][0]);
        triplets.emplace_back(row_dof + 1, col_dof + comp, df[b][1]);
      }
    }
  }
  stiffness->resize(state_dim(), state_dim());
  stiffness->setFromTriplets(triplets.begin(), triplets.end());
  return p;
}

double ArmModel::ElasticEnergy(const Eigen::VectorXd& x) const {
  const Eigen::Matrix2Xd pos = Expand(x);
  double energy = 0.0;
  for (const Element& e : elements_) {
    Eigen::Matrix2d Ds;
    Ds.col(0) = pos.col(e.v[1]) - pos.col(e.v[0]);
    Ds.col(1) = pos.col(e.v[2]) - pos.col(e.v[0]);
    energy += e.area * Energy(Ds * e.rest_inv, e.mu, e.lambda);
  }
  return energy;
}

Eigen::VectorXd ArmModel::ControlForce(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                       SparseMatrix* dc_dx, Eigen::MatrixXd* dc_du) const {
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    if (!(u[j] >= 0.0)) throw InvalidInputError("arm: line tension must be non-negative");
  }
  return SignedControlForce(x, u, dc_dx, dc_du);
}

Eigen::VectorXd ArmModel::SignedControlForce(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                             SparseMatrix* dc_dx, Eigen::MatrixXd* dc_du) const {
  if (u.size() != num_lines()) throw InvalidInputError("arm: control has wrong size");
  const Eigen::Matrix2Xd pos = Expand(x);
  const int n = state_dim();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (dc_du) dc_du->setZero(n, num_lines());
  std::vector<Eigen::Triplet<double>> triplets;
  for (int j = 0; j < num_lines(); ++j) {
    const auto& chain = mesh_.lines[j].routing;
    for (std::size_t s = 0; s + 1 < chain.size(); ++s) {
      const int a = chain[s], b = chain[s + 1];
      const Eigen::Vector2d d = pos.col(b) - pos.col(a);
      const double len = d.norm();
      if (len < 1e-14) throw ModelError("arm: collapsed line segment");
      const Eigen::Vector2d e = d / len;
      const Eigen::Matrix2d G = (Eigen::Matrix2d::Identity() - e * e.transpose()) / len;
      const int da = vertex_dof_[a], db = vertex_dof_[b];
      // Segment tension pulls a towards b and b towards a.
      if (da >= 0) {
        c.segment<2>(da) += u[j] * e;
        if (dc_du) dc_du->block<2, 1>(da, j) += e;
      }
      if (db >= 0) {
        c.segment<2>(db) -= u[j] * e;
        if (dc_du) dc_du->block<2, 1>(db, j) -= e;
      }
      if (!dc_dx) continue;
      auto add = [&](int row, int col, const Eigen::Matrix2d& blk) {
        if (row < 0 || col < 0) return;
        for (int r = 0; r < 2; ++r) {
          for (int k = 0; k < 2; ++k) triplets.emplace_back(row + r, col + k, blk(r, k));
        }
      };
      const Eigen::Matrix2d uG = u[j] * G;
      add(da, da, -uG);
      add(da, db, uG);
      add(db, da, uG);
      add(db, db, -uG);
    }
  }
  if (dc_dx) {
    dc_dx->resize(n, n);
    dc_dx->setFromTriplets(triplets.begin(), triplets.end());
  }
  return c;
}

QuasistaticResult ArmModel::QuasistaticSolve(const Eigen::VectorXd& u,
                                             const Eigen::VectorXd& x_init) const {
  return Solve(u, x_init, false);
}

QuasistaticResult ArmModel::Solve(const Eigen::VectorXd& u, const Eigen::VectorXd& x_init,
                                  bool signed_u) const {
  auto residual = [&](const Eigen::VectorXd& x, SparseMatrix* K, Eigen::MatrixXd* dc_du) {
    SparseMatrix Kp, Kc;
    Eigen::VectorXd r = InternalForce(x, K ? &Kp : nullptr);
    r += signed_u ? SignedControlForce(x, u, K ? &Kc : nullptr, dc_du)
                  : ControlForce(x, u, K ? &Kc : nullptr, dc_du);
    if (K) *K = Kp + Kc;
    return r;
  };
  const double tol = config_.newton_tol * ForceScale();
  QuasistaticResult out;
  out.x = x_init;
  SparseMatrix K;
  Eigen::MatrixXd dc_du;
  Eigen::VectorXd r = residual(out.x, &K, &dc_du);
  bool polished = false;
  Eigen::SparseLU<SparseMatrix> lu;
  while (true) {
    const double rnorm = MaxAbs(r);
    if (!std::isfinite(rnorm)) throw SolverError("arm: non-finite residual", ToStd(u), rnorm);
    if (rnorm < tol && (polished || rnorm < 1e-6 * tol)) break;
    if (out.iterations >= config_.newton_max_iters) {
      std::ostringstream msg;
      msg << "arm: quasistatic Newton did not converge in " << out.iterations
          << " iterations, residual " << rnorm;
      throw SolverError(msg.str(), ToStd(u), rnorm);
    }
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw SolverError("arm: singular stiffness", ToStd(u), rnorm);
    const Eigen::VectorXd step = lu.solve(-r);
    const double r2 = r.squaredNorm();
    double s = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= 30; ++bt, s *= 0.5) {
      const Eigen::VectorXd xt = out.x + s * step;
      Eigen::VectorXd rt = residual(xt, nullptr, nullptr);
      if (rt.allFinite() && rt.squaredNorm() <= (1.0 - 2e-4 * s) * r2) {
        out.x = xt;
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) {
      // Already within tolerance: the polishing step could not improve.
      if (rnorm < tol) break;
      throw SolverError("arm: line search stalled", ToStd(u), rnorm);
    }
    if (rnorm < tol) polished = true;
    r = residual(out.x, &K, &dc_du);
  }
  out.residual = MaxAbs(r);
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw SolverError("arm: singular stiffness", ToStd(u), out.residual);
  out.dx_du = lu.solve(Eigen::MatrixXd(-dc_du));
  return out;
}

ArmQuasistaticMap::ArmQuasistaticMap(std::shared_ptr<const ArmModel> model,
                                     std::size_t warm_start_capacity)
    : model_(std::move(model)), capacity_(warm_start_capacity) {
  if (!model_) throw InvalidInputError("arm map: null model");
}

MapSample ArmQuasistaticMap::Evaluate(const Eigen::VectorXd& alpha) const {
  Eigen::VectorXd a0, x0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, x] : solved_) {
      const double dist = (a - alpha).squaredNorm();
      if (dist < best) {
        best = dist;
        a0 = a;
        x0 = x;
      }
    }
  }
  if (x0.size() == 0) {
    a0 = Eigen::VectorXd::Zero(alpha.size());
    x0 = model_->RestState();
  }
  // Latent coordinates may leave the tension-only box, so the signed solve is
  // used. On failure the load is applied in increments from the warm start.
  QuasistaticResult r;
  for (int pieces = 1;; pieces *= 2) {
    try {
      Eigen::VectorXd x = x0;
      for (int k = 1; k <= pieces; ++k) {
        const Eigen::VectorXd ak = a0 + (alpha - a0) * (static_cast<double>(k) / pieces);
        r = model_->QuasistaticSolveSigned(ak, x);
        x = r.x;
      }
      break;
    } catch (const SolverError&) {
      if (pieces >= 32) throw;
    }
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    solved_.emplace_back(alpha, r.x);
    if (solved_.size() > capacity_) solved_.pop_front();
  }
  return MapSample{std::move(r.x), std::move(r.dx_du)};
}

ProjectedStepResult ProjectedStep(const ArmModel& model, const LatentState& state,
                                  const Eigen::VectorXd& u, Surrogate& f,
                                  const ProjectedStepOptions& options) {
  const int d = model.num_lines();
  if (state.alpha.size() != d || state.alpha_prev.size() != d || u.size() != d) {
    throw InvalidInputError("projected step: dimension mismatch");
  }
  if (!(options.dt > 0)) throw InvalidInputError("projected step: dt must be positive");
  const double dt = options.dt;
  const double beta = options.damping ? model.config().rayleigh : 0.0;
  const Eigen::VectorXd& M = model.mass();
  const Eigen::VectorXd x_i = f.Query(state.alpha, false).value;
  const Eigen::VectorXd x_prev = f.Query(state.alpha_prev, false).value;
  const Eigen::VectorXd inertia_diag = M / (dt * dt) + beta * M / dt;

  struct Eval {
    MapQuery q;
    Eigen::VectorXd E;  // full-space residual bracket
    Eigen::VectorXd r;  // J^T E
    Eigen::MatrixXd D;  // dr/da
    Eigen::MatrixXd dc_du;
  };
  auto evaluate = [&](const Eigen::VectorXd& a, bool jac) {
    Eval ev;
    ev.q = f.Query(a, jac);
    const Eigen::VectorXd& x = ev.q.value;
    SparseMatrix Kp, Kc;
    ev.E = (M.array() * (x - 2.0 * x_i + x_prev).array()).matrix() / (dt * dt) +
           beta * (M.array() * (x - x_i).array()).matrix() / dt -
           model.InternalForce(x, jac ? &Kp : nullptr) -
           model.ControlForce(x, u, jac ? &Kc : nullptr, jac ? &ev.dc_du : nullptr);
    const Eigen::MatrixXd& J = ev.q.jacobian;
    ev.r = J.transpose() * ev.E;
    if (jac) {
      const Eigen::MatrixXd KJ = (Kp + Kc) * J;
      ev.D = J.transpose() * (inertia_diag.asDiagonal() * J) - J.transpose() * KJ;
      for (int l = 0; l < d; ++l) ev.D.col(l) += ev.q.hessian[l].transpose() * ev.E;
    }
    return ev;
  };

  const double tol = model.config().newton_tol * model.ForceScale();
  Eigen::VectorXd a = 2.0 * state.alpha - state.alpha_prev;
  Eval ev = evaluate(a, true);
  ProjectedStepResult out;
  bool polished = false;
  while (true) {
    const double rnorm = MaxAbs(ev.r);
    if (!std::isfinite(rnorm)) throw SolverError("projected step: non-finite residual", ToStd(a), rnorm);
    if (rnorm < tol && (polished || rnorm < 1e-6 * tol)) break;
    if (out.iterations >= model.config().newton_max_iters) {
      throw SolverError("projected step: Newton did not converge", ToStd(a), rnorm);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ev.D);
    const Eigen::VectorXd step = lu.solve(-ev.r);
    const double r2 = ev.r.squaredNorm();
    double s = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= 30; ++bt, s *= 0.5) {
      const Eigen::VectorXd at = a + s * step;
      const Eval trial = evaluate(at, false);
      if (trial.r.allFinite() && trial.r.squaredNorm() <= (1.0 - 2e-4 * s) * r2) {
        a = at;
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted) {
      if (rnorm < tol) break;
      throw SolverError("projected step: line search stalled", ToStd(a), rnorm);
    }
    if (rnorm < tol) polished = true;
    ev = evaluate(a, true);
  }
  out.alpha = a;
  out.x = ev.q.value;
  out.residual = MaxAbs(ev.r);
  if (options.derivatives) {
    const Eigen::MatrixXd& J = ev.q.jacobian;
    const Eigen::MatrixXd J_i = f.Query(state.alpha, false).jacobian;
    const Eigen::MatrixXd J_prev = f.Query(state.alpha_prev, false).jacobian;
    const Eigen::VectorXd w_i = -2.0 * M / (dt * dt) - beta * M / dt;
    const Eigen::VectorXd w_prev = M / (dt * dt);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ev.D);
    out.d_alpha = -lu.solve(J.transpose() * (w_i.asDiagonal() * J_i));
    out.d_alpha_prev = -lu.solve(J.transpose() * (w_prev.asDiagonal() * J_prev));
    out.d_u = lu.solve(J.transpose() * ev.dc_du);
  }
  return out;
}

}  // namespace hsid
