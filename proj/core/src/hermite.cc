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

#include "hsid/hermite.h"

#include <vector>

#include "hsid/error.h"

namespace hsid {
namespace {

// A univariate factor with its first and second derivative.
struct Factor {
  double v, d, dd;
};

// Cubic Hermite basis on [0,1]. `upper` selects the corner at t = 1.
Factor ValueBasis(bool upper, double t) {
  if (!upper) return {2 * t * t * t - 3 * t * t + 1, 6 * t * t - 6 * t, 12 * t - 6};
  return {-2 * t * t * t + 3 * t * t, -6 * t * t + 6 * t, -12 * t + 6};
}

Factor SlopeBasis(bool upper, double t) {
  if (!upper) return {t * t * t - 2 * t * t + t, 3 * t * t - 4 * t + 1, 6 * t - 4};
  return {t * t * t - t * t, 3 * t * t - 2 * t, 6 * t - 2};
}

// Scalar weight of one term with gradient and Hessian in local coordinates.
struct Weight {
  double w;
  Eigen::VectorXd g;
  Eigen::MatrixXd hess;
};

Weight Product(const std::vector<Factor>& f, double scale, bool with_hessian) {
  const int d = static_cast<int>(f.size());
  Weight out{scale, Eigen::VectorXd::Constant(d, scale), {}};
  for (int k = 0; k < d; ++k) out.w *= f[k].v;
  for (int a = 0; a < d; ++a) {
    for (int k = 0; k < d; ++k) out.g[a] *= (k == a ? f[k].d : f[k].v);
  }
  if (with_hessian) {
    out.hess = Eigen::MatrixXd::Constant(d, d, scale);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        for (int k = 0; k < d; ++k) {
          double fk = f[k].v;
          if (a == b && k == a) fk = f[k].dd;
          else if (k == a || k == b) fk = f[k].d;
          out.hess(a, b) *= fk;
        }
      }
    }
  }
  return out;
}

class Accumulator {
 public:
  Accumulator(int m, int d, bool with_hessian) : with_hessian_(with_hessian) {
    q_.value = Eigen::VectorXd::Zero(m);
    q_.jacobian = Eigen::MatrixXd::Zero(m, d);
    if (with_hessian) q_.hessian.assign(d, Eigen::MatrixXd::Zero(m, d));
  }

  void Add(const Weight& w, const Eigen::Ref<const Eigen::VectorXd>& data) {
    q_.value.noalias() += w.w * data;
    const auto d = w.g.size();
    for (Eigen::Index a = 0; a < d; ++a) {
      if (w.g[a] != 0.0) q_.jacobian.col(a).noalias() += w.g[a] * data;
    }
    if (!with_hessian_) return;
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) {
        if (w.hess(a, b) != 0.0) q_.hessian[a].col(b).noalias() += w.hess(a, b) * data;
      }
    }
  }

  MapQuery Finish(double h) {
    q_.jacobian /= h;
    for (auto& m : q_.hessian) m /= h * h;
    return std::move(q_);
  }

 private:
  bool with_hessian_;
  MapQuery q_;
};

// Multiplies a product weight by the rational blend `ratio` = dist_a /
// (dist_a + dist_b), where dist_x is the distance of the query from the face
// through the corner normal to dimension x.
Weight Blend(const Weight& p, int dim_a, int dim_b, double dist_a, double dist_b,
             double sign_a, double sign_b, bool with_hessian) {
  const Eigen::Index d = p.g.size();
  const double s = dist_a + dist_b;
  double r = 0.5;
  Eigen::VectorXd rg = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd rh = Eigen::MatrixXd::Zero(d, d);
  if (s > 1e-300) {
    r = dist_a / s;
    const double s2 = s * s, s3 = s2 * s;
    rg[dim_a] = sign_a * dist_b / s2;
    rg[dim_b] = -sign_b * dist_a / s2;
    rh(dim_a, dim_a) = -2.0 * dist_b / s3;
    rh(dim_b, dim_b) = 2.0 * dist_a / s3;
    rh(dim_a, dim_b) = rh(dim_b, dim_a) = sign_a * sign_b * (dist_a - dist_b) / s3;
  }
  Weight out{p.w * r, r * p.g + p.w * rg, {}};
  if (with_hessian) {
    out.hess = r * p.hess + p.g * rg.transpose() + rg * p.g.transpose() + p.w * rh;
  }
  return out;
}

}  // namespace

MapQuery InterpolateCell(std::span<const MapSample* const> corners,
                         const Eigen::VectorXd& local, double h,
                         bool with_hessian) {
  const int d = static_cast<int>(local.size());
  const std::size_t n = std::size_t{1} << d;
  if (corners.size() != n) throw InvalidInputError("InterpolateCell: need 2^d corners");
  const int m = static_cast<int>(corners[0]->value.size());
  Accumulator acc(m, d, with_hessian);
  std::vector<Factor> f(d);

  for (std::size_t c = 0; c < n; ++c) {
    const MapSample& s = *corners[c];
    auto upper = [c](int k) { return ((c >> k) & 1U) != 0; };

    for (int k = 0; k < d; ++k) f[k] = ValueBasis(upper(k), local[k]);
    acc.Add(Product(f, 1.0, with_hessian), s.value);

    for (int j = 0; j < d; ++j) {
      f[j] = SlopeBasis(upper(j), local[j]);
      acc.Add(Product(f, h, with_hessian), s.jacobian.col(j));
      f[j] = ValueBasis(upper(j), local[j]);
    }

    for (int j = 0; j < d; ++j) {
      for (int k = j + 1; k < d; ++k) {
        // Normal derivative across the j-face, differenced along k, and the
        // other way round. Each is shared by every cell touching that edge.
        const std::size_t jlo = c & ~(std::size_t{1} << j), jhi = c | (std::size_t{1} << j);
        const std::size_t klo = c & ~(std::size_t{1} << k), khi = c | (std::size_t{1} << k);
        const Eigen::VectorXd along_k =
            (corners[khi]->jacobian.col(j) - corners[klo]->jacobian.col(j)) / h;
        const Eigen::VectorXd along_j =
            (corners[jhi]->jacobian.col(k) - corners[jlo]->jacobian.col(k)) / h;

        f[j] = SlopeBasis(upper(j), local[j]);
        f[k] = SlopeBasis(upper(k), local[k]);
        const Weight p = Product(f, h * h, with_hessian);
        f[j] = ValueBasis(upper(j), local[j]);
        f[k] = ValueBasis(upper(k), local[k]);

        const double dist_j = upper(j) ? 1.0 - local[j] : local[j];
        const double dist_k = upper(k) ? 1.0 - local[k] : local[k];
        const double sign_j = upper(j) ? -1.0 : 1.0;
        const double sign_k = upper(k) ? -1.0 : 1.0;
        // On the j-face (dist_j = 0) the twist equals along_k, on the k-face
        // it equals along_j.
        acc.Add(Blend(p, j, k, dist_j, dist_k, sign_j, sign_k, with_hessian), along_j);
        acc.Add(Blend(p, k, j, dist_k, dist_j, sign_k, sign_j, with_hessian), along_k);
      }
    }
  }
  return acc.Finish(h);
}

}  // namespace hsid
