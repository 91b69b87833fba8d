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

#ifndef HSID_HERMITE_H_
#define HSID_HERMITE_H_

#include <span>

#include <Eigen/Dense>

#include "hsid/surrogate.h"

namespace hsid {

// Tensor-product cubic Hermite interpolation over one cell of side `h`.
//
// `corners` holds the 2^d corner samples indexed by bitmask (bit k set means
// the upper end in dimension k). `local` is the query position scaled to
// [0,1]^d. Values and first derivatives at the corners are reproduced
// exactly. Cross-derivative (twist) data for each pair of dimensions is not
// stored; it is reconstructed per cell edge from the corner Jacobians and
// blended rationally between the two adjacent faces, so the result stays C1
// across cell faces and reproduces bilinear cross terms. Higher twists are
// zero.
//
// Jacobian and (optionally) second derivatives are analytic derivatives of
// the interpolant with respect to the unscaled coordinates.
MapQuery InterpolateCell(std::span<const MapSample* const> corners,
                         const Eigen::VectorXd& local, double h,
                         bool with_hessian);

}  // namespace hsid

#endif  // HSID_HERMITE_H_
