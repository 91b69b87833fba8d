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

#ifndef HSID_ARM_MESH_H_
#define HSID_ARM_MESH_H_

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace hsid {

// Ordered vertex chain from the base to the tip along which a pulling line
// is routed.
struct LineActuator {
  std::vector<int> routing;
};

// Planar triangle mesh of the elastic arm.
struct ArmMesh {
  Eigen::Matrix2Xd rest;                     // rest vertex positions (m)
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> material;                 // per triangle, 0 = stiff, 1 = soft
  std::vector<int> fixed;                    // base attachment vertices
  std::vector<LineActuator> lines;
  int tip = -1;                              // vertex tracked by the planner

  int num_vertices() const { return static_cast<int>(rest.cols()); }
};

struct ArmMeshOptions {
  double width = 0.08;
  double length = 0.6;
  int columns = 4;   // must be even so the mesh is mirror symmetric
  int rows = 30;
  int band_rows = 3; // material alternates every `band_rows` rows
};

// Structured arm hanging from a fixed top edge (y = 0) towards -y, mirror
// symmetric about x = 0, with one pulling line on each side edge. The
// default has 150 free vertices.
ArmMesh MakeArmMesh(const ArmMeshOptions& options = {});

// Plain-text mesh format, one record per line, '#' starts a comment:
//   v x y              vertex
//   t i j k m          triangle with material id m (0/1)
//   f i                fixed vertex
//   l i1 i2 ... ik     line actuator routed base -> tip
//   tip i              tracked vertex (optional; defaults to the last vertex
//                      of the first line)
// Throws ModelError on malformed input or violated mesh invariants.
ArmMesh ReadArmMesh(std::istream& in);
void WriteArmMesh(const ArmMesh& mesh, std::ostream& out);

// Checks orientation, element areas, index ranges, and actuator routing.
void ValidateArmMesh(const ArmMesh& mesh);

}  // namespace hsid

#endif  // HSID_ARM_MESH_H_
