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

#include "hsid/arm_mesh.h"

#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "hsid/error.h"

namespace hsid {

ArmMesh MakeArmMesh(const ArmMeshOptions& o) {
  if (o.columns < 2 || o.columns % 2 != 0 || o.rows < 1 || o.band_rows < 1) {
    throw ModelError("arm mesh: columns must be even and >= 2, rows >= 1");
  }
  const int nx = o.columns, ny = o.rows;
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  ArmMesh mesh;
  mesh.rest.resize(2, (nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.rest.col(id(i, j)) << -0.5 * o.width + o.width * i / nx, -o.length * j / ny;
    }
  }
  for (int j = 0; j < ny; ++j) {
    const int mat = (j / o.band_rows) % 2;
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i, j + 1), d = id(i + 1, j + 1);
      // y decreases with j, so (a, c, b) is counter-clockwise. The diagonal
      // flips at the center line to keep the mesh mirror symmetric.
      if (i < nx / 2) {
        mesh.triangles.push_back({a, c, d});
        mesh.triangles.push_back({a, d, b});
      } else {
        mesh.triangles.push_back({a, c, b});
        mesh.triangles.push_back({b, c, d});
      }
      mesh.material.push_back(mat);
      mesh.material.push_back(mat);
    }
  }
  for (int i = 0; i <= nx; ++i) mesh.fixed.push_back(id(i, 0));
  LineActuator left, right;
  for (int j = 0; j <= ny; ++j) {
    left.routing.push_back(id(0, j));
    right.routing.push_back(id(nx, j));
  }
  mesh.lines = {left, right};
  mesh.tip = id(nx / 2, ny);
  ValidateArmMesh(mesh);
  return mesh;
}

void ValidateArmMesh(const ArmMesh& mesh) {
  const int nv = mesh.num_vertices();
  if (nv == 0 || mesh.triangles.empty()) throw ModelError("arm mesh: empty");
  if (mesh.material.size() != mesh.triangles.size()) {
    throw ModelError("arm mesh: one material id per triangle required");
  }
  std::set<int> materials;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw ModelError("arm mesh: triangle index out of range");
    }
    const Eigen::Vector2d e1 = mesh.rest.col(tri[1]) - mesh.rest.col(tri[0]);
    const Eigen::Vector2d e2 = mesh.rest.col(tri[2]) - mesh.rest.col(tri[0]);
    const double area2 = e1.x() * e2.y() - e1.y() * e2.x();
    if (!(area2 > 1e-14)) {
      throw ModelError("arm mesh: triangle " + std::to_string(t) +
                       " is degenerate or clockwise");
    }
    if (mesh.material[t] != 0 && mesh.material[t] != 1) {
      throw ModelError("arm mesh: material id must be 0 or 1");
    }
    materials.insert(mesh.material[t]);
  }
  if (materials.size() != 2) throw ModelError("arm mesh: both materials must be present");
  if (mesh.fixed.empty()) throw ModelError("arm mesh: no fixed vertices");
  for (int v : mesh.fixed) {
    if (v < 0 || v >= nv) throw ModelError("arm mesh: fixed index out of range");
  }
  if (mesh.lines.empty()) throw ModelError("arm mesh: no line actuators");
  for (const auto& line : mesh.lines) {
    if (line.routing.size() < 2) throw ModelError("arm mesh: line needs at least 2 vertices");
    std::set<int> seen;
    for (int v : line.routing) {
      if (v < 0 || v >= nv) throw ModelError("arm mesh: line index out of range");
      if (!seen.insert(v).second) throw ModelError("arm mesh: line routing repeats a vertex");
    }
  }
  if (mesh.tip < 0 || mesh.tip >= nv) throw ModelError("arm mesh: tip index out of range");
}

ArmMesh ReadArmMesh(std::istream& in) {
  std::vector<Eigen::Vector2d> verts;
  ArmMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    auto bad = [&] { return ModelError("arm mesh: malformed line " + std::to_string(lineno)); };
    if (tag == "v") {
      double x, y;
      if (!(ss >> x >> y)) throw bad();
      verts.emplace_back(x, y);
    } else if (tag == "t") {
      std::array<int, 3> tri;
      int m;
      if (!(ss >> tri[0] >> tri[1] >> tri[2] >> m)) throw bad();
      mesh.triangles.push_back(tri);
      mesh.material.push_back(m);
    } else if (tag == "f") {
      int v;
      if (!(ss >> v)) throw bad();
      mesh.fixed.push_back(v);
    } else if (tag == "l") {
      LineActuator act;
      int v;
      while (ss >> v) act.routing.push_back(v);
      if (!ss.eof()) throw bad();
      mesh.lines.push_back(std::move(act));
    } else if (tag == "tip") {
      if (!(ss >> mesh.tip)) throw bad();
    } else {
      throw ModelError("arm mesh: unknown record '" + tag + "' on line " +
                       std::to_string(lineno));
    }
    std::string extra;
    if (tag != "l" && (ss >> extra)) throw bad();
  }
  mesh.rest.resize(2, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t i = 0; i < verts.size(); ++i) mesh.rest.col(i) = verts[i];
  if (mesh.tip < 0 && !mesh.lines.empty()) mesh.tip = mesh.lines.front().routing.back();
  ValidateArmMesh(mesh);
  return mesh;
}

void WriteArmMesh(const ArmMesh& mesh, std::ostream& out) {
  out.precision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    out << "v " << mesh.rest(0, v) << ' ' << mesh.rest(1, v) << '\n';
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    out << "t " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << mesh.material[t] << '\n';
  }
  for (int v : mesh.fixed) out << "f " << v << '\n';
  for (const auto& line : mesh.lines) {
    out << 'l';
    for (int v : line.routing) out << ' ' << v;
    out << '\n';
  }
  out << "tip " << mesh.tip << '\n';
}

}  // namespace hsid
