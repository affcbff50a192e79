#pragma once

#include <cmath>
#include <map>

#include "matcorr/mesh.hpp"

namespace matcorr {

/// Structured bar of nx*ny*nz cubes (spacing dx), five tets per cube with
/// parity flip so shared faces conform. Used by the experiment drivers.
inline TetMesh make_bar(int nx, int ny, int nz, double dx,
                        double density = 1000.0) {
  TetMesh mesh;
  mesh.density = density;
  const int sx = nx + 1, sy = ny + 1, sz = nz + 1;
  auto vid = [&](int i, int j, int k) { return (k * sy + j) * sx + i; };
  mesh.vertices.resize(sx * sy * sz);
  for (int k = 0; k < sz; ++k)
    for (int j = 0; j < sy; ++j)
      for (int i = 0; i < sx; ++i)
        mesh.vertices[vid(i, j, k)] = Vec3(i * dx, j * dx, k * dx);

  // corner-local tets; mirrored in x for odd cubes
  static const int pat[5][4][3] = {
      {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
      {{1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {1, 1, 1}},
      {{1, 0, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}},
      {{0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {0, 1, 1}},
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}}};
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const bool odd = (i + j + k) % 2 != 0;
        for (const auto& t : pat) {
          Tet tet;
          for (int v = 0; v < 4; ++v) {
            int di = odd ? 1 - t[v][0] : t[v][0];
            tet[v] = vid(i + di, j + t[v][1], k + t[v][2]);
          }
          if (odd) std::swap(tet[0], tet[1]);  // restore orientation
          mesh.tets.push_back(tet);
        }
      }
  mesh.surface = surface_vertices(mesh);
  return mesh;
}

/// Vertices of the bar's z=0 face, the usual clamped end.
inline std::vector<int> bar_face_zmin(const TetMesh& mesh, double tol = 1e-12) {
  std::vector<int> out;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.vertices[v].z() < tol) out.push_back(v);
  return out;
}

/// Solid ball: icosphere surface fanned to a center vertex. Coarse FEM
/// quality, fine for scan and correspondence tests.
inline TetMesh make_ball(int subdiv, double radius, double density = 1000.0) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& v : verts) v.normalize();

  for (int s = 0; s < subdiv; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      int id = static_cast<int>(verts.size());
      verts.push_back((verts[a] + verts[b]).normalized());
      midpoint[key] = id;
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& f : faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TetMesh mesh;
  mesh.density = density;
  for (const Vec3& v : verts) mesh.vertices.push_back(radius * v);
  const int center = mesh.num_vertices();
  mesh.vertices.push_back(Vec3::Zero());
  for (const auto& f : faces) mesh.tets.push_back({f[0], f[1], f[2], center});
  mesh.surface = surface_vertices(mesh);
  return mesh;
}

}  // namespace matcorr
