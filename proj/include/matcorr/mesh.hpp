#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "matcorr/types.hpp"

namespace matcorr {

/// Tetrahedral mesh in its rest configuration. Vertices listed in `fixed`
/// are rigidly attached to the world and removed from all solved systems.
struct TetMesh {
  std::vector<Vec3> vertices;
  std::vector<Tet> tets;
  std::vector<int> fixed;    // sorted, unique
  std::vector<int> surface;  // sorted, unique; boundary vertices
  double density = 1000.0;   // kg/m^3

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_tets() const { return static_cast<int>(tets.size()); }

  bool is_fixed(int v) const {
    return std::binary_search(fixed.begin(), fixed.end(), v);
  }

  VecX rest_positions() const {
    VecX x(3 * num_vertices());
    for (int i = 0; i < num_vertices(); ++i) node(x, i) = vertices[i];
    return x;
  }

  Eigen::AlignedBox3d bounding_box() const {
    Eigen::AlignedBox3d box;
    for (const Vec3& v : vertices) box.extend(v);
    return box;
  }
};

/// Boundary faces (appear in exactly one tet), oriented outward.
inline std::vector<std::array<int, 3>> surface_faces(const TetMesh& mesh) {
  // face -> (count, oriented face)
  std::map<std::array<int, 3>, std::pair<int, std::array<int, 3>>> faces;
  // local faces wound so the outward normal points away from the 4th vertex
  static const int local[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  for (const Tet& t : mesh.tets) {
    for (const auto& f : local) {
      std::array<int, 3> tri = {t[f[0]], t[f[1]], t[f[2]]};
      std::array<int, 3> key = tri;
      std::sort(key.begin(), key.end());
      auto it = faces.find(key);
      if (it == faces.end())
        faces.emplace(key, std::make_pair(1, tri));
      else
        it->second.first++;
    }
  }
  std::vector<std::array<int, 3>> out;
  for (const auto& [key, cf] : faces)
    if (cf.first == 1) out.push_back(cf.second);
  return out;
}

inline std::vector<int> surface_vertices(const TetMesh& mesh) {
  std::set<int> s;
  for (const auto& f : surface_faces(mesh)) s.insert(f.begin(), f.end());
  return {s.begin(), s.end()};
}

inline void validate(const TetMesh& mesh) {
  const int n = mesh.num_vertices();
  if (n == 0) throw std::invalid_argument("mesh has no vertices");
  for (const Tet& t : mesh.tets)
    for (int v : t)
      if (v < 0 || v >= n) throw std::invalid_argument("tet index out of range");
  for (int v : mesh.fixed)
    if (v < 0 || v >= n) throw std::invalid_argument("fixed index out of range");
  for (int v : mesh.surface)
    if (v < 0 || v >= n) throw std::invalid_argument("surface index out of range");
}

/// Precomputed per-element rest quantities and the lumped mass vector.
struct RestData {
  std::vector<Mat3> Bm;          // inverse material-space shape matrix
  std::vector<double> volume;    // rest volume, m^3
  VecX mass;                     // lumped vertex masses, kg (size = #vertices)

  double total_volume() const {
    double s = 0;
    for (double v : volume) s += v;
    return s;
  }
};

/// Rest shape matrix D_m with columns (v0-v3, v1-v3, v2-v3).
inline Mat3 rest_shape_matrix(const TetMesh& mesh, int e) {
  const Tet& t = mesh.tets[e];
  Mat3 Dm;
  for (int c = 0; c < 3; ++c) Dm.col(c) = mesh.vertices[t[c]] - mesh.vertices[t[3]];
  return Dm;
}

/// Deformed shape matrix D_s from a flat position vector.
inline Mat3 deformed_shape_matrix(const TetMesh& mesh, int e, const VecX& x) {
  const Tet& t = mesh.tets[e];
  Mat3 Ds;
  for (int c = 0; c < 3; ++c) Ds.col(c) = node(x, t[c]) - node(x, t[3]);
  return Ds;
}

/// Inverts the rest shape matrices and lumps element masses onto vertices.
/// Rejects degenerate elements (volume below 1e-12 of the bounding-box volume).
inline RestData compute_rest_data(const TetMesh& mesh, double density) {
  if (density <= 0) throw std::invalid_argument("density must be positive");
  validate(mesh);

  RestData rest;
  const int ne = mesh.num_tets();
  rest.Bm.resize(ne);
  rest.volume.resize(ne);
  rest.mass = VecX::Zero(mesh.num_vertices());

  const Eigen::AlignedBox3d box = mesh.bounding_box();
  const double eps_vol = 1e-12 * std::max(box.volume(), 1e-300);

  for (int e = 0; e < ne; ++e) {
    const Mat3 Dm = rest_shape_matrix(mesh, e);
    const double vol = Dm.determinant() / 6.0;
    if (!(vol > eps_vol))
      throw std::invalid_argument("degenerate tet " + std::to_string(e) +
                                  " (volume " + std::to_string(vol) + ")");
    rest.Bm[e] = Dm.inverse();
    rest.volume[e] = vol;
    const double mv = density * vol / 4.0;
    for (int v : mesh.tets[e]) rest.mass[v] += mv;
  }
  return rest;
}

/// F = D_s * B_m for one element.
inline Mat3 deformation_gradient(const TetMesh& mesh, const RestData& rest,
                                 int e, const VecX& x) {
  return deformed_shape_matrix(mesh, e, x) * rest.Bm[e];
}

/// Maps the full vertex set onto the free (unfixed) subset and back.
struct DofMap {
  std::vector<int> free_of_vertex;  // -1 for fixed
  std::vector<int> vertex_of_free;

  DofMap() = default;
  explicit DofMap(const TetMesh& mesh) {
    const int n = mesh.num_vertices();
    free_of_vertex.assign(n, -1);
    for (int v = 0; v < n; ++v) {
      if (!mesh.is_fixed(v)) {
        free_of_vertex[v] = static_cast<int>(vertex_of_free.size());
        vertex_of_free.push_back(v);
      }
    }
  }

  int num_free() const { return static_cast<int>(vertex_of_free.size()); }
  int num_vertices() const { return static_cast<int>(free_of_vertex.size()); }

  VecX restrict_vec(const VecX& full) const {
    VecX r(3 * num_free());
    for (int f = 0; f < num_free(); ++f)
      r.segment<3>(3 * f) = full.segment<3>(3 * vertex_of_free[f]);
    return r;
  }

  /// Scatters a free vector into a full one; fixed entries come from `fill`.
  VecX expand_vec(const VecX& free, const VecX& fill) const {
    VecX full = fill;
    for (int f = 0; f < num_free(); ++f)
      full.segment<3>(3 * vertex_of_free[f]) = free.segment<3>(3 * f);
    return full;
  }

  SpMat restrict_matrix(const SpMat& A) const {
    std::vector<Triplet> trips;
    trips.reserve(A.nonZeros());
    for (int k = 0; k < A.outerSize(); ++k) {
      const int cv = k / 3, cc = k % 3;
      const int cf = free_of_vertex[cv];
      if (cf < 0) continue;
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        const int rv = static_cast<int>(it.row()) / 3, rc = static_cast<int>(it.row()) % 3;
        const int rf = free_of_vertex[rv];
        if (rf < 0) continue;
        trips.emplace_back(3 * rf + rc, 3 * cf + cc, it.value());
      }
    }
    SpMat R(3 * num_free(), 3 * num_free());
    R.setFromTriplets(trips.begin(), trips.end());
    return R;
  }
};

}  // namespace matcorr
