#include <catch2/catch_amalgamated.hpp>

#include "matcorr/mesh.hpp"
#include "matcorr/meshgen.hpp"
#include "test_util.hpp"

using namespace matcorr;

namespace {

TetMesh unit_tet() {
  TetMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.tets = {{1, 2, 3, 0}};  // vertex 0 as base keeps the volume positive
  m.surface = surface_vertices(m);
  return m;
}

}  // namespace

TEST_CASE("unit tet volume and lumped mass") {
  TetMesh m = unit_tet();
  RestData rest = compute_rest_data(m, 6.0);
  REQUIRE(rest.volume[0] == Catch::Approx(1.0 / 6.0).epsilon(1e-14));
  for (int v = 0; v < 4; ++v)
    REQUIRE(rest.mass[v] == Catch::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("lumped mass conserves total mass") {
  TetMesh m = make_bar(3, 2, 4, 0.1, 730.0);
  RestData rest = compute_rest_data(m, m.density);
  REQUIRE(rest.mass.sum() ==
          Catch::Approx(m.density * rest.total_volume()).epsilon(1e-12));
  // the bar tiles its bounding box exactly
  REQUIRE(rest.total_volume() == Catch::Approx(0.3 * 0.2 * 0.4).epsilon(1e-12));
}

TEST_CASE("B_m matches an independent inversion of the rest shape matrix") {
  std::mt19937_64 rng(42);
  TetMesh m = make_bar(2, 1, 5, 0.07);
  // jitter interior vertices to make the elements irregular
  for (int v = 0; v < m.num_vertices(); ++v)
    m.vertices[v] += 0.01 * testutil::random_vec3(rng);
  RestData rest = compute_rest_data(m, 1000.0);
  for (int e = 0; e < m.num_tets(); ++e) {
    Mat3 Dm = rest_shape_matrix(m, e);
    Mat3 oracle = testutil::adjugate_inverse(Dm);
    REQUIRE((rest.Bm[e] - oracle).norm() <= 1e-12 * oracle.norm());
    REQUIRE((rest.Bm[e] * Dm - Mat3::Identity()).norm() < 1e-12);
  }
}

TEST_CASE("degenerate elements are rejected with the element index") {
  TetMesh m = unit_tet();
  m.vertices[3] = Vec3(0.5, 0.5, 0.0);  // coplanar
  REQUIRE_THROWS_WITH(compute_rest_data(m, 1.0),
                      Catch::Matchers::ContainsSubstring("tet 0"));
  REQUIRE_THROWS(compute_rest_data(unit_tet(), -1.0));
}

TEST_CASE("deformation gradient at rest and under homogeneous scaling") {
  TetMesh m = make_bar(2, 2, 2, 0.1);
  RestData rest = compute_rest_data(m, 1000.0);
  VecX x = m.rest_positions();
  for (int e = 0; e < m.num_tets(); ++e)
    REQUIRE((deformation_gradient(m, rest, e, x) - Mat3::Identity()).norm() < 1e-12);
  VecX xs = 1.7 * x;
  for (int e = 0; e < m.num_tets(); ++e)
    REQUIRE((deformation_gradient(m, rest, e, xs) - 1.7 * Mat3::Identity()).norm() <
            1e-12);
}

TEST_CASE("deformation gradient matches finite differences of the map") {
  // map phi(X) = X + 0.05 sin-ish polynomial warp, applied to vertices;
  // F at the element equals the (constant) gradient of the affine fit,
  // which central differences of the interpolated map recover.
  std::mt19937_64 rng(7);
  TetMesh m = unit_tet();
  RestData rest = compute_rest_data(m, 1.0);
  Mat3 A = Mat3::Identity() + 0.1 * testutil::random_matrix(rng);
  Vec3 b = testutil::random_vec3(rng);
  VecX x(12);
  for (int v = 0; v < 4; ++v) node(x, v) = A * m.vertices[v] + b;
  Mat3 F = deformation_gradient(m, rest, 0, x);

  // finite differences of the affine map at the barycenter
  const double eps = 1e-6;
  Mat3 fd;
  for (int c = 0; c < 3; ++c) {
    Vec3 dp = (A * (Vec3::Unit(c) * eps)) / eps;
    fd.col(c) = dp;
  }
  REQUIRE((F - fd).norm() <= 1e-6 * fd.norm());
  REQUIRE((F - A).norm() <= 1e-10 * A.norm());
}

TEST_CASE("rigid motion yields F = R for every element") {
  std::mt19937_64 rng(3);
  TetMesh m = make_bar(2, 2, 3, 0.05);
  RestData rest = compute_rest_data(m, 1000.0);
  Mat3 R = testutil::random_rotation(rng);
  Vec3 t(0.3, -0.1, 2.0);
  VecX x(3 * m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) node(x, v) = R * m.vertices[v] + t;
  for (int e = 0; e < m.num_tets(); ++e)
    REQUIRE((deformation_gradient(m, rest, e, x) - R).norm() <= 1e-12);
}

TEST_CASE("compute_rest_data is deterministic") {
  TetMesh m = make_bar(3, 3, 3, 0.03);
  RestData a = compute_rest_data(m, 123.0);
  RestData b = compute_rest_data(m, 123.0);
  REQUIRE(a.mass == b.mass);
  for (int e = 0; e < m.num_tets(); ++e) {
    REQUIRE(a.volume[e] == b.volume[e]);
    REQUIRE(a.Bm[e] == b.Bm[e]);
  }
}

TEST_CASE("surface extraction finds boundary vertices of a bar") {
  TetMesh m = make_bar(4, 4, 4, 0.1);
  // 5^3 grid: only the single interior-interior-interior block of 3^3 is inside
  REQUIRE(static_cast<int>(m.surface.size()) == 5 * 5 * 5 - 3 * 3 * 3);
  auto faces = surface_faces(m);
  // oriented outward: signed volume of (face, centroid) tets is negative
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& v : m.vertices) centroid += v;
  centroid /= m.num_vertices();
  for (const auto& f : faces) {
    Vec3 a = m.vertices[f[0]], b = m.vertices[f[1]], c = m.vertices[f[2]];
    Vec3 n = (b - a).cross(c - a);
    REQUIRE(n.dot(a - centroid) > 0);
  }
}

TEST_CASE("index bounds are validated") {
  TetMesh m = unit_tet();
  m.tets.push_back({0, 1, 2, 9});
  REQUIRE_THROWS(compute_rest_data(m, 1.0));
}

TEST_CASE("dof map restricts and expands consistently") {
  TetMesh m = make_bar(2, 2, 4, 0.1);
  m.fixed = bar_face_zmin(m);
  DofMap dofs(m);
  REQUIRE(dofs.num_free() == m.num_vertices() - static_cast<int>(m.fixed.size()));
  std::mt19937_64 rng(11);
  VecX full = testutil::random_vecx(rng, 3 * m.num_vertices());
  VecX r = dofs.restrict_vec(full);
  VecX back = dofs.expand_vec(r, full);
  REQUIRE((back - full).norm() == 0.0);
  // expansion fills fixed slots from `fill`
  VecX zero = VecX::Zero(3 * m.num_vertices());
  VecX e = dofs.expand_vec(r, zero);
  for (int v : m.fixed) REQUIRE(node(e, v).norm() == 0.0);
}
