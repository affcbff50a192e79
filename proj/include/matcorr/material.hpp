#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>

#include "matcorr/mesh.hpp"
#include "matcorr/types.hpp"

namespace matcorr {

/// Nominal corotated material constants plus integration step.
struct NominalParams {
  double E = 1e5;       // Young's modulus, Pa
  double nu = 0.4;      // Poisson ratio
  double alpha0 = 0.0;  // Rayleigh mass coefficient, 1/s
  double alpha1 = 0.0;  // Rayleigh stiffness coefficient, s
  double h = 1e-3;      // time step, s

  double mu() const { return E / (2.0 * (1.0 + nu)); }
  double zeta() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }

  void validate() const {
    if (!(mu() > 0)) throw std::invalid_argument("mu must be positive");
    if (!(zeta() >= 0) || !(nu >= 0) || !(nu < 0.5))
      throw std::invalid_argument("need 0 <= nu < 0.5");
    if (!(h > 0)) throw std::invalid_argument("time step must be positive");
  }
};

/// Rotation-variant SVD of a deformation gradient: F = U * diag(Fhat) * V^T
/// with det(U) = det(V) = +1. A reflection is folded into the sign of the
/// smallest-magnitude stretch, so at most Fhat(2) can be negative.
struct DecomposedF {
  Mat3 U = Mat3::Identity();
  Mat3 V = Mat3::Identity();
  Vec3 Fhat = Vec3::Ones();

  Mat3 reconstruct() const { return U * Fhat.asDiagonal() * V.transpose(); }
};

inline DecomposedF rotation_variant_svd(const Mat3& F) {
  Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  DecomposedF d;
  d.U = svd.matrixU();
  d.V = svd.matrixV();
  d.Fhat = svd.singularValues();
  const bool flipU = d.U.determinant() < 0;
  const bool flipV = d.V.determinant() < 0;
  if (flipU && flipV) {
    d.U.col(2) *= -1.0;
    d.V.col(2) *= -1.0;
  } else if (flipU) {
    d.U.col(2) *= -1.0;
    d.Fhat(2) *= -1.0;
  } else if (flipV) {
    d.V.col(2) *= -1.0;
    d.Fhat(2) *= -1.0;
  }
  return d;
}

/// Diagonal first Piola-Kirchhoff stress of the corotated model,
/// P(Fhat) = 2 mu (Fhat - 1) + zeta tr(Fhat - 1) 1.
inline Vec3 nominal_diag_stress(const Vec3& Fhat, const NominalParams& p) {
  const Vec3 e = Fhat - Vec3::Ones();
  return 2.0 * p.mu() * e + p.zeta() * e.sum() * Vec3::Ones();
}

inline double corotated_energy_density(const Vec3& Fhat, double mu, double zeta) {
  const Vec3 e = Fhat - Vec3::Ones();
  return mu * e.squaredNorm() + 0.5 * zeta * e.sum() * e.sum();
}

/// Isotropic constitutive model expressed through diagonal stresses in
/// principal-stretch space. `pk1`/`pk1_jacobian` form the differentiable
/// core used for stiffness and damping assembly; `pk1_correction` and
/// `alpha1_correction` are additive terms that only enter force evaluation.
class Material {
 public:
  virtual ~Material() = default;

  virtual Vec3 pk1(int e, const Vec3& Fhat) const = 0;
  virtual Mat3 pk1_jacobian(int e, const Vec3& Fhat) const = 0;
  virtual double psi(int e, const Vec3& Fhat) const {
    (void)e;
    (void)Fhat;
    throw std::logic_error("material has no energy density");
  }

  virtual Vec3 pk1_correction(int, const Vec3&) const { return Vec3::Zero(); }

  virtual double alpha0() const { return 0.0; }
  virtual double alpha1() const { return 0.0; }
  virtual double alpha1_correction(int, const Vec3&) const { return 0.0; }

  Vec3 pk1_total(int e, const Vec3& Fhat) const {
    return pk1(e, Fhat) + pk1_correction(e, Fhat);
  }
  double alpha1_total(int e, const Vec3& Fhat) const {
    return alpha1() + alpha1_correction(e, Fhat);
  }
};

class CorotatedMaterial : public Material {
 public:
  explicit CorotatedMaterial(const NominalParams& p) : params_(p) {
    p.validate();
  }

  Vec3 pk1(int, const Vec3& Fhat) const override {
    return nominal_diag_stress(Fhat, params_);
  }
  Mat3 pk1_jacobian(int, const Vec3&) const override {
    return 2.0 * params_.mu() * Mat3::Identity() +
           params_.zeta() * Mat3::Ones();
  }
  double psi(int, const Vec3& Fhat) const override {
    return corotated_energy_density(Fhat, params_.mu(), params_.zeta());
  }
  double alpha0() const override { return params_.alpha0; }
  double alpha1() const override { return params_.alpha1; }

  const NominalParams& params() const { return params_; }

 private:
  NominalParams params_;
};

inline std::vector<DecomposedF> decompose_all(const TetMesh& mesh,
                                              const RestData& rest,
                                              const VecX& x) {
  std::vector<DecomposedF> out(mesh.num_tets());
#pragma omp parallel for schedule(static)
  for (int e = 0; e < mesh.num_tets(); ++e)
    out[e] = rotation_variant_svd(deformation_gradient(mesh, rest, e, x));
  return out;
}

// ---------------------------------------------------------------------------
// Stress differential in the SVD frame.
//
// dP = U * T(U^T dF V) * V^T, where T maps the diagonal of its argument
// through A = dPhat/dFhat and each off-diagonal pair (ij, ji) through a
// symmetric 2x2 block built from the divided differences
//   beta  = (Phat_i - Phat_j) / (s_i - s_j)
//   gamma = (Phat_i + Phat_j) / (s_i + s_j).
// ---------------------------------------------------------------------------

struct StressDifferential {
  Mat3 A = Mat3::Zero();
  // pair order (0,1), (0,2), (1,2); entries {diag, offdiag} of the 2x2 block
  double pair_diag[3] = {0, 0, 0};
  double pair_off[3] = {0, 0, 0};
  bool rotation_frozen = false;
};

inline StressDifferential stress_differential(const Vec3& s, const Vec3& Phat,
                                              const Mat3& A,
                                              bool rotation_frozen = false) {
  StressDifferential d;
  d.A = A;
  d.rotation_frozen = rotation_frozen;
  if (rotation_frozen) return d;
  static const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  for (int p = 0; p < 3; ++p) {
    const int i = pairs[p][0], j = pairs[p][1];
    double beta;
    if (std::abs(s(i) - s(j)) < 1e-6 * scale)
      beta = A(i, i) - A(i, j);  // divided-difference limit
    else
      beta = (Phat(i) - Phat(j)) / (s(i) - s(j));
    double den = s(i) + s(j);
    const double dmin = 1e-6 * scale;
    if (std::abs(den) < dmin) den = (den >= 0) ? dmin : -dmin;
    const double gamma = (Phat(i) + Phat(j)) / den;
    d.pair_diag[p] = 0.5 * (beta + gamma);
    d.pair_off[p] = 0.5 * (beta - gamma);
  }
  return d;
}

inline Mat3 apply_stress_differential(const StressDifferential& d,
                                      const Mat3& dFt) {
  Mat3 out = Mat3::Zero();
  const Vec3 diag = d.A * dFt.diagonal();
  out.diagonal() = diag;
  if (d.rotation_frozen) return out;
  static const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int p = 0; p < 3; ++p) {
    const int i = pairs[p][0], j = pairs[p][1];
    out(i, j) = d.pair_diag[p] * dFt(i, j) + d.pair_off[p] * dFt(j, i);
    out(j, i) = d.pair_off[p] * dFt(i, j) + d.pair_diag[p] * dFt(j, i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Force and matrix assembly. Internal elastic forces pull toward rest and
// K = df/dx, so K is negative semi-definite at rest; the implicit system
// matrix M - h D - h^2 K stays positive definite.
// ---------------------------------------------------------------------------

/// Per-element world-frame vertex forces for diagonal stress phat; columns
/// are the forces on vertices 0..2 and the fourth closes the sum to zero.
inline Mat3 element_force_blocks(const RestData& rest, int e,
                                 const DecomposedF& d, const Vec3& phat) {
  const Mat3 P = d.U * phat.asDiagonal() * d.V.transpose();
  return -rest.volume[e] * P * rest.Bm[e].transpose();
}

inline VecX elastic_forces(const TetMesh& mesh, const RestData& rest,
                           const std::vector<DecomposedF>& decomps,
                           const Material& mat) {
  VecX f = VecX::Zero(3 * mesh.num_vertices());
  for (int e = 0; e < mesh.num_tets(); ++e) {
    const Mat3 H =
        element_force_blocks(rest, e, decomps[e], mat.pk1_total(e, decomps[e].Fhat));
    const Tet& t = mesh.tets[e];
    node(f, t[0]) += H.col(0);
    node(f, t[1]) += H.col(1);
    node(f, t[2]) += H.col(2);
    node(f, t[3]) -= H.col(0) + H.col(1) + H.col(2);
  }
  return f;
}

inline double total_energy(const TetMesh& mesh, const RestData& rest,
                           const std::vector<DecomposedF>& decomps,
                           const Material& mat) {
  double E = 0;
  for (int e = 0; e < mesh.num_tets(); ++e)
    E += rest.volume[e] * mat.psi(e, decomps[e].Fhat);
  return E;
}

/// Sparse stress-to-force map: f = B phat for the block vector of all
/// element diagonal stresses (3 per element). Rows span all vertices.
inline SpMat assemble_B(const TetMesh& mesh, const RestData& rest,
                        const std::vector<DecomposedF>& decomps) {
  if (static_cast<int>(decomps.size()) != mesh.num_tets())
    throw std::invalid_argument("one decomposition per element required");
  std::vector<Triplet> trips;
  trips.reserve(mesh.num_tets() * 36);
  for (int e = 0; e < mesh.num_tets(); ++e) {
    const DecomposedF& d = decomps[e];
    const double vol = rest.volume[e];
    const Mat3 G = rest.Bm[e] * d.V;
    const Tet& t = mesh.tets[e];
    Mat3 blocks[4];
    for (int i = 0; i < 3; ++i)
      blocks[i] = -vol * d.U * G.row(i).asDiagonal();
    blocks[3] = -(blocks[0] + blocks[1] + blocks[2]);
    for (int i = 0; i < 4; ++i)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          trips.emplace_back(3 * t[i] + r, 3 * e + c, blocks[i](r, c));
  }
  SpMat B(3 * mesh.num_vertices(), 3 * mesh.num_tets());
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

using Mat12 = Eigen::Matrix<double, 12, 12>;

inline Mat12 element_stiffness(const TetMesh& mesh, const RestData& rest, int e,
                               const DecomposedF& d, const Material& mat,
                               bool rotation_frozen = false) {
  (void)mesh;
  const Mat3 A = mat.pk1_jacobian(e, d.Fhat);
  const Vec3 Phat = mat.pk1(e, d.Fhat);
  const StressDifferential diff =
      stress_differential(d.Fhat, Phat, A, rotation_frozen);
  const Mat3& Bm = rest.Bm[e];
  const double vol = rest.volume[e];

  Mat12 K;
  for (int b = 0; b < 4; ++b) {
    Eigen::RowVector3d db;  // dF = e_c * db for unit motion of vertex b
    if (b < 3)
      db = Bm.row(b);
    else
      db = -(Bm.row(0) + Bm.row(1) + Bm.row(2));
    for (int c = 0; c < 3; ++c) {
      Mat3 dF = Mat3::Zero();
      dF.row(c) = db;
      const Mat3 dFt = d.U.transpose() * dF * d.V;
      const Mat3 dPt = apply_stress_differential(diff, dFt);
      const Mat3 dP = d.U * dPt * d.V.transpose();
      const Mat3 dH = -vol * dP * Bm.transpose();
      const Vec3 d3 = -(dH.col(0) + dH.col(1) + dH.col(2));
      K.block<3, 1>(0, 3 * b + c) = dH.col(0);
      K.block<3, 1>(3, 3 * b + c) = dH.col(1);
      K.block<3, 1>(6, 3 * b + c) = dH.col(2);
      K.block<3, 1>(9, 3 * b + c) = d3;
    }
  }
  K = 0.5 * (K + K.transpose()).eval();
  return K;
}

/// Sum of per-element stiffness blocks scaled by `weight(e, Fhat)`.
/// weight = 1 gives the global tangent stiffness K = df_e/dx.
template <class WeightFn>
SpMat weighted_stiffness(const TetMesh& mesh, const RestData& rest,
                         const std::vector<DecomposedF>& decomps,
                         const Material& mat, WeightFn&& weight,
                         bool rotation_frozen = false) {
  const int ne = mesh.num_tets();
  std::vector<Mat12> blocks(ne);
#pragma omp parallel for schedule(static)
  for (int e = 0; e < ne; ++e) {
    const double w = weight(e, decomps[e].Fhat);
    if (w == 0.0) {
      blocks[e].setZero();
      continue;
    }
    blocks[e] = w * element_stiffness(mesh, rest, e, decomps[e], mat, rotation_frozen);
  }
  std::vector<Triplet> trips;
  trips.reserve(ne * 144);
  for (int e = 0; e < ne; ++e) {
    const Tet& t = mesh.tets[e];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            trips.emplace_back(3 * t[a] + r, 3 * t[b] + c,
                               blocks[e](3 * a + r, 3 * b + c));
  }
  SpMat K(3 * mesh.num_vertices(), 3 * mesh.num_vertices());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

inline SpMat stiffness_matrix(const TetMesh& mesh, const RestData& rest,
                              const std::vector<DecomposedF>& decomps,
                              const Material& mat,
                              bool rotation_frozen = false) {
  return weighted_stiffness(mesh, rest, decomps, mat,
                            [](int, const Vec3&) { return 1.0; },
                            rotation_frozen);
}

inline SpMat stiffness_matrix(const TetMesh& mesh, const RestData& rest,
                              const VecX& positions, const NominalParams& p) {
  CorotatedMaterial mat(p);
  return stiffness_matrix(mesh, rest, decompose_all(mesh, rest, positions), mat);
}

/// Diagonal 3N x 3N mass matrix from the lumped vertex masses.
inline SpMat mass_matrix(const RestData& rest) {
  const int n = static_cast<int>(rest.mass.size());
  SpMat M(3 * n, 3 * n);
  M.reserve(Eigen::VectorXi::Constant(3 * n, 1));
  for (int v = 0; v < n; ++v)
    for (int c = 0; c < 3; ++c) M.insert(3 * v + c, 3 * v + c) = rest.mass[v];
  M.makeCompressed();
  return M;
}

/// Rayleigh damping D = -alpha0 M + alpha1 K. The mass term carries a
/// negative sign so that f_d = D xdot opposes the velocity (K is negative
/// semi-definite at rest).
inline SpMat damping_matrix(const SpMat& M, const SpMat& K,
                            const NominalParams& p) {
  return -p.alpha0 * M + p.alpha1 * K;
}

}  // namespace matcorr
