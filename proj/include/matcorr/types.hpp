#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <vector>

namespace matcorr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

using Tet = std::array<int, 4>;

inline Eigen::Map<const Vec3> node(const VecX& x, int i) {
  return Eigen::Map<const Vec3>(x.data() + 3 * i);
}
inline Eigen::Map<Vec3> node(VecX& x, int i) {
  return Eigen::Map<Vec3>(x.data() + 3 * i);
}

}  // namespace matcorr
