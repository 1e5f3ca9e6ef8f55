#pragma once

#include <complex>

#include <Eigen/Dense>

namespace indefsl {

using cplx = std::complex<double>;

using Row4 = Eigen::Matrix<cplx, 1, 4>;
using Col4 = Eigen::Matrix<cplx, 4, 1>;
using Row2 = Eigen::Matrix<cplx, 1, 2>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Mat42 = Eigen::Matrix<cplx, 4, 2>;
using Mat2 = Eigen::Matrix<cplx, 2, 2>;

/// Which side of a point a half-neighborhood (or one-sided limit) lies on.
enum class Side { left, right };

inline const char* to_string(Side s) noexcept { return s == Side::left ? "left" : "right"; }

}  // namespace indefsl
