#pragma once

#include <Eigen/Core>
#include <vector>

#include "lunareg/core/error.hpp"

namespace lunareg {

/// Plane projective transform. Normalized so h33 = 1 when |h33| > 1e-12,
/// otherwise to unit Frobenius norm.
struct Homography {
    Eigen::Matrix3d H = Eigen::Matrix3d::Identity();

    static Homography from_matrix(const Eigen::Matrix3d& m);
    static Homography identity() { return Homography{}; }

    Eigen::Vector2d apply(const Eigen::Vector2d& p) const;
    Homography inverse() const;  ///< throws NonInvertibleHomography

    bool is_invertible(double tol = 1e-12) const;
};

/// Symmetric transfer error sqrt(|H a - b|^2 + |H^-1 b - a|^2).
/// `h_inv` must be the inverse of `h`.
double symmetric_transfer_error(const Homography& h, const Homography& h_inv,
                                const Eigen::Vector2d& a, const Eigen::Vector2d& b);

/// Direct linear transform with Hartley normalization. Requires >= 4 pairs,
/// no 3 collinear points within any minimal sample (area tolerance 1e-9).
Homography dlt_homography(const std::vector<Eigen::Vector2d>& a,
                          const std::vector<Eigen::Vector2d>& b);

}  // namespace lunareg
