#include "lunareg/matching/homography.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace lunareg {

Homography Homography::from_matrix(const Eigen::Matrix3d& m) {
    Homography h;
    if (std::abs(m(2, 2)) > 1e-12)
        h.H = m / m(2, 2);
    else
        h.H = m / m.norm();
    return h;
}

Eigen::Vector2d Homography::apply(const Eigen::Vector2d& p) const {
    const Eigen::Vector3d q = H * p.homogeneous();
    if (std::abs(q[2]) < 1e-14)
        throw NonInvertibleHomography();
    return q.hnormalized();
}

bool Homography::is_invertible(double tol) const {
    return std::abs(H.determinant()) > tol;
}

Homography Homography::inverse() const {
    if (!is_invertible())
        throw NonInvertibleHomography();
    return from_matrix(H.inverse());
}

double symmetric_transfer_error(const Homography& h, const Homography& h_inv,
                                const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const double fwd = (h.apply(a) - b).squaredNorm();
    const double bwd = (h_inv.apply(b) - a).squaredNorm();
    return std::sqrt(fwd + bwd);
}

namespace {

/// Twice the signed triangle area.
double triangle_area2(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                      const Eigen::Vector2d& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
}

/// Similarity bringing the centroid to the origin and the mean distance to
/// sqrt(2). A coincident point set has no valid scaling.
Eigen::Matrix3d hartley_transform(const std::vector<Eigen::Vector2d>& pts) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts)
        centroid += p;
    centroid /= static_cast<double>(pts.size());

    double mean_dist = 0.0;
    for (const auto& p : pts)
        mean_dist += (p - centroid).norm();
    mean_dist /= static_cast<double>(pts.size());
    if (mean_dist < 1e-12)
        throw DegenerateConfiguration();

    const double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
    t(0, 0) = s;
    t(1, 1) = s;
    t(0, 2) = -s * centroid.x();
    t(1, 2) = -s * centroid.y();
    return t;
}

}  // namespace

Homography dlt_homography(const std::vector<Eigen::Vector2d>& a,
                          const std::vector<Eigen::Vector2d>& b) {
    const int n = static_cast<int>(a.size());
    if (n != static_cast<int>(b.size()))
        throw DimensionMismatch("point lists differ in length");
    if (n < 4)
        throw InsufficientPoints();

    // For the minimal case every triple matters; larger sets only need some
    // non-collinear triple, which the conditioning check below rejects anyway.
    if (n == 4) {
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                for (int k = j + 1; k < 4; ++k)
                    if (std::abs(triangle_area2(a[i], a[j], a[k])) <= 2e-9 ||
                        std::abs(triangle_area2(b[i], b[j], b[k])) <= 2e-9)
                        throw DegenerateConfiguration();
    }

    const Eigen::Matrix3d ta = hartley_transform(a);
    const Eigen::Matrix3d tb = hartley_transform(b);

    Eigen::MatrixXd m(2 * n, 9);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d p = ta * a[i].homogeneous();
        const Eigen::Vector3d q = tb * b[i].homogeneous();
        const double x = p.x() / p.z(), y = p.y() / p.z();
        const double u = q.x() / q.z(), v = q.y() / q.z();
        m.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        m.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // Rank deficiency beyond the 1-D null space means the configuration does
    // not determine a homography.
    if (sv[0] < 1e-15 || sv[7] / sv[0] < 1e-12)
        throw DegenerateConfiguration();

    Eigen::Matrix3d hn;
    const Eigen::VectorXd h = svd.matrixV().col(8);
    hn << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];

    const Eigen::Matrix3d denorm = tb.inverse() * hn * ta;
    Homography result = Homography::from_matrix(denorm);
    if (!result.is_invertible())
        throw DegenerateConfiguration();
    return result;
}

}  // namespace lunareg
