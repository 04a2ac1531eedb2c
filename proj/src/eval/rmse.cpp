#include "lunareg/eval/rmse.hpp"

#include <cmath>

namespace lunareg {

std::pair<double, double> rmse_xy(const ControlPointSet& points) {
    if (points.reference.size() != points.registered.size())
        throw DimensionMismatch("control point lists differ in length");
    const int n = points.size();
    if (n == 0)
        throw EmptyPointSet();

    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d d = points.registered[i] - points.reference[i];
        sx += d.x() * d.x();
        sy += d.y() * d.y();
    }
    return {std::sqrt(sx / n), std::sqrt(sy / n)};
}

}  // namespace lunareg
