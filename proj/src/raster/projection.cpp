#include "lunareg/raster/projection.hpp"

#include <cmath>

namespace lunareg {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kRadToDeg = 180.0 / kPi;
}  // namespace

std::pair<double, double> project_forward(Projection p, double radius_m,
                                          double std_parallel_deg, LonLat ll) {
    switch (p) {
        case Projection::Equirectangular: {
            const double c = std::cos(std_parallel_deg * kDegToRad);
            return {radius_m * ll.lon * c, radius_m * ll.lat};
        }
        case Projection::PolarStereoNorth: {
            const double rho = 2.0 * radius_m * std::tan(kPi / 4.0 - ll.lat / 2.0);
            return {rho * std::sin(ll.lon), -rho * std::cos(ll.lon)};
        }
        case Projection::PolarStereoSouth: {
            const double rho = 2.0 * radius_m * std::tan(kPi / 4.0 + ll.lat / 2.0);
            return {rho * std::sin(ll.lon), rho * std::cos(ll.lon)};
        }
        case Projection::Geographic:
            return {ll.lon * kRadToDeg, ll.lat * kRadToDeg};
    }
    return {0.0, 0.0};
}

LonLat project_inverse(Projection p, double radius_m, double std_parallel_deg,
                       double x, double y) {
    switch (p) {
        case Projection::Equirectangular: {
            const double c = std::cos(std_parallel_deg * kDegToRad);
            return {x / (radius_m * c), y / radius_m};
        }
        case Projection::PolarStereoNorth: {
            const double rho = std::hypot(x, y);
            const double lat = kPi / 2.0 - 2.0 * std::atan(rho / (2.0 * radius_m));
            const double lon = (rho == 0.0) ? 0.0 : std::atan2(x, -y);
            return {lon, lat};
        }
        case Projection::PolarStereoSouth: {
            const double rho = std::hypot(x, y);
            const double lat = -kPi / 2.0 + 2.0 * std::atan(rho / (2.0 * radius_m));
            const double lon = (rho == 0.0) ? 0.0 : std::atan2(x, y);
            return {lon, lat};
        }
        case Projection::Geographic:
            return {x * kDegToRad, y * kDegToRad};
    }
    return {};
}

}  // namespace lunareg
