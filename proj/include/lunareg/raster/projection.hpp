#pragma once

#include <utility>

#include "lunareg/raster/georaster.hpp"

namespace lunareg {

/// Longitude/latitude pair in radians.
struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

/// Sphere map projections.
///   equirectangular (standard parallel phi0):
///       x = R * lon * cos(phi0),  y = R * lat
///   polar stereographic, true scale at the pole:
///       north: x =  2R tan(pi/4 - lat/2) sin(lon), y = -2R tan(pi/4 - lat/2) cos(lon)
///       south: x =  2R tan(pi/4 + lat/2) sin(lon), y =  2R tan(pi/4 + lat/2) cos(lon)
///   geographic: x = lon in degrees, y = lat in degrees
std::pair<double, double> project_forward(Projection p, double radius_m,
                                          double std_parallel_deg, LonLat ll);

LonLat project_inverse(Projection p, double radius_m, double std_parallel_deg,
                       double x, double y);

}  // namespace lunareg
