#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "lunareg/core/error.hpp"

namespace lunareg {

/// Paired evaluation points in reference-frame pixels: `reference[i]` is the
/// ground-truth location, `registered[i]` the registered image's location.
struct ControlPointSet {
    std::vector<Eigen::Vector2d> reference;
    std::vector<Eigen::Vector2d> registered;

    int size() const { return static_cast<int>(reference.size()); }
    void add(const Eigen::Vector2d& ref, const Eigen::Vector2d& reg) {
        reference.push_back(ref);
        registered.push_back(reg);
    }
};

/// Per-axis root-mean-square error: sqrt(sum((v_i - vhat_i)^2) / N).
std::pair<double, double> rmse_xy(const ControlPointSet& points);

}  // namespace lunareg
