#pragma once

#include <Eigen/Dense>

namespace mde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Axis-aligned box [lower, upper] used for sampling sup-norms.
struct Box {
    Vector lower;
    Vector upper;

    static Box centered(Index dim, double radius)
    {
        return {Vector::Constant(dim, -radius), Vector::Constant(dim, radius)};
    }
    Index dim() const { return lower.size(); }
};

}  // namespace mde
