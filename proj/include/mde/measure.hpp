#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mde/types.hpp"

namespace mde {

/// Weighted particle cloud representing a probability measure on R^n.
///
/// Points are stored column-wise in a dim x size matrix. Weights are
/// nonnegative and sum to one; inputs whose weights sum to one within 1e-9
/// are renormalized, anything further off is rejected.
class EmpiricalMeasure {
public:
    EmpiricalMeasure(Matrix points, Vector weights);

    /// Equal weights 1/size on every column of `points`.
    static EmpiricalMeasure uniform(Matrix points);
    static EmpiricalMeasure dirac(const Vector& x);

    Index dim() const { return points_.rows(); }
    Index size() const { return points_.cols(); }

    const Matrix& points() const { return points_; }
    const Vector& weights() const { return weights_; }
    Vector point(Index i) const { return points_.col(i); }
    double weight(Index i) const { return weights_(i); }

    /// True when every weight equals 1/size within `tol` (relative).
    bool has_equal_weights(double tol = 1e-12) const;

    Vector mean() const;

    /// Weighted sum of f over the particles, accumulated in particle order.
    double integrate(const std::function<double(const Vector&)>& f) const;

    bool operator==(const EmpiricalMeasure&) const = default;

private:
    Matrix points_;
    Vector weights_;
};

/// Time-indexed sequence of measures; times start at 0 and increase strictly.
class MeasureCurve {
public:
    MeasureCurve(std::vector<double> times, std::vector<EmpiricalMeasure> states);

    Index dim() const { return states_.front().dim(); }
    std::size_t size() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<EmpiricalMeasure>& states() const { return states_; }
    const EmpiricalMeasure& state(std::size_t i) const { return states_[i]; }
    const EmpiricalMeasure& final_state() const { return states_.back(); }

    /// Index of the node equal to t (within 1e-12 relative), or throws.
    std::size_t node_index(double t) const;
    bool has_node(double t) const;

private:
    std::vector<double> times_;
    std::vector<EmpiricalMeasure> states_;
};

using PointMap = std::function<Vector(const Vector&)>;

/// sum_i w_i |x_i - x0|^p
double moment(const EmpiricalMeasure& m, const Vector& x0, double p);

Matrix covariance(const EmpiricalMeasure& m);

/// f_* m. Throws InputError naming the first particle mapped to a non-finite
/// value.
EmpiricalMeasure pushforward(const EmpiricalMeasure& m, const PointMap& f);

/// Convex combination of measures; particle lists are concatenated in
/// component order.
EmpiricalMeasure mixture(std::span<const std::pair<double, EmpiricalMeasure>> components);

/// Systematic resampling to `budget` equal-weight particles. Clouds already
/// at or under budget are returned unchanged. The output order is shuffled
/// with the same seed so that particle index carries no spatial information
/// into later steps.
EmpiricalMeasure resample(const EmpiricalMeasure& m, Index budget, std::uint64_t seed);

/// Lossless conversion to an equal-weight cloud by replicating particles
/// when all weights are integer multiples of 1/q for some q <= max_count.
/// Throws InputError when no such q exists.
EmpiricalMeasure to_equal_weights(const EmpiricalMeasure& m, Index max_count);

/// Radius beyond which the q-th moment mass of any measure with
/// M_p^(1/p) <= moment_root is at most eps (tightness in the q-th moment).
double tail_radius(double moment_root, double p, double q, double eps);

/// int_{|x - x0| > radius} |x - x0|^q dm
double tail_moment(const EmpiricalMeasure& m, const Vector& x0, double radius, double q);

}  // namespace mde
