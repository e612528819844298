#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mde/measure.hpp"

namespace mde {

enum class TransportMethod { Auto, Exact1D, Assignment, Sinkhorn };

std::string to_string(TransportMethod m);
TransportMethod parse_transport_method(const std::string& name);

/// Result of a p-Wasserstein computation. `cost` is W_p itself (the p-th
/// root). For exact methods gap_bound is 0; for Sinkhorn the true W_p lies
/// in [cost - gap_bound, cost].
struct TransportPlanReport {
    double cost = 0.0;
    TransportMethod method = TransportMethod::Auto;
    int iterations = 0;
    double gap_bound = 0.0;
};

struct SinkhornOptions {
    double epsilon_scale = 0.05;  ///< epsilon = scale * median pairwise cost
    double tolerance = 1e-9;      ///< L1 marginal violation
    int max_iterations = 10000;
    double relaxation = 1.8;      ///< over-relaxation factor in [1, 2)
};

/// Largest particle count for which `Auto` still picks Assignment.
inline constexpr Index kAssignmentAutoLimit = 2000;

TransportPlanReport wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                                TransportMethod method = TransportMethod::Auto,
                                const SinkhornOptions& sinkhorn = {});

/// Convenience: wasserstein(...).cost
double wasserstein_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p,
                            TransportMethod method = TransportMethod::Auto);

/// Optimal assignment for a square cost matrix (Hungarian method with
/// potentials). Returns row -> column.
std::vector<Index> solve_assignment(const Matrix& cost);

/// Scalar test function with a certified Lipschitz constant.
struct LipschitzWitness {
    std::function<double(const Vector&)> f;
    double lipschitz = 1.0;
};

/// max_k |int f_k da - int f_k db|, each witness rescaled to be 1-Lipschitz
/// if its declared constant exceeds one. Never exceeds W_1(a, b).
double w1_duality_lower_bound(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                              const std::vector<LipschitzWitness>& witnesses);

/// Family of `count` piecewise-linear 1-Lipschitz functions on R^1: the
/// identity, its negative, and hinges |x - c| / ramps clamp(x - c) at
/// centers spread over [lo, hi].
std::vector<LipschitzWitness> piecewise_linear_witnesses(int count, double lo, double hi);

/// max over shared nodes of W_p(c1(t), c2(t)).
double curve_sup_distance(const MeasureCurve& c1, const MeasureCurve& c2, double p,
                          TransportMethod method = TransportMethod::Auto);

}  // namespace mde
