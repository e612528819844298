#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mde/measure.hpp"
#include "mde/test_functions.hpp"
#include "mde/vfp.hpp"

namespace mde {

struct ResidualReport {
    std::vector<std::pair<std::string, double>> per_phi;
    double max_residual = 0.0;
    /// Largest |Q_fine - Q_coarse| / 3 over the battery, where Q_coarse is
    /// the trapezoid rule on every other node.
    double quadrature_error_estimate = 0.0;
};

/// |int phi dmu(s) - int phi dmu(0) - Q| with Q the trapezoid rule over the
/// nodes in [0, s] of t -> int square_op(V[mu(t)], phi) dmu(t).
double weak_residual(const MeasureCurve& curve, const VfpMap& map, const TestFunction& phi, double s);

/// Same bookkeeping over [u, s]; u and s must be nodes with u <= s.
double weak_residual_between(const MeasureCurve& curve, const VfpMap& map, const TestFunction& phi, double u,
                             double s);

ResidualReport residual_suite(const MeasureCurve& curve, const VfpMap& map, const std::vector<TestFunction>& battery,
                              const std::vector<double>& sample_times);

}  // namespace mde
