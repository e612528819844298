#pragma once

#include <map>
#include <optional>
#include <string>

#include "mde/afas.hpp"
#include "mde/measure.hpp"
#include "mde/vfp.hpp"

namespace mde {

struct Scenario {
    std::string name;
    VfpMap map;
    EmpiricalMeasure mu0;
    /// Closed-form solution; empty when none is known.
    ReferenceCurve reference;
    double horizon = 1.0;
    double p = 2.0;
    /// Default radius R of the residual test battery.
    double battery_radius = 1.5;

    Index dim() const { return mu0.dim(); }
};

/// Constant fields +1 and -1 with weight 1/2 on R; N(0, t).
Scenario wiener(Index reference_points = 10000);

/// Constant fields -1 and +2 with weight 1/2 on R. The reference
/// N(m t, s2 t) uses the computed barycenter m and centered variance s2.
Scenario drifted_wiener(Index reference_points = 10000);

/// Constant fields at the cube roots of unity with weight 1/3 on R^2. The
/// reference N(0, t A) uses the computed centered coefficient A.
Scenario isotropic2d(Index reference_per_axis = 100);

/// Constant fields at the particles of `sample_dist`; reference
/// N(0, t Cov(sample_dist)), horizon 1.
Scenario clt(const EmpiricalMeasure& sample_dist, Index reference_points = 10000);

/// V = delta of the zero field on R^dim, started at delta_0.
Scenario zero_field(Index dim);

/// Constant fields +-sqrt(n) e_i with weight 1/(2n) on R^n, started at
/// N(0, I); reference N(0, (1 + t) I). Its residual on the exact reference
/// calibrates verification tolerances.
Scenario gaussian_heat(Index dim, Index reference_per_axis = 64);

enum class EllipseConvention { AngleUniform, ArcLengthUniform };

struct NonuniquenessParams {
    double m_cap = 2.0;
    double m_floor = 0.5;
    int k_atoms = 256;
    EllipseConvention convention = EllipseConvention::AngleUniform;
    /// Semi-axis length over sqrt(c(.)). sqrt(2) makes the angle-uniform
    /// quadrature reproduce the required second moments exactly.
    double axis_scale = 1.4142135623730951;
    /// Grid resolution of the Gaussian curves.
    Index per_axis = 48;
    /// Uniform steps on [0, log m_cap] for the two curves.
    int steps = 32;
};

/// Delta_rho(sigma2) = (rho (sigma2 - log rho - 1) + rho - sigma2) / (rho - log rho - 1)
double delta_rho(double rho, double sigma2);

/// V[mu] for covariance `cov`: K equal-weight constant fields on the ellipse
/// with semi-axes scale sqrt(c(rho)) v1 and scale sqrt(c(Delta_rho(r))) v2,
/// or on the circle of radius scale sqrt(c(r)) when cov is isotropic.
Vfp covariance_ellipse_vfp(const Matrix& cov, const NonuniquenessParams& params);

/// Unit eigenvectors (v1 for the largest eigenvalue, v2 orthogonal) in
/// {x > 0} u {x = 0, y > 0}.
std::pair<Vector, Vector> principal_axes(const Matrix& cov);

struct NonuniquenessCase {
    Scenario scenario;
    MeasureCurve curve1;  ///< N(0, diag(t + 1, e^t))
    MeasureCurve curve2;  ///< N(0, diag(e^t, t + 1))
};

NonuniquenessCase nonuniqueness(const NonuniquenessParams& params = {});

/// Registry entry as read from a config file.
struct ScenarioSpec {
    std::string name;
    std::map<std::string, double> params;
    std::map<std::string, std::string> options;
    /// For clt: weights and points (dim x count) of the sample distribution.
    std::optional<EmpiricalMeasure> atoms;
};

Scenario build_scenario(const ScenarioSpec& spec);

}  // namespace mde
