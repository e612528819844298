#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mde/fields.hpp"
#include "mde/measure.hpp"
#include "mde/test_functions.hpp"

namespace mde {

struct VfpAtom {
    double weight;
    VectorField field;
};

/// Finite-atom probability measure over vector fields.
class VectorFieldProbability {
public:
    explicit VectorFieldProbability(std::vector<VfpAtom> atoms);

    static VectorFieldProbability dirac(VectorField field);
    /// Equal-weight constant fields, one per column of `vectors`.
    static VectorFieldProbability constant_atoms(const Matrix& vectors);
    /// Constant fields at the particles of a cloud, with the cloud's weights.
    static VectorFieldProbability from_cloud(const EmpiricalMeasure& m);

    Index dim() const { return dim_; }
    std::size_t size() const { return atoms_.size(); }
    const std::vector<VfpAtom>& atoms() const { return atoms_; }
    bool all_constant() const;

private:
    std::vector<VfpAtom> atoms_;
    Index dim_;
};

using Vfp = VectorFieldProbability;

/// x -> sum_k w_k X_k(x); constant (or affine) whenever all atoms are.
VectorField barycenter(const Vfp& v);

/// Atoms X_k - barycenter(v), same weights.
Vfp centered_atoms(const Vfp& v);

/// Half the original atoms plus half the atoms reflected about the
/// barycenter (X -> 2 Vbar - X).
Vfp symmetrize(const Vfp& v);

/// sum_k w_k w2inf_norm(X_k, box)^p
double vfp_moment(const Vfp& v, double p, const Box& box);

enum class SquareForm {
    Reduced,  ///< sum w_k 1/2 L^2_{X_k - Vbar} phi + L_{Vbar} phi
    Raw,      ///< sum w_k (1/2 L^2_{X_k - Vbar} phi + L_{X_k} phi)
};

double square_op(const Vfp& v, const TestFunction& phi, const Vector& x, SquareForm form = SquareForm::Reduced);

/// sum_k w_k L_{X_k - Vbar} phi (x), which vanishes identically.
double first_order_centered_term(const Vfp& v, const TestFunction& phi, const Vector& x);

/// The square operator with the centering precomputed, for repeated use on
/// many points. For constant-field VFPs it evaluates
/// 1/2 tr(a_centered Hess phi) + grad phi . Vbar directly.
class SquareOperator {
public:
    explicit SquareOperator(const Vfp& v);
    double operator()(const TestFunction& phi, const Vector& x) const;

private:
    Vfp centered_;
    VectorField bar_;
    bool constant_ = false;
    Matrix a_centered_;
    Vector bar_value_;
};

struct Coefficients {
    Matrix a;
    Vector b;
    Matrix a_centered;
};

/// a = sum w X X^T, b_j = sum w sum_i X_i dX_j/dx_i, a_centered from the
/// centered atoms.
Coefficients coefficients(const Vfp& v, const Vector& x);

/// Smallest eigenvalue of a_centered over the sample points.
double ellipticity(const Vfp& v, const std::vector<Vector>& sample_points);

/// (1 - eps) V plus eps/n on each constant canonical basis field.
Vfp elliptic_regularize(const Vfp& v, double eps);

/// Distance between two VFPs in the W^{2,inf} metric. For constant-field
/// atoms this is the exact W_p of the atom clouds; otherwise an upper bound
/// from the index-matched coupling (equal atom counts and weights required).
struct VfpDistance {
    double value;
    bool exact;
};
VfpDistance vfp_distance(const Vfp& a, const Vfp& b, double p, const Box& box);

/// mu -> V[mu] with declared hypothesis bounds.
struct VfpMap {
    std::string name;
    Index dim = 1;
    std::function<Vfp(const EmpiricalMeasure&)> rule;
    std::optional<double> lipschitz_bound;
    std::optional<double> support_radius;
    std::optional<double> moment_bound;
    /// True when the rule ignores its argument.
    bool state_independent = false;

    Vfp operator()(const EmpiricalMeasure& m) const { return rule(m); }
};

VfpMap constant_map(std::string name, Vfp v);

VfpMap elliptic_regularize(const VfpMap& map, double eps);

struct SpotCheck {
    bool ok = true;
    double worst = 0.0;  ///< largest observed value / declared bound
    std::string detail;
};

/// Every atom of V[m] for the sample measures has w2inf_norm <= R.
SpotCheck check_support_radius(const VfpMap& map, const std::vector<EmpiricalMeasure>& samples, const Box& box);

/// vfp_moment(V[m], p) <= B on the sample measures.
SpotCheck check_moment_bound(const VfpMap& map, const std::vector<EmpiricalMeasure>& samples, double p,
                             const Box& box);

/// W_p(V[mu], V[nu]) <= L W_p(mu, nu) on consecutive pairs of the sample
/// measures (VFP side measured by vfp_distance, an upper bound in general).
SpotCheck check_lipschitz(const VfpMap& map, const std::vector<EmpiricalMeasure>& samples, double p,
                          const Box& box);

}  // namespace mde
