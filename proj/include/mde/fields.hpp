#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mde/types.hpp"

namespace mde {

/// Vector field on R^n with analytic first and second derivatives.
///
/// jacobian(x)(i, j) = dX_i/dx_j and hessian(x)[k](i, j) = d^2 X_k/dx_i dx_j.
/// Constant and affine fields are stored in closed form so that sums and
/// differences of them stay closed form.
class VectorField {
public:
    using ValueFn = std::function<Vector(const Vector&)>;
    using JacobianFn = std::function<Matrix(const Vector&)>;
    using HessianFn = std::function<std::vector<Matrix>(const Vector&)>;

    struct Constant {
        Vector v;
    };
    struct Affine {
        Matrix a;
        Vector b;
    };
    struct Analytic {
        ValueFn value;
        JacobianFn jacobian;
        HessianFn hessian;
    };

    static VectorField constant(Vector v);
    static VectorField zero(Index dim);
    static VectorField affine(Matrix a, Vector b);
    static VectorField analytic(Index dim, ValueFn value, JacobianFn jacobian, HessianFn hessian);

    Index dim() const { return dim_; }

    Vector value(const Vector& x) const;
    Matrix jacobian(const Vector& x) const;
    std::vector<Matrix> hessian(const Vector& x) const;

    bool is_constant() const { return std::holds_alternative<Constant>(kind_); }
    /// Constant or affine.
    bool is_affine() const { return !std::holds_alternative<Analytic>(kind_); }
    const Constant* as_constant() const { return std::get_if<Constant>(&kind_); }
    const Affine* as_affine() const { return std::get_if<Affine>(&kind_); }

private:
    VectorField(Index dim, std::variant<Constant, Affine, Analytic> kind) : dim_(dim), kind_(std::move(kind)) {}

    Index dim_;
    std::variant<Constant, Affine, Analytic> kind_;
};

/// sum_k c_k X_k, closed form whenever every input is constant or affine.
VectorField linear_combination(std::span<const double> coeffs, std::span<const VectorField> fields);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double c, const VectorField& x);

/// Fields addressable by name from scenario configs.
VectorField named_field(const std::string& name, Index dim);

/// Default RK4 substep count: ceil(64 * |t| * (1 + bound)), at least 1.
int default_substeps(double t, double field_bound);

/// Time-t flow of X from x: exact for constant fields, classical RK4 with
/// `steps` uniform substeps otherwise. Throws NumericalError when the
/// trajectory norm exceeds 1e12 or becomes non-finite.
Vector flow(const VectorField& x_field, const Vector& x, double t, int steps);

/// sup over the box of |X| + |DX|_op + |D^2 X|, where the second-derivative
/// norm is sqrt(sum_k |Hess X_k|_op^2) (an upper bound on the tensor norm).
/// Exact for constant fields (|v|) and affine fields (vertex enumeration,
/// dimension <= 20); sampled at `samples` seeded points plus the box
/// vertices and center otherwise.
double w2inf_norm(const VectorField& x_field, const Box& box, int samples = 4096, std::uint64_t seed = 7);

/// Largest relative deviation between analytic and central-difference
/// derivatives over `count` seeded points in the box.
double field_derivative_mismatch(const VectorField& x_field, const Box& box, int count, std::uint64_t seed);

struct TestFunction;

/// grad(phi)(x) . X(x)
double lie(const VectorField& x_field, const TestFunction& phi, const Vector& x);

/// sum_ij X_i dX_j/dx_i dphi/dx_j + sum_ij X_i X_j d^2phi/dx_i dx_j
double lie2(const VectorField& x_field, const TestFunction& phi, const Vector& x);

}  // namespace mde
