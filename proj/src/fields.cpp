#include "mde/fields.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "mde/errors.hpp"
#include "mde/test_functions.hpp"

namespace mde {

VectorField VectorField::constant(Vector v)
{
    if (!v.allFinite()) throw InputError("constant field has non-finite entries");
    const Index n = v.size();
    return VectorField(n, Constant{std::move(v)});
}

VectorField VectorField::zero(Index dim) { return constant(Vector::Zero(dim)); }

VectorField VectorField::affine(Matrix a, Vector b)
{
    if (a.rows() != a.cols() || a.rows() != b.size()) throw InputError("affine field: shape mismatch");
    if (!a.allFinite() || !b.allFinite()) throw InputError("affine field has non-finite entries");
    const Index n = b.size();
    return VectorField(n, Affine{std::move(a), std::move(b)});
}

VectorField VectorField::analytic(Index dim, ValueFn value, JacobianFn jacobian, HessianFn hessian)
{
    if (!value || !jacobian || !hessian) throw InputError("analytic field needs value, jacobian and hessian");
    return VectorField(dim, Analytic{std::move(value), std::move(jacobian), std::move(hessian)});
}

Vector VectorField::value(const Vector& x) const
{
    if (const auto* c = std::get_if<Constant>(&kind_)) return c->v;
    if (const auto* a = std::get_if<Affine>(&kind_)) return a->a * x + a->b;
    return std::get<Analytic>(kind_).value(x);
}

Matrix VectorField::jacobian(const Vector& x) const
{
    if (std::holds_alternative<Constant>(kind_)) return Matrix::Zero(dim_, dim_);
    if (const auto* a = std::get_if<Affine>(&kind_)) return a->a;
    return std::get<Analytic>(kind_).jacobian(x);
}

std::vector<Matrix> VectorField::hessian(const Vector& x) const
{
    if (const auto* f = std::get_if<Analytic>(&kind_)) return f->hessian(x);
    return std::vector<Matrix>(static_cast<std::size_t>(dim_), Matrix::Zero(dim_, dim_));
}

VectorField linear_combination(std::span<const double> coeffs, std::span<const VectorField> fields)
{
    if (coeffs.size() != fields.size() || fields.empty())
        throw InputError("linear_combination: need matching, nonempty coefficient and field lists");
    const Index n = fields.front().dim();
    bool all_constant = true, all_affine = true;
    for (const auto& f : fields) {
        if (f.dim() != n) throw InputError("linear_combination: fields differ in dimension");
        all_constant = all_constant && f.is_constant();
        all_affine = all_affine && f.is_affine();
    }
    if (all_constant) {
        Vector v = Vector::Zero(n);
        for (std::size_t k = 0; k < fields.size(); ++k) v += coeffs[k] * fields[k].as_constant()->v;
        return VectorField::constant(std::move(v));
    }
    if (all_affine) {
        Matrix a = Matrix::Zero(n, n);
        Vector b = Vector::Zero(n);
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (const auto* c = fields[k].as_constant()) {
                b += coeffs[k] * c->v;
            } else {
                a += coeffs[k] * fields[k].as_affine()->a;
                b += coeffs[k] * fields[k].as_affine()->b;
            }
        }
        return VectorField::affine(std::move(a), std::move(b));
    }
    auto cs = std::make_shared<const std::vector<double>>(coeffs.begin(), coeffs.end());
    auto fs = std::make_shared<const std::vector<VectorField>>(fields.begin(), fields.end());
    return VectorField::analytic(
        n,
        [cs, fs, n](const Vector& x) {
            Vector out = Vector::Zero(n);
            for (std::size_t k = 0; k < fs->size(); ++k) out += (*cs)[k] * (*fs)[k].value(x);
            return out;
        },
        [cs, fs, n](const Vector& x) {
            Matrix out = Matrix::Zero(n, n);
            for (std::size_t k = 0; k < fs->size(); ++k)
                if (!(*fs)[k].is_constant()) out += (*cs)[k] * (*fs)[k].jacobian(x);
            return out;
        },
        [cs, fs, n](const Vector& x) {
            std::vector<Matrix> out(static_cast<std::size_t>(n), Matrix::Zero(n, n));
            for (std::size_t k = 0; k < fs->size(); ++k) {
                if ((*fs)[k].is_affine()) continue;
                const auto h = (*fs)[k].hessian(x);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*cs)[k] * h[i];
            }
            return out;
        });
}

VectorField operator-(const VectorField& a, const VectorField& b)
{
    const double c[] = {1.0, -1.0};
    const VectorField f[] = {a, b};
    return linear_combination(c, f);
}

VectorField operator*(double c, const VectorField& x)
{
    const double cs[] = {c};
    const VectorField fs[] = {x};
    return linear_combination(cs, fs);
}

VectorField named_field(const std::string& name, Index dim)
{
    if (name == "zero") return VectorField::zero(dim);
    if (name == "contraction") return VectorField::affine(-Matrix::Identity(dim, dim), Vector::Zero(dim));
    if (name == "rotation") {
        if (dim != 2) throw InputError("field 'rotation' is defined on R^2 only");
        Matrix a(2, 2);
        a << 0.0, -1.0, 1.0, 0.0;
        return VectorField::affine(a, Vector::Zero(2));
    }
    if (name == "sine") {
        // X_i(x) = sin(x_{i+1 mod n})
        return VectorField::analytic(
            dim,
            [dim](const Vector& x) {
                Vector v(dim);
                for (Index i = 0; i < dim; ++i) v(i) = std::sin(x((i + 1) % dim));
                return v;
            },
            [dim](const Vector& x) {
                Matrix j = Matrix::Zero(dim, dim);
                for (Index i = 0; i < dim; ++i) j(i, (i + 1) % dim) += std::cos(x((i + 1) % dim));
                return j;
            },
            [dim](const Vector& x) {
                std::vector<Matrix> h(static_cast<std::size_t>(dim), Matrix::Zero(dim, dim));
                for (Index i = 0; i < dim; ++i) {
                    const Index k = (i + 1) % dim;
                    h[static_cast<std::size_t>(i)](k, k) += -std::sin(x(k));
                }
                return h;
            });
    }
    throw InputError("unknown named field '" + name + "'");
}

int default_substeps(double t, double field_bound)
{
    return std::max(1, static_cast<int>(std::ceil(64.0 * std::abs(t) * (1.0 + field_bound))));
}

Vector flow(const VectorField& x_field, const Vector& x, double t, int steps)
{
    if (steps < 1) throw InputError("flow: steps must be >= 1");
    if (x.size() != x_field.dim()) throw InputError("flow: point has wrong dimension");
    if (t == 0.0) return x;
    if (const auto* c = x_field.as_constant()) return x + t * c->v;

    constexpr double kGuard = 1e12;
    const double h = t / static_cast<double>(steps);
    Vector y = x;
    for (int s = 0; s < steps; ++s) {
        const Vector k1 = x_field.value(y);
        const Vector k2 = x_field.value(y + 0.5 * h * k1);
        const Vector k3 = x_field.value(y + 0.5 * h * k2);
        const Vector k4 = x_field.value(y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double norm = y.norm();
        if (!std::isfinite(norm) || norm > kGuard)
            throw NumericalError("flow trajectory left the overflow guard (|y| > 1e12)");
    }
    return y;
}

namespace {

double hessian_norm(const std::vector<Matrix>& h)
{
    double sq = 0.0;
    for (const auto& m : h) {
        const double op = m.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
        sq += op * op;
    }
    return std::sqrt(sq);
}

double operator_norm(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

double norm_at(const VectorField& f, const Vector& x)
{
    return f.value(x).norm() + operator_norm(f.jacobian(x)) + hessian_norm(f.hessian(x));
}

}  // namespace

double w2inf_norm(const VectorField& x_field, const Box& box, int samples, std::uint64_t seed)
{
    if (samples < 1) throw InputError("w2inf_norm: samples must be >= 1");
    if (const auto* c = x_field.as_constant()) return c->v.norm();
    const Index n = x_field.dim();
    if (box.dim() != n) throw InputError("w2inf_norm: box has wrong dimension");

    const auto vertex = [&](std::uint64_t mask) {
        Vector v(n);
        for (Index k = 0; k < n; ++k) v(k) = (mask >> k) & 1U ? box.upper(k) : box.lower(k);
        return v;
    };
    if (const auto* a = x_field.as_affine()) {
        if (n > 20) throw InputError("w2inf_norm: affine vertex enumeration limited to dimension 20");
        double sup = 0.0;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
            sup = std::max(sup, (a->a * vertex(mask) + a->b).norm());
        return sup + operator_norm(a->a);
    }

    double sup = norm_at(x_field, 0.5 * (box.lower + box.upper));
    if (n <= 12)
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
            sup = std::max(sup, norm_at(x_field, vertex(mask)));
    std::mt19937_64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        Vector x(n);
        for (Index k = 0; k < n; ++k) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            x(k) = box.lower(k) + u * (box.upper(k) - box.lower(k));
        }
        sup = std::max(sup, norm_at(x_field, x));
    }
    return sup;
}

double field_derivative_mismatch(const VectorField& x_field, const Box& box, int count, std::uint64_t seed)
{
    const Index n = x_field.dim();
    const double h = 1e-5;
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int s = 0; s < count; ++s) {
        Vector x(n);
        for (Index k = 0; k < n; ++k) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            x(k) = box.lower(k) + u * (box.upper(k) - box.lower(k));
        }
        const Matrix jac = x_field.jacobian(x);
        const auto hess = x_field.hessian(x);
        for (Index j = 0; j < n; ++j) {
            Vector e = Vector::Zero(n);
            e(j) = h;
            const Vector fd_col = (x_field.value(x + e) - x_field.value(x - e)) / (2.0 * h);
            const double scale = std::max(1.0, jac.col(j).norm());
            worst = std::max(worst, (fd_col - jac.col(j)).norm() / scale);
            const Matrix fd_jac = (x_field.jacobian(x + e) - x_field.jacobian(x - e)) / (2.0 * h);
            for (Index k = 0; k < n; ++k) {
                // d/dx_j of row k of the Jacobian is column j of Hess X_k
                const Vector analytic_col = hess[static_cast<std::size_t>(k)].col(j);
                const double sc = std::max(1.0, analytic_col.norm());
                worst = std::max(worst, (fd_jac.row(k).transpose() - analytic_col).norm() / sc);
            }
        }
    }
    return worst;
}

double lie(const VectorField& x_field, const TestFunction& phi, const Vector& x)
{
    return phi.gradient(x).dot(x_field.value(x));
}

double lie2(const VectorField& x_field, const TestFunction& phi, const Vector& x)
{
    const Vector v = x_field.value(x);
    const Vector grad = phi.gradient(x);
    const Matrix hess = phi.hessian(x);
    double first = 0.0;
    if (!x_field.is_constant()) first = (x_field.jacobian(x) * v).dot(grad);
    return first + v.dot(hess * v);
}

}  // namespace mde
