#include "mde/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mde/errors.hpp"

namespace mde {

namespace {

// Profile g(s) = exp(1 - w), w = 1/(1 - s), and its s-derivatives.
struct Profile {
    double g, d1, d2, d3;
};

Profile profile(double s)
{
    if (s >= 1.0) return {0.0, 0.0, 0.0, 0.0};
    const double w = 1.0 / (1.0 - s);
    const double g = std::exp(1.0 - w);
    const double w2 = w * w, w3 = w2 * w, w4 = w3 * w;
    return {g, -w2 * g, g * (w4 - 2.0 * w3), g * (-w4 * w2 + 6.0 * w4 * w - 6.0 * w4)};
}

// Sup bounds of a factor h and its first three derivatives over the support.
struct FactorBounds {
    double h0, h1, h2, h3;
};

struct Factor {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
    FactorBounds bounds;
};

// Bounds on the cutoff of radius rho and its derivatives.
FactorBounds cutoff_bounds(double rho)
{
    const auto& g = cutoff_profile_bounds();
    return {1.0, 2.0 * g.d1 / rho, (4.0 * g.d2 + 2.0 * g.d1) / (rho * rho),
            (8.0 * g.d3 + 12.0 * g.d2) / (rho * rho * rho)};
}

double c3_of_product(const FactorBounds& h, const FactorBounds& c)
{
    const double d1 = h.h0 * c.h1 + h.h1 * c.h0;
    const double d2 = h.h0 * c.h2 + 2.0 * h.h1 * c.h1 + h.h2 * c.h0;
    const double d3 = h.h0 * c.h3 + 3.0 * h.h1 * c.h2 + 3.0 * h.h2 * c.h1 + h.h3 * c.h0;
    return d1 + d2 + d3;
}

TestFunction times_cutoff(std::string id, Factor h, const Vector& center, double rho, double support)
{
    const Vector c = center;
    const double r2 = rho * rho;
    auto value = [h, c, r2](const Vector& x) {
        const double s = (x - c).squaredNorm() / r2;
        if (s >= 1.0) return 0.0;
        return h.value(x) * profile(s).g;
    };
    auto gradient = [h, c, r2](const Vector& x) -> Vector {
        const Vector y = x - c;
        const double s = y.squaredNorm() / r2;
        if (s >= 1.0) return Vector::Zero(x.size());
        const Profile p = profile(s);
        const Vector grad_chi = (2.0 * p.d1 / r2) * y;
        return h.value(x) * grad_chi + p.g * h.gradient(x);
    };
    auto hessian = [h, c, r2](const Vector& x) -> Matrix {
        const Index n = x.size();
        const Vector y = x - c;
        const double s = y.squaredNorm() / r2;
        if (s >= 1.0) return Matrix::Zero(n, n);
        const Profile p = profile(s);
        const Vector grad_chi = (2.0 * p.d1 / r2) * y;
        const Matrix hess_chi =
            (4.0 * p.d2 / (r2 * r2)) * (y * y.transpose()) + (2.0 * p.d1 / r2) * Matrix::Identity(n, n);
        const Vector grad_h = h.gradient(x);
        return h.value(x) * hess_chi + grad_h * grad_chi.transpose() + grad_chi * grad_h.transpose() +
               p.g * h.hessian(x);
    };
    TestFunction phi;
    phi.id = std::move(id);
    phi.value = value;
    phi.gradient = gradient;
    phi.hessian = hessian;
    phi.support_radius = support;
    phi.c3_bound = c3_of_product(h.bounds, cutoff_bounds(rho));
    return phi;
}

Factor unit_factor()
{
    return {[](const Vector&) { return 1.0; }, [](const Vector& x) -> Vector { return Vector::Zero(x.size()); },
            [](const Vector& x) -> Matrix { return Matrix::Zero(x.size(), x.size()); }, {1.0, 0.0, 0.0, 0.0}};
}

Factor coordinate_factor(Index i, double reach)
{
    return {[i](const Vector& x) { return x(i); },
            [i](const Vector& x) -> Vector {
                Vector g = Vector::Zero(x.size());
                g(i) = 1.0;
                return g;
            },
            [](const Vector& x) -> Matrix { return Matrix::Zero(x.size(), x.size()); },
            {reach, 1.0, 0.0, 0.0}};
}

Factor product_factor(Index i, Index j, double reach)
{
    return {[i, j](const Vector& x) { return x(i) * x(j); },
            [i, j](const Vector& x) -> Vector {
                Vector g = Vector::Zero(x.size());
                g(i) += x(j);
                g(j) += x(i);
                return g;
            },
            [i, j](const Vector& x) -> Matrix {
                Matrix h = Matrix::Zero(x.size(), x.size());
                h(i, j) += 1.0;
                h(j, i) += 1.0;
                return h;
            },
            {reach * reach, 2.0 * reach, 2.0, 0.0}};
}

// (|x - c|^2 + soft^2)^(k/2), smooth for soft > 0.
Factor smoothed_distance_factor(const Vector& center, int k, double soft, double reach)
{
    const Vector c = center;
    const double kk = k;
    const double s2 = soft * soft;
    const double far = std::pow(reach + c.norm(), 2) + s2;
    const auto sup_power = [&](double e) { return e >= 0.0 ? std::pow(far, e) : std::pow(s2, e); };
    const FactorBounds b{std::pow(far, 0.5 * kk), kk * sup_power(0.5 * (kk - 1.0)),
                         kk * (1.0 + std::abs(kk - 2.0)) * sup_power(0.5 * kk - 1.0),
                         kk * std::abs(kk - 2.0) * (3.0 + std::abs(kk - 4.0)) * sup_power(0.5 * (kk - 3.0))};
    return {[c, kk, s2](const Vector& x) { return std::pow((x - c).squaredNorm() + s2, 0.5 * kk); },
            [c, kk, s2](const Vector& x) -> Vector {
                const Vector y = x - c;
                const double q = y.squaredNorm() + s2;
                return kk * std::pow(q, 0.5 * kk - 1.0) * y;
            },
            [c, kk, s2](const Vector& x) -> Matrix {
                const Vector y = x - c;
                const double q = y.squaredNorm() + s2;
                const Index n = x.size();
                return kk * std::pow(q, 0.5 * kk - 1.0) * Matrix::Identity(n, n) +
                       kk * (kk - 2.0) * std::pow(q, 0.5 * kk - 2.0) * (y * y.transpose());
            },
            b};
}

std::string axis_label(const Vector& c)
{
    std::ostringstream os;
    os.precision(3);
    os << "(";
    for (Index i = 0; i < c.size(); ++i) os << (i ? "," : "") << c(i);
    os << ")";
    return os.str();
}

}  // namespace

const ProfileBounds& cutoff_profile_bounds()
{
    static const ProfileBounds bounds = [] {
        // g^(k)(s) = exp(1 - w) * poly_k(w) with w = 1/(1 - s) in [1, inf);
        // exp(1 - w) w^6 < 1e-20 beyond w = 80.
        double b1 = 0.0, b2 = 0.0, b3 = 0.0;
        for (double w = 1.0; w <= 80.0; w += 1e-4) {
            const double s = 1.0 - 1.0 / w;
            const Profile p = profile(s);
            b1 = std::max(b1, std::abs(p.d1));
            b2 = std::max(b2, std::abs(p.d2));
            b3 = std::max(b3, std::abs(p.d3));
        }
        // the grid step is far below the scale on which these functions vary
        return ProfileBounds{b1 * 1.001, b2 * 1.001, b3 * 1.001};
    }();
    return bounds;
}

TestFunction scaled(const TestFunction& phi, double c)
{
    TestFunction out = phi;
    std::ostringstream os;
    os << c << "*" << phi.id;
    out.id = os.str();
    out.value = [f = phi.value, c](const Vector& x) { return c * f(x); };
    out.gradient = [f = phi.gradient, c](const Vector& x) -> Vector { return c * f(x); };
    out.hessian = [f = phi.hessian, c](const Vector& x) -> Matrix { return c * f(x); };
    out.c3_bound = std::abs(c) * phi.c3_bound;
    return out;
}

TestFunction bump(const Vector& center, double radius)
{
    if (!(radius > 0.0)) throw InputError("bump radius must be positive");
    return times_cutoff("bump" + axis_label(center), unit_factor(), center, radius, center.norm() + radius);
}

std::vector<TestFunction> standard_test_battery(Index dim, double radius)
{
    if (!(radius > 0.0)) throw InputError("test battery radius must be positive");
    if (dim < 1) throw InputError("test battery dimension must be >= 1");
    const double r = radius;
    const double support = 2.0 * r;
    const Vector origin = Vector::Zero(dim);
    std::vector<TestFunction> battery;

    for (Index i = 0; i < dim; ++i)
        battery.push_back(times_cutoff("x" + std::to_string(i) + "*chi", coordinate_factor(i, support), origin,
                                       support, support));
    for (Index i = 0; i < dim; ++i)
        for (Index j = i; j < dim; ++j)
            battery.push_back(times_cutoff("x" + std::to_string(i) + "x" + std::to_string(j) + "*chi",
                                           product_factor(i, j, support), origin, support, support));

    std::vector<Vector> bump_centers{origin};
    for (Index i = 0; i < dim; ++i)
        for (double shift : {0.5 * r, -0.5 * r, r, -r}) {
            Vector c = origin;
            c(i) = shift;
            bump_centers.push_back(c);
        }
    for (const auto& c : bump_centers) {
        auto phi = times_cutoff("bump" + axis_label(c), unit_factor(), c, r, support);
        battery.push_back(std::move(phi));
    }

    std::vector<Vector> distance_centers{origin};
    for (Index i = 0; i < dim; ++i)
        for (double shift : {0.25 * r, -0.25 * r}) {
            Vector c = origin;
            c(i) = shift;
            distance_centers.push_back(c);
        }
    const double soft = 0.25 * r;
    for (int k = 1; k <= 3; ++k)
        for (const auto& c : distance_centers)
            battery.push_back(times_cutoff("dist" + std::to_string(k) + axis_label(c) + "*chi",
                                           smoothed_distance_factor(c, k, soft, support), origin, support,
                                           support));
    return battery;
}

double test_function_mismatch(const TestFunction& phi, Index dim, int count, std::uint64_t seed)
{
    const double h = 1e-5;
    const double reach = 1.1 * phi.support_radius;
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int s = 0; s < count; ++s) {
        Vector x(dim);
        for (Index k = 0; k < dim; ++k) x(k) = (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0) * reach;
        const Vector grad = phi.gradient(x);
        const Matrix hess = phi.hessian(x);
        for (Index j = 0; j < dim; ++j) {
            Vector e = Vector::Zero(dim);
            e(j) = h;
            const double fd = (phi.value(x + e) - phi.value(x - e)) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - grad(j)) / std::max(1.0, std::abs(grad(j))));
            const Vector fd_col = (phi.gradient(x + e) - phi.gradient(x - e)) / (2.0 * h);
            worst = std::max(worst, (fd_col - hess.col(j)).norm() / std::max(1.0, hess.col(j).norm()));
        }
    }
    return worst;
}

}  // namespace mde
