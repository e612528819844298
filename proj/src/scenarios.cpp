#include "mde/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mde/errors.hpp"
#include "mde/sampling.hpp"

namespace mde {

namespace {

Vfp constant_vfp(const std::vector<std::pair<double, Vector>>& atoms)
{
    std::vector<VfpAtom> out;
    for (const auto& [w, v] : atoms) out.push_back({w, VectorField::constant(v)});
    return Vfp(std::move(out));
}

Vector vec1(double x) { return Vector::Constant(1, x); }

double max_atom_norm(const Vfp& v)
{
    double r = 0.0;
    for (const auto& a : v.atoms()) r = std::max(r, a.field.as_constant()->v.norm());
    return r;
}

double atom_moment(const Vfp& v, double p)
{
    double m = 0.0;
    for (const auto& a : v.atoms()) m += a.weight * std::pow(a.field.as_constant()->v.norm(), p);
    return m;
}

VfpMap declared_constant_map(std::string name, const Vfp& v, double p)
{
    VfpMap map = constant_map(std::move(name), v);
    map.support_radius = max_atom_norm(v);
    map.moment_bound = atom_moment(v, p);
    return map;
}

// N(mean, cov) as a deterministic cloud: quantiles in 1-D, a tensor grid
// otherwise.
EmpiricalMeasure gaussian_cloud(const Vector& mean, const Matrix& cov, Index points_1d, Index per_axis)
{
    if (mean.size() == 1) return gaussian_quantile_cloud(mean(0), cov(0, 0), points_1d);
    return gaussian_grid_cloud(mean, cov, per_axis);
}

double get(const ScenarioSpec& spec, const std::string& key, double fallback)
{
    const auto it = spec.params.find(key);
    return it == spec.params.end() ? fallback : it->second;
}

Index get_count(const ScenarioSpec& spec, const std::string& key, Index fallback)
{
    const double v = get(spec, key, static_cast<double>(fallback));
    if (!(v >= 1.0) || v != std::floor(v)) throw InputError("scenario parameter '" + key + "' must be a positive integer");
    return static_cast<Index>(v);
}

}  // namespace

Scenario wiener(Index reference_points)
{
    const Vfp v = constant_vfp({{0.5, vec1(1.0)}, {0.5, vec1(-1.0)}});
    Scenario s{"wiener", declared_constant_map("wiener", v, 2.0), EmpiricalMeasure::dirac(vec1(0.0)),
               [reference_points](double t) { return gaussian_quantile_cloud(0.0, t, reference_points); }};
    s.map.support_radius = 1.0;
    s.map.moment_bound = 1.0;
    return s;
}

Scenario drifted_wiener(Index reference_points)
{
    const Vfp v = constant_vfp({{0.5, vec1(-1.0)}, {0.5, vec1(2.0)}});
    const Vector zero = vec1(0.0);
    const double drift = barycenter(v).value(zero)(0);
    const double var = coefficients(v, zero).a_centered(0, 0);
    Scenario s{"drifted_wiener", declared_constant_map("drifted_wiener", v, 2.0), EmpiricalMeasure::dirac(zero),
               [=](double t) { return gaussian_quantile_cloud(drift * t, var * t, reference_points); }};
    return s;
}

Scenario isotropic2d(Index reference_per_axis)
{
    std::vector<std::pair<double, Vector>> atoms;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0;
        atoms.push_back({1.0 / 3.0, Vector{{std::cos(a), std::sin(a)}}});
    }
    const Vfp v = constant_vfp(atoms);
    const Vector zero = Vector::Zero(2);
    const Matrix a_c = coefficients(v, zero).a_centered;
    Scenario s{"isotropic2d", declared_constant_map("isotropic2d", v, 2.0), EmpiricalMeasure::dirac(zero),
               [=](double t) { return gaussian_grid_cloud(zero, t * a_c, reference_per_axis); }};
    return s;
}

Scenario clt(const EmpiricalMeasure& sample_dist, Index reference_points)
{
    const Vfp v = Vfp::from_cloud(sample_dist);
    const Vector mean = sample_dist.mean();
    const Matrix cov = covariance(sample_dist);
    const Index n = sample_dist.dim();
    const Index per_axis = std::max<Index>(
        2, static_cast<Index>(std::floor(std::pow(static_cast<double>(reference_points), 1.0 / static_cast<double>(n)))));
    Scenario s{"clt", declared_constant_map("clt", v, 2.0), EmpiricalMeasure::dirac(Vector::Zero(n)),
               [=](double t) { return gaussian_cloud(t * mean, t * cov, reference_points, per_axis); }};
    s.battery_radius = std::max(1.5, 0.75 * max_atom_norm(v));
    return s;
}

Scenario zero_field(Index dim)
{
    if (dim < 1) throw InputError("zero_field: dimension must be >= 1");
    const Vector zero = Vector::Zero(dim);
    Scenario s{"zero_field", declared_constant_map("zero_field", Vfp::dirac(VectorField::zero(dim)), 2.0),
               EmpiricalMeasure::dirac(zero), [zero](double) { return EmpiricalMeasure::dirac(zero); }};
    return s;
}

Scenario gaussian_heat(Index dim, Index reference_per_axis)
{
    if (dim < 1) throw InputError("gaussian_heat: dimension must be >= 1");
    std::vector<std::pair<double, Vector>> atoms;
    const double len = std::sqrt(static_cast<double>(dim));
    const double w = 1.0 / (2.0 * static_cast<double>(dim));
    for (Index i = 0; i < dim; ++i)
        for (double sign : {1.0, -1.0}) atoms.push_back({w, sign * len * Vector::Unit(dim, i)});
    const Vfp v = constant_vfp(atoms);
    const Vector zero = Vector::Zero(dim);
    const Matrix id = Matrix::Identity(dim, dim);
    const Index points_1d = reference_per_axis * reference_per_axis;
    const auto ref = [=](double t) { return gaussian_cloud(zero, (1.0 + t) * id, points_1d, reference_per_axis); };
    Scenario s{"gaussian_heat", declared_constant_map("gaussian_heat", v, 2.0), ref(0.0), ref};
    s.battery_radius = 2.0;
    return s;
}

double delta_rho(double rho, double sigma2)
{
    // numerator rewritten as sigma2 (rho - 1) - rho log rho
    const double denom = (rho - 1.0) - std::log1p(rho - 1.0);
    const double numer = sigma2 * (rho - 1.0) - rho * std::log(rho);
    if (denom <= 0.0) {
        if (numer == 0.0) return rho;
        return numer < 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    }
    return numer / denom;
}

std::pair<Vector, Vector> principal_axes(const Matrix& cov)
{
    if (cov.rows() != 2 || cov.cols() != 2) throw InputError("principal_axes: 2x2 matrix expected");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cov + cov.transpose()));
    const auto canonical = [](Vector v) {
        v.normalize();
        if (v(0) < 0.0 || (v(0) == 0.0 && v(1) < 0.0)) v = -v;
        return v;
    };
    const Vector v1 = canonical(es.eigenvectors().col(1));
    const Vector v2 = canonical(Vector{{-v1(1), v1(0)}});
    return {v1, v2};
}

Vfp covariance_ellipse_vfp(const Matrix& cov, const NonuniquenessParams& params)
{
    if (cov.rows() != 2 || cov.cols() != 2) throw InputError("covariance ellipse: 2x2 covariance expected");
    if (params.k_atoms < 3) throw InputError("covariance ellipse: need at least 3 atoms");
    if (!(params.m_cap > params.m_floor && params.m_floor > 0.0))
        throw InputError("covariance ellipse: need 0 < m_floor < m_cap");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (cov + cov.transpose()), Eigen::EigenvaluesOnly);
    const double r = es.eigenvalues()(0);
    const double rho = es.eigenvalues()(1);
    if (!(r > 1e-12 * std::max(rho, 1.0)))
        throw NumericalError("covariance ellipse: covariance is rank deficient");
    const auto c = [&](double x) { return std::min(params.m_cap, std::max(params.m_floor, x)); };

    Vector v1, v2;
    double a, b;
    if (rho - r <= 1e-9 * std::max(rho, 1.0)) {
        v1 = Vector::Unit(2, 0);
        v2 = Vector::Unit(2, 1);
        a = b = params.axis_scale * std::sqrt(c(r));
    } else {
        std::tie(v1, v2) = principal_axes(cov);
        a = params.axis_scale * std::sqrt(c(rho));
        b = params.axis_scale * std::sqrt(c(delta_rho(rho, r)));
    }

    const int k = params.k_atoms;
    std::vector<double> angles(static_cast<std::size_t>(k));
    if (params.convention == EllipseConvention::AngleUniform || a == b) {
        for (int i = 0; i < k; ++i) angles[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * i / k;
    } else {
        // invert the arc-length function on a dense angle grid
        const int g = 64 * k;
        std::vector<double> theta(static_cast<std::size_t>(g) + 1), len(static_cast<std::size_t>(g) + 1, 0.0);
        const auto speed = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
        for (int i = 0; i <= g; ++i) theta[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * i / g;
        for (int i = 1; i <= g; ++i) {
            const auto u = static_cast<std::size_t>(i);
            len[u] = len[u - 1] + 0.5 * (theta[u] - theta[u - 1]) * (speed(theta[u]) + speed(theta[u - 1]));
        }
        std::size_t j = 0;
        for (int i = 0; i < k; ++i) {
            const double target = len.back() * i / k;
            while (len[j + 1] < target) ++j;
            const double f = (target - len[j]) / (len[j + 1] - len[j]);
            angles[static_cast<std::size_t>(i)] = theta[j] + f * (theta[j + 1] - theta[j]);
        }
    }
    Matrix pts(2, k);
    for (int i = 0; i < k; ++i) {
        const double t = angles[static_cast<std::size_t>(i)];
        pts.col(i) = a * std::cos(t) * v1 + b * std::sin(t) * v2;
    }
    return Vfp::constant_atoms(pts);
}

NonuniquenessCase nonuniqueness(const NonuniquenessParams& params)
{
    if (params.k_atoms < 64) throw InputError("nonuniqueness: k_atoms must be >= 64");
    if (!(params.m_cap > 1.0)) throw InputError("nonuniqueness: m_cap must exceed 1");
    if (!(params.m_floor > 0.0 && params.m_floor < 1.0)) throw InputError("nonuniqueness: m_floor must lie in (0, 1)");
    const double horizon = std::log(params.m_cap);
    const Vector zero = Vector::Zero(2);

    VfpMap map;
    map.name = "nonuniqueness";
    map.dim = 2;
    map.rule = [params](const EmpiricalMeasure& m) { return covariance_ellipse_vfp(covariance(m), params); };
    const double radius = params.axis_scale * std::sqrt(params.m_cap);
    map.support_radius = radius;
    map.moment_bound = radius * radius;

    const auto first = [params, zero](double t) {
        return gaussian_grid_cloud(zero, Vector{{t + 1.0, std::exp(t)}}.asDiagonal(), params.per_axis);
    };
    const auto second = [params, zero](double t) {
        return gaussian_grid_cloud(zero, Vector{{std::exp(t), t + 1.0}}.asDiagonal(), params.per_axis);
    };
    Scenario s{"nonuniqueness", map, first(0.0), first};
    s.horizon = horizon;
    s.battery_radius = 2.0;

    const Partition grid = Partition::uniform(horizon, params.steps);
    std::vector<EmpiricalMeasure> s1, s2;
    for (double t : grid.nodes()) {
        s1.push_back(first(t));
        s2.push_back(second(t));
    }
    return {s, MeasureCurve(grid.nodes(), std::move(s1)), MeasureCurve(grid.nodes(), std::move(s2))};
}

Scenario build_scenario(const ScenarioSpec& spec)
{
    const auto& name = spec.name;
    static const std::map<std::string, std::vector<std::string>> known = {
        {"wiener", {"reference_points"}},
        {"drifted_wiener", {"reference_points"}},
        {"isotropic2d", {"reference_per_axis"}},
        {"zero_field", {"dim"}},
        {"gaussian_heat", {"dim", "reference_per_axis"}},
        {"clt", {"reference_points"}},
        {"nonuniqueness", {"m_cap", "m_floor", "k_atoms", "axis_scale", "per_axis", "steps"}},
    };
    const auto entry = known.find(name);
    if (entry == known.end()) throw InputError("unknown scenario '" + name + "'");
    for (const auto& [key, value] : spec.params)
        if (std::find(entry->second.begin(), entry->second.end(), key) == entry->second.end())
            throw InputError("scenario '" + name + "' has no parameter '" + key + "'");
    for (const auto& [key, value] : spec.options)
        if (name != "nonuniqueness" || key != "convention")
            throw InputError("scenario '" + name + "' has no option '" + key + "'");
    if (spec.atoms && name != "clt") throw InputError("only the clt scenario takes atoms");
    if (name == "wiener") return wiener(get_count(spec, "reference_points", 10000));
    if (name == "drifted_wiener") return drifted_wiener(get_count(spec, "reference_points", 10000));
    if (name == "isotropic2d") return isotropic2d(get_count(spec, "reference_per_axis", 100));
    if (name == "zero_field") return zero_field(get_count(spec, "dim", 1));
    if (name == "gaussian_heat") return gaussian_heat(get_count(spec, "dim", 2), get_count(spec, "reference_per_axis", 64));
    if (name == "clt") {
        if (!spec.atoms) {
            Matrix pts(1, 2);
            pts << -0.5, 2.0;
            return clt(EmpiricalMeasure(pts, Vector{{0.8, 0.2}}), get_count(spec, "reference_points", 10000));
        }
        return clt(*spec.atoms, get_count(spec, "reference_points", 10000));
    }
    if (name == "nonuniqueness") {
        NonuniquenessParams p;
        p.m_cap = get(spec, "m_cap", p.m_cap);
        p.m_floor = get(spec, "m_floor", p.m_floor);
        p.k_atoms = static_cast<int>(get_count(spec, "k_atoms", p.k_atoms));
        p.axis_scale = get(spec, "axis_scale", p.axis_scale);
        p.per_axis = get_count(spec, "per_axis", p.per_axis);
        p.steps = static_cast<int>(get_count(spec, "steps", p.steps));
        if (const auto it = spec.options.find("convention"); it != spec.options.end()) {
            if (it->second == "angle") p.convention = EllipseConvention::AngleUniform;
            else if (it->second == "arc_length") p.convention = EllipseConvention::ArcLengthUniform;
            else throw InputError("nonuniqueness: convention must be 'angle' or 'arc_length'");
        }
        return nonuniqueness(p).scenario;
    }
    throw InputError("unknown scenario '" + name + "'");
}

}  // namespace mde
