#include "mde/vfp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mde/errors.hpp"
#include "mde/transport.hpp"

namespace mde {

VectorFieldProbability::VectorFieldProbability(std::vector<VfpAtom> atoms) : atoms_(std::move(atoms))
{
    if (atoms_.empty()) throw InputError("vector-field probability needs at least one atom");
    dim_ = atoms_.front().field.dim();
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!std::isfinite(a.weight) || a.weight < 0.0)
            throw InputError("vector-field probability: weights must be finite and nonnegative");
        if (a.field.dim() != dim_) throw InputError("vector-field probability: atoms differ in dimension");
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "vector-field probability: weights sum to " << total << ", expected 1";
        throw InputError(os.str());
    }
    for (auto& a : atoms_) a.weight /= total;
}

VectorFieldProbability VectorFieldProbability::dirac(VectorField field)
{
    return VectorFieldProbability({VfpAtom{1.0, std::move(field)}});
}

VectorFieldProbability VectorFieldProbability::constant_atoms(const Matrix& vectors)
{
    if (vectors.cols() == 0) throw InputError("constant_atoms: no vectors");
    std::vector<VfpAtom> atoms;
    atoms.reserve(static_cast<std::size_t>(vectors.cols()));
    const double w = 1.0 / static_cast<double>(vectors.cols());
    for (Index k = 0; k < vectors.cols(); ++k) atoms.push_back({w, VectorField::constant(vectors.col(k))});
    return VectorFieldProbability(std::move(atoms));
}

VectorFieldProbability VectorFieldProbability::from_cloud(const EmpiricalMeasure& m)
{
    std::vector<VfpAtom> atoms;
    atoms.reserve(static_cast<std::size_t>(m.size()));
    for (Index k = 0; k < m.size(); ++k) atoms.push_back({m.weight(k), VectorField::constant(m.point(k))});
    return VectorFieldProbability(std::move(atoms));
}

bool VectorFieldProbability::all_constant() const
{
    return std::all_of(atoms_.begin(), atoms_.end(), [](const VfpAtom& a) { return a.field.is_constant(); });
}

VectorField barycenter(const Vfp& v)
{
    std::vector<double> w;
    std::vector<VectorField> f;
    w.reserve(v.size());
    f.reserve(v.size());
    for (const auto& a : v.atoms()) {
        w.push_back(a.weight);
        f.push_back(a.field);
    }
    return linear_combination(w, f);
}

Vfp centered_atoms(const Vfp& v)
{
    const VectorField bar = barycenter(v);
    std::vector<VfpAtom> atoms;
    atoms.reserve(v.size());
    for (const auto& a : v.atoms()) atoms.push_back({a.weight, a.field - bar});
    return Vfp(std::move(atoms));
}

Vfp symmetrize(const Vfp& v)
{
    const VectorField bar = barycenter(v);
    std::vector<VfpAtom> atoms;
    atoms.reserve(2 * v.size());
    for (const auto& a : v.atoms()) atoms.push_back({0.5 * a.weight, a.field});
    for (const auto& a : v.atoms()) {
        const double c[] = {2.0, -1.0};
        const VectorField f[] = {bar, a.field};
        atoms.push_back({0.5 * a.weight, linear_combination(c, f)});
    }
    return Vfp(std::move(atoms));
}

double vfp_moment(const Vfp& v, double p, const Box& box)
{
    if (p < 1.0) throw InputError("vfp_moment: p must be >= 1");
    double total = 0.0;
    for (const auto& a : v.atoms()) total += a.weight * std::pow(w2inf_norm(a.field, box), p);
    return total;
}

double square_op(const Vfp& v, const TestFunction& phi, const Vector& x, SquareForm form)
{
    const VectorField bar = barycenter(v);
    double second = 0.0;
    double first = 0.0;
    for (const auto& a : v.atoms()) {
        second += a.weight * lie2(a.field - bar, phi, x);
        if (form == SquareForm::Raw) first += a.weight * lie(a.field, phi, x);
    }
    if (form == SquareForm::Reduced) first = lie(bar, phi, x);
    return 0.5 * second + first;
}

double first_order_centered_term(const Vfp& v, const TestFunction& phi, const Vector& x)
{
    const VectorField bar = barycenter(v);
    double total = 0.0;
    for (const auto& a : v.atoms()) total += a.weight * lie(a.field - bar, phi, x);
    return total;
}

SquareOperator::SquareOperator(const Vfp& v) : centered_(centered_atoms(v)), bar_(barycenter(v))
{
    constant_ = v.all_constant();
    if (constant_) {
        const Index n = v.dim();
        a_centered_ = Matrix::Zero(n, n);
        for (const auto& a : centered_.atoms()) {
            const Vector& c = a.field.as_constant()->v;
            a_centered_.noalias() += a.weight * c * c.transpose();
        }
        bar_value_ = bar_.as_constant()->v;
    }
}

double SquareOperator::operator()(const TestFunction& phi, const Vector& x) const
{
    if (constant_) {
        const double second = (a_centered_.cwiseProduct(phi.hessian(x))).sum();
        double first = 0.0;
        if (!bar_value_.isZero(0.0)) first = phi.gradient(x).dot(bar_value_);
        return 0.5 * second + first;
    }
    double second = 0.0;
    for (const auto& a : centered_.atoms()) second += a.weight * lie2(a.field, phi, x);
    return 0.5 * second + lie(bar_, phi, x);
}

Coefficients coefficients(const Vfp& v, const Vector& x)
{
    const Index n = v.dim();
    Coefficients c{Matrix::Zero(n, n), Vector::Zero(n), Matrix::Zero(n, n)};
    const Vector bar = barycenter(v).value(x);
    for (const auto& a : v.atoms()) {
        const Vector val = a.field.value(x);
        c.a.noalias() += a.weight * val * val.transpose();
        if (!a.field.is_constant()) c.b.noalias() += a.weight * a.field.jacobian(x) * val;
        const Vector d = val - bar;
        c.a_centered.noalias() += a.weight * d * d.transpose();
    }
    return c;
}

double ellipticity(const Vfp& v, const std::vector<Vector>& sample_points)
{
    if (sample_points.empty()) throw InputError("ellipticity: no sample points");
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& x : sample_points) {
        const Matrix ac = coefficients(v, x).a_centered;
        Eigen::SelfAdjointEigenSolver<Matrix> es(ac, Eigen::EigenvaluesOnly);
        lowest = std::min(lowest, es.eigenvalues()(0));
    }
    return lowest;
}

Vfp elliptic_regularize(const Vfp& v, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("elliptic_regularize: eps must lie in (0, 1)");
    const Index n = v.dim();
    std::vector<VfpAtom> atoms;
    atoms.reserve(v.size() + static_cast<std::size_t>(n));
    for (const auto& a : v.atoms()) atoms.push_back({(1.0 - eps) * a.weight, a.field});
    for (Index j = 0; j < n; ++j) atoms.push_back({eps / static_cast<double>(n), VectorField::constant(Vector::Unit(n, j))});
    return Vfp(std::move(atoms));
}

VfpDistance vfp_distance(const Vfp& a, const Vfp& b, double p, const Box& box)
{
    if (a.dim() != b.dim()) throw InputError("vfp_distance: dimension mismatch");
    if (a.all_constant() && b.all_constant()) {
        const auto cloud = [](const Vfp& v) {
            Matrix pts(v.dim(), static_cast<Index>(v.size()));
            Vector w(static_cast<Index>(v.size()));
            for (std::size_t k = 0; k < v.size(); ++k) {
                pts.col(static_cast<Index>(k)) = v.atoms()[k].field.as_constant()->v;
                w(static_cast<Index>(k)) = v.atoms()[k].weight;
            }
            return EmpiricalMeasure(std::move(pts), std::move(w));
        };
        const auto report = wasserstein(cloud(a), cloud(b), p);
        return {report.cost, report.method != TransportMethod::Sinkhorn};
    }
    if (a.size() != b.size()) throw InputError("vfp_distance: index matching needs equal atom counts");
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto& x = a.atoms()[k];
        const auto& y = b.atoms()[k];
        if (std::abs(x.weight - y.weight) > 1e-12)
            throw InputError("vfp_distance: index matching needs equal atom weights");
        total += x.weight * std::pow(w2inf_norm(x.field - y.field, box), p);
    }
    return {std::pow(total, 1.0 / p), false};
}

VfpMap constant_map(std::string name, Vfp v)
{
    VfpMap map;
    map.name = std::move(name);
    map.dim = v.dim();
    map.rule = [v = std::move(v)](const EmpiricalMeasure&) { return v; };
    map.lipschitz_bound = 0.0;
    map.state_independent = true;
    return map;
}

VfpMap elliptic_regularize(const VfpMap& map, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("elliptic_regularize: eps must lie in (0, 1)");
    VfpMap out = map;
    out.name = map.name + "+elliptic";
    out.rule = [rule = map.rule, eps](const EmpiricalMeasure& m) { return elliptic_regularize(rule(m), eps); };
    if (map.lipschitz_bound) out.lipschitz_bound = *map.lipschitz_bound;
    if (map.support_radius) out.support_radius = std::max(*map.support_radius, 1.0);
    if (map.moment_bound) out.moment_bound = std::max(*map.moment_bound, 1.0);
    return out;
}

SpotCheck check_support_radius(const VfpMap& map, const std::vector<EmpiricalMeasure>& samples, const Box& box)
{
    SpotCheck check;
    if (!map.support_radius) return check;
    const double r = *map.support_radius;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const Vfp v = map(samples[s]);
        for (const auto& a : v.atoms()) {
            const double norm = w2inf_norm(a.field, box);
            check.worst = std::max(check.worst, r > 0.0 ? norm / r : norm);
            if (norm > r * (1.0 + 1e-12) + 1e-12) {
                check.ok = false;
                std::ostringstream os;
                os << map.name << ": atom norm " << norm << " exceeds R = " << r << " on sample " << s;
                check.detail = os.str();
            }
        }
    }
    return check;
}

SpotCheck check_moment_bound(const VfpMap& map, const std::vector<EmpiricalMeasure>& samples, double p,
                             const Box& box)
{
    SpotCheck check;
    if (!map.moment_bound) return check;
    const double b = *map.moment_bound;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const double m = vfp_moment(map(samples[s]), p, box);
        check.worst = std::max(check.worst, b > 0.0 ? m / b : m);
        if (m > b * (1.0 + 1e-12) + 1e-12) {
            check.ok = false;
            std::ostringstream os;
            os << map.name << ": M_p = " << m << " exceeds B = " << b << " on sample " << s;
            check.detail = os.str();
        }
    }
    return check;
}

SpotCheck check_lipschitz(const VfpMap& map, const std::vector<EmpiricalMeasure>& samples, double p,
                          const Box& box)
{
    SpotCheck check;
    if (!map.lipschitz_bound) return check;
    const double lip = *map.lipschitz_bound;
    for (std::size_t s = 0; s + 1 < samples.size(); ++s) {
        const double dv = vfp_distance(map(samples[s]), map(samples[s + 1]), p, box).value;
        const double dm = wasserstein_distance(samples[s], samples[s + 1], p);
        const double allowed = lip * dm + 1e-9;
        if (dm > 0.0) check.worst = std::max(check.worst, dv / dm);
        if (dv > allowed) {
            check.ok = false;
            std::ostringstream os;
            os << map.name << ": W_p(V[mu], V[nu]) = " << dv << " exceeds L W_p(mu, nu) = " << lip * dm
               << " on pair " << s;
            check.detail = os.str();
        }
    }
    return check;
}

}  // namespace mde
