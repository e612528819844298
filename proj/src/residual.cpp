#include "mde/residual.hpp"

#include <algorithm>
#include <cmath>

#include "mde/errors.hpp"
#include "mde/parallel.hpp"

namespace mde {

namespace {

// Per-node values of int phi dmu(t_i) and int square_op phi dmu(t_i).
struct NodeIntegrals {
    std::vector<double> mass;
    std::vector<double> rate;
};

std::vector<SquareOperator> node_operators(const MeasureCurve& curve, const VfpMap& map, std::size_t last)
{
    if (map.dim != curve.dim()) throw InputError("residual: curve and vector-field probability differ in dimension");
    std::vector<SquareOperator> ops;
    ops.reserve(last + 1);
    std::optional<Vfp> shared;
    if (map.state_independent) shared = map(curve.state(0));
    for (std::size_t i = 0; i <= last; ++i) ops.emplace_back(shared ? *shared : map(curve.state(i)));
    return ops;
}

NodeIntegrals integrate_nodes(const MeasureCurve& curve, const std::vector<SquareOperator>& ops,
                              const TestFunction& phi)
{
    const std::size_t count = ops.size();
    NodeIntegrals out{std::vector<double>(count), std::vector<double>(count)};
    parallel_for(count, [&](std::size_t i) {
        const EmpiricalMeasure& m = curve.state(i);
        double mass = 0.0, rate = 0.0;
        for (Index k = 0; k < m.size(); ++k) {
            const Vector x = m.point(k);
            mass += m.weight(k) * phi.value(x);
            rate += m.weight(k) * ops[i](phi, x);
        }
        out.mass[i] = mass;
        out.rate[i] = rate;
    });
    return out;
}

double trapezoid(const std::vector<double>& times, const std::vector<double>& f, std::size_t from, std::size_t to,
                 std::size_t stride = 1)
{
    double q = 0.0;
    for (std::size_t i = from; i + stride <= to; i += stride)
        q += 0.5 * (times[i + stride] - times[i]) * (f[i] + f[i + stride]);
    return q;
}

double residual_of(const MeasureCurve& curve, const NodeIntegrals& n, std::size_t from, std::size_t to)
{
    return std::abs(n.mass[to] - n.mass[from] - trapezoid(curve.times(), n.rate, from, to));
}

}  // namespace

double weak_residual_between(const MeasureCurve& curve, const VfpMap& map, const TestFunction& phi, double u,
                             double s)
{
    const std::size_t from = curve.node_index(u);
    const std::size_t to = curve.node_index(s);
    if (from > to) throw InputError("weak_residual: interval end precedes its start");
    const auto ops = node_operators(curve, map, to);
    return residual_of(curve, integrate_nodes(curve, ops, phi), from, to);
}

double weak_residual(const MeasureCurve& curve, const VfpMap& map, const TestFunction& phi, double s)
{
    return weak_residual_between(curve, map, phi, 0.0, s);
}

ResidualReport residual_suite(const MeasureCurve& curve, const VfpMap& map, const std::vector<TestFunction>& battery,
                              const std::vector<double>& sample_times)
{
    ResidualReport report;
    if (battery.empty() || sample_times.empty()) return report;
    std::vector<std::size_t> idx;
    idx.reserve(sample_times.size());
    for (double s : sample_times) idx.push_back(curve.node_index(s));
    const std::size_t last = *std::max_element(idx.begin(), idx.end());
    const auto ops = node_operators(curve, map, last);
    const auto& times = curve.times();

    for (const auto& phi : battery) {
        const NodeIntegrals n = integrate_nodes(curve, ops, phi);
        double worst = 0.0;
        for (std::size_t to : idx) {
            worst = std::max(worst, residual_of(curve, n, 0, to));
            if (to >= 2 && to % 2 == 0) {
                const double fine = trapezoid(times, n.rate, 0, to);
                const double coarse = trapezoid(times, n.rate, 0, to, 2);
                report.quadrature_error_estimate =
                    std::max(report.quadrature_error_estimate, std::abs(fine - coarse) / 3.0);
            }
        }
        report.per_phi.emplace_back(phi.id, worst);
        report.max_residual = std::max(report.max_residual, worst);
    }
    return report;
}

}  // namespace mde
