#include "mde/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mde/errors.hpp"
#include "mde/parallel.hpp"

namespace mde {

std::string to_string(TransportMethod m)
{
    switch (m) {
    case TransportMethod::Auto: return "auto";
    case TransportMethod::Exact1D: return "exact1d";
    case TransportMethod::Assignment: return "assignment";
    case TransportMethod::Sinkhorn: return "sinkhorn";
    }
    return "unknown";
}

TransportMethod parse_transport_method(const std::string& name)
{
    std::string key = name;
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    if (key == "auto") return TransportMethod::Auto;
    if (key == "exact1d") return TransportMethod::Exact1D;
    if (key == "assignment") return TransportMethod::Assignment;
    if (key == "sinkhorn") return TransportMethod::Sinkhorn;
    throw InputError("unknown transport method '" + name + "'");
}

namespace {

double ground_cost(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y, double p)
{
    const double d = (x - y).norm();
    return p == 2.0 ? d * d : std::pow(d, p);
}

// Fixed argument order so that swapping the inputs reproduces the same
// floating-point operations.
bool precedes(const EmpiricalMeasure& a, const EmpiricalMeasure& b)
{
    if (a.size() != b.size()) return a.size() < b.size();
    const auto* pa = a.points().data();
    const auto* pb = b.points().data();
    const auto n = a.points().size();
    if (!std::equal(pa, pa + n, pb))
        return std::lexicographical_compare(pa, pa + n, pb, pb + n);
    const auto* wa = a.weights().data();
    const auto* wb = b.weights().data();
    return std::lexicographical_compare(wa, wa + a.size(), wb, wb + b.size());
}

std::vector<Index> sorted_order(const EmpiricalMeasure& m)
{
    std::vector<Index> order(static_cast<std::size_t>(m.size()));
    std::iota(order.begin(), order.end(), Index{0});
    const auto& pts = m.points();
    const bool already = std::is_sorted(order.begin(), order.end(),
                                        [&](Index i, Index j) { return pts(0, i) < pts(0, j); });
    if (!already)
        std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return pts(0, i) < pts(0, j); });
    return order;
}

double exact_1d_cost(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p)
{
    const auto ia = sorted_order(a);
    const auto ib = sorted_order(b);
    std::size_t i = 0, j = 0;
    double ra = a.weight(ia[0]);
    double rb = b.weight(ib[0]);
    double total = 0.0;
    while (i < ia.size() && j < ib.size()) {
        const double mass = std::min(ra, rb);
        const double d = std::abs(a.points()(0, ia[i]) - b.points()(0, ib[j]));
        total += mass * (p == 2.0 ? d * d : std::pow(d, p));
        ra -= mass;
        rb -= mass;
        const bool advance_a = ra <= 1e-15;
        const bool advance_b = rb <= 1e-15;
        if (advance_a) {
            if (++i < ia.size()) ra = a.weight(ia[i]);
        }
        if (advance_b) {
            if (++j < ib.size()) rb = b.weight(ib[j]);
        }
        if (!advance_a && !advance_b) break;  // unreachable: one side is always exhausted
    }
    return total;
}

Matrix cost_matrix(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p)
{
    Matrix c(a.size(), b.size());
    parallel_for(static_cast<std::size_t>(a.size()), [&](std::size_t r) {
        const Index i = static_cast<Index>(r);
        for (Index j = 0; j < b.size(); ++j) c(i, j) = ground_cost(a.points().col(i), b.points().col(j), p);
    });
    return c;
}

double log_sum_exp(const double* values, Index n)
{
    double hi = -std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) hi = std::max(hi, values[k]);
    if (!std::isfinite(hi)) return hi;
    double s = 0.0;
    for (Index k = 0; k < n; ++k) s += std::exp(values[k] - hi);
    return hi + std::log(s);
}

struct SinkhornResult {
    double upper = 0.0;  // primal cost of a feasible rounded plan
    double lower = 0.0;  // dual objective of a c-feasible potential pair
    int iterations = 0;
};

SinkhornResult sinkhorn(const Vector& wa, const Vector& wb, const Matrix& c, const SinkhornOptions& opt)
{
    const Index n = c.rows(), m = c.cols();
    std::vector<double> entries(c.data(), c.data() + c.size());
    std::nth_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(entries.size() / 2),
                     entries.end());
    double median = entries[entries.size() / 2];
    if (median <= 0.0) median = c.mean();
    if (median <= 0.0) return {};  // every pair coincides

    const double target_eps = opt.epsilon_scale * median;
    const Vector log_a = wa.array().log();
    const Vector log_b = wb.array().log();
    Vector f = Vector::Zero(n), g = Vector::Zero(m);
    std::vector<double> buf(static_cast<std::size_t>(std::max(n, m)));

    double omega = 1.0;
    auto update_f = [&](double eps) {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < m; ++j) buf[static_cast<std::size_t>(j)] = (g(j) - c(i, j)) / eps + log_b(j);
            f(i) = (1.0 - omega) * f(i) - omega * eps * log_sum_exp(buf.data(), m);
        }
    };
    auto update_g = [&](double eps) {
        for (Index j = 0; j < m; ++j) {
            for (Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = (f(i) - c(i, j)) / eps + log_a(i);
            g(j) = (1.0 - omega) * g(j) - omega * eps * log_sum_exp(buf.data(), n);
        }
    };
    auto plan = [&](double eps) {
        Matrix pi(n, m);
        for (Index j = 0; j < m; ++j)
            for (Index i = 0; i < n; ++i)
                pi(i, j) = std::exp((f(i) + g(j) - c(i, j)) / eps + log_a(i) + log_b(j));
        return pi;
    };

    // epsilon scaling: warm-start the target problem from coarser ones
    double eps = std::max(target_eps, c.maxCoeff());
    int iterations = 0;
    while (eps > target_eps) {
        for (int k = 0; k < 10; ++k) {
            update_f(eps);
            update_g(eps);
        }
        eps = std::max(target_eps, 0.5 * eps);
    }
    // Over-relaxed updates share the fixed point of plain Sinkhorn and
    // converge much faster near it; drop back to plain updates whenever the
    // marginal violation stops shrinking.
    omega = opt.relaxation;
    double violation = std::numeric_limits<double>::infinity();
    Matrix pi;
    while (iterations < opt.max_iterations) {
        update_f(eps);
        update_g(eps);
        ++iterations;
        if (iterations % 10 == 0 || iterations == 1) {
            pi = plan(eps);
            const double previous = violation;
            violation = (pi.rowwise().sum() - wa).lpNorm<1>();
            if (violation < opt.tolerance) break;
            if (violation > previous) omega = 1.0;
        }
    }
    if (!(violation < opt.tolerance)) {
        std::ostringstream os;
        os << "sinkhorn did not converge after " << iterations << " iterations; L1 marginal violation "
           << violation;
        throw NumericalError(os.str());
    }

    // Round to a plan with exact marginals.
    Vector rows = pi.rowwise().sum();
    for (Index i = 0; i < n; ++i)
        if (rows(i) > wa(i)) pi.row(i) *= wa(i) / rows(i);
    Vector cols = pi.colwise().sum().transpose();
    for (Index j = 0; j < m; ++j)
        if (cols(j) > wb(j)) pi.col(j) *= wb(j) / cols(j);
    const Vector err_a = (wa - pi.rowwise().sum()).cwiseMax(0.0);
    const Vector err_b = (wb - pi.colwise().sum().transpose()).cwiseMax(0.0);
    const double err_mass = err_a.sum();
    if (err_mass > 0.0) pi += err_a * err_b.transpose() / err_mass;
    const double upper = (pi.array() * c.array()).sum();

    // c-transforms give dual feasible potentials.
    Vector gc(m);
    for (Index j = 0; j < m; ++j) gc(j) = (c.col(j) - f).minCoeff();
    Vector fc(n);
    for (Index i = 0; i < n; ++i) fc(i) = (c.row(i).transpose() - gc).minCoeff();
    const double lower = wa.dot(fc) + wb.dot(gc);
    return {upper, std::min(lower, upper), iterations};
}

}  // namespace

std::vector<Index> solve_assignment(const Matrix& cost)
{
    const Index n = cost.rows();
    if (cost.cols() != n) throw InputError("assignment needs a square cost matrix");
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays, column 0 is the virtual start
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<Index> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
    std::vector<double> minv(static_cast<std::size_t>(n + 1));
    std::vector<char> used(static_cast<std::size_t>(n + 1));
    for (Index i = 1; i <= n; ++i) {
        match[0] = i;
        Index j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const Index i0 = match[static_cast<std::size_t>(j0)];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                const auto js = static_cast<std::size_t>(j);
                if (used[js]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[js];
                if (cur < minv[js]) {
                    minv[js] = cur;
                    way[js] = j0;
                }
                if (minv[js] < delta) {
                    delta = minv[js];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                const auto js = static_cast<std::size_t>(j);
                if (used[js]) {
                    u[static_cast<std::size_t>(match[js])] += delta;
                    v[js] -= delta;
                } else {
                    minv[js] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<std::size_t>(j0)] != 0);
        do {
            const Index j1 = way[static_cast<std::size_t>(j0)];
            match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Index> row_to_col(static_cast<std::size_t>(n));
    for (Index j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

TransportPlanReport wasserstein(const EmpiricalMeasure& a_in, const EmpiricalMeasure& b_in, double p,
                                TransportMethod method, const SinkhornOptions& sinkhorn_opt)
{
    if (a_in.dim() != b_in.dim()) throw InputError("wasserstein: dimension mismatch");
    if (!(p >= 1.0)) throw InputError("wasserstein: p must be >= 1");
    const bool swap = precedes(b_in, a_in);
    const EmpiricalMeasure& a = swap ? b_in : a_in;
    const EmpiricalMeasure& b = swap ? a_in : b_in;

    const bool assignable = a.size() == b.size() && a.has_equal_weights() && b.has_equal_weights();
    if (method == TransportMethod::Auto) {
        if (a.dim() == 1)
            method = TransportMethod::Exact1D;
        else if (assignable && a.size() <= kAssignmentAutoLimit)
            method = TransportMethod::Assignment;
        else
            method = TransportMethod::Sinkhorn;
    }

    TransportPlanReport report;
    report.method = method;
    switch (method) {
    case TransportMethod::Exact1D: {
        if (a.dim() != 1) throw InputError("Exact1D requires dimension 1");
        report.cost = std::pow(exact_1d_cost(a, b, p), 1.0 / p);
        break;
    }
    case TransportMethod::Assignment: {
        if (!assignable)
            throw InputError("Assignment requires equal-weight clouds with equal particle counts");
        const Matrix c = cost_matrix(a, b, p);
        const auto match = solve_assignment(c);
        double total = 0.0;
        for (Index i = 0; i < a.size(); ++i) total += c(i, match[static_cast<std::size_t>(i)]);
        report.cost = std::pow(total / static_cast<double>(a.size()), 1.0 / p);
        break;
    }
    case TransportMethod::Sinkhorn: {
        if (static_cast<double>(a.size()) * static_cast<double>(b.size()) > 2.5e7)
            throw InputError("cloud pair too large for Sinkhorn; resample first");
        const Matrix c = cost_matrix(a, b, p);
        const auto res = sinkhorn(a.weights(), b.weights(), c, sinkhorn_opt);
        report.cost = std::pow(std::max(res.upper, 0.0), 1.0 / p);
        report.gap_bound = report.cost - std::pow(std::max(res.lower, 0.0), 1.0 / p);
        report.iterations = res.iterations;
        break;
    }
    case TransportMethod::Auto: break;
    }
    return report;
}

double wasserstein_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p, TransportMethod method)
{
    return wasserstein(a, b, p, method).cost;
}

double w1_duality_lower_bound(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                              const std::vector<LipschitzWitness>& witnesses)
{
    double best = 0.0;
    for (const auto& w : witnesses) {
        const double scale = std::max(1.0, w.lipschitz);
        const double gap = std::abs(a.integrate(w.f) - b.integrate(w.f)) / scale;
        best = std::max(best, gap);
    }
    return best;
}

std::vector<LipschitzWitness> piecewise_linear_witnesses(int count, double lo, double hi)
{
    std::vector<LipschitzWitness> out;
    out.push_back({[](const Vector& x) { return x(0); }, 1.0});
    const int hinges = std::max(0, count - 1);
    const int abs_count = (hinges + 1) / 2;
    const int ramp_count = hinges - abs_count;
    for (int k = 0; k < abs_count; ++k) {
        const double c = abs_count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (abs_count - 1);
        out.push_back({[c](const Vector& x) { return std::abs(x(0) - c); }, 1.0});
    }
    for (int k = 0; k < ramp_count; ++k) {
        const double c = ramp_count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (ramp_count - 1);
        out.push_back({[c](const Vector& x) { return std::min(x(0), c); }, 1.0});
    }
    return out;
}

double curve_sup_distance(const MeasureCurve& c1, const MeasureCurve& c2, double p, TransportMethod method)
{
    if (c1.size() != c2.size()) throw InputError("curve_sup_distance: time grids differ in length");
    for (std::size_t i = 0; i < c1.size(); ++i) {
        const double t1 = c1.times()[i], t2 = c2.times()[i];
        if (std::abs(t1 - t2) > 1e-12 * std::max(1.0, std::abs(t1)))
            throw InputError("curve_sup_distance: time grids differ");
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < c1.size(); ++i)
        sup = std::max(sup, wasserstein(c1.state(i), c2.state(i), p, method).cost);
    return sup;
}

}  // namespace mde
