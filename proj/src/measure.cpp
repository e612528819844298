#include "mde/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mde/errors.hpp"
#include "mde/parallel.hpp"

namespace mde {

namespace {

constexpr double kRenormalizeTol = 1e-9;

Vector checked_weights(const Matrix& points, Vector weights)
{
    if (points.cols() == 0) throw InputError("empirical measure needs at least one particle");
    if (weights.size() != points.cols()) {
        std::ostringstream os;
        os << "weights/points length mismatch: " << weights.size() << " vs " << points.cols();
        throw InputError(os.str());
    }
    if (!points.allFinite()) throw InputError("empirical measure has non-finite coordinates");
    for (Index i = 0; i < weights.size(); ++i) {
        if (!std::isfinite(weights(i)) || weights(i) < 0.0) {
            std::ostringstream os;
            os << "invalid weight " << weights(i) << " at particle " << i;
            throw InputError(os.str());
        }
    }
    const double total = weights.sum();
    if (std::abs(total - 1.0) > kRenormalizeTol) {
        std::ostringstream os;
        os.precision(17);
        os << "weights sum to " << total << ", expected 1";
        throw InputError(os.str());
    }
    if (total != 1.0) weights /= total;
    return weights;
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(checked_weights(points_, std::move(weights)))
{
}

EmpiricalMeasure EmpiricalMeasure::uniform(Matrix points)
{
    const Index n = points.cols();
    if (n == 0) throw InputError("empirical measure needs at least one particle");
    return EmpiricalMeasure(std::move(points), Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

EmpiricalMeasure EmpiricalMeasure::dirac(const Vector& x)
{
    Matrix pts = x;
    return EmpiricalMeasure(std::move(pts), Vector::Ones(1));
}

bool EmpiricalMeasure::has_equal_weights(double tol) const
{
    const double expected = 1.0 / static_cast<double>(size());
    return ((weights_.array() - expected).abs() <= tol * expected).all();
}

Vector EmpiricalMeasure::mean() const { return points_ * weights_; }

double EmpiricalMeasure::integrate(const std::function<double(const Vector&)>& f) const
{
    double sum = 0.0;
    for (Index i = 0; i < size(); ++i) sum += weights_(i) * f(points_.col(i));
    return sum;
}

MeasureCurve::MeasureCurve(std::vector<double> times, std::vector<EmpiricalMeasure> states)
    : times_(std::move(times)), states_(std::move(states))
{
    if (times_.empty()) throw InputError("measure curve needs at least one state");
    if (times_.size() != states_.size()) throw InputError("curve times/states length mismatch");
    if (times_.front() != 0.0) throw InputError("curve must start at time 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) throw InputError("curve times must increase strictly");
        if (states_[i].dim() != states_[0].dim()) throw InputError("curve states differ in dimension");
    }
}

std::size_t MeasureCurve::node_index(double t) const
{
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (std::abs(times_[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
    }
    std::ostringstream os;
    os << "time " << t << " is not a node of the curve";
    throw InputError(os.str());
}

bool MeasureCurve::has_node(double t) const
{
    return std::any_of(times_.begin(), times_.end(), [t](double s) {
        return std::abs(s - t) <= 1e-12 * std::max(1.0, std::abs(t));
    });
}

double moment(const EmpiricalMeasure& m, const Vector& x0, double p)
{
    if (x0.size() != m.dim()) throw InputError("moment: center has wrong dimension");
    if (!(p >= 1.0)) throw InputError("moment: p must be >= 1");
    double sum = 0.0;
    for (Index i = 0; i < m.size(); ++i) {
        const double d = (m.points().col(i) - x0).norm();
        sum += m.weight(i) * std::pow(d, p);
    }
    return sum;
}

Matrix covariance(const EmpiricalMeasure& m)
{
    const Vector mu = m.mean();
    const Matrix centered = m.points().colwise() - mu;
    Matrix cov = centered * m.weights().asDiagonal() * centered.transpose();
    return 0.5 * (cov + cov.transpose());
}

EmpiricalMeasure pushforward(const EmpiricalMeasure& m, const PointMap& f)
{
    Matrix out(m.dim(), m.size());
    parallel_for(static_cast<std::size_t>(m.size()), [&](std::size_t i) {
        const Index j = static_cast<Index>(i);
        Vector y = f(m.points().col(j));
        if (y.size() != m.dim()) throw InputError("pushforward map changed the dimension");
        out.col(j) = y;
    });
    for (Index i = 0; i < out.cols(); ++i) {
        if (!out.col(i).allFinite()) {
            std::ostringstream os;
            os << "pushforward produced a non-finite value at particle " << i << " (x = "
               << m.points().col(i).transpose() << ")";
            throw InputError(os.str());
        }
    }
    return EmpiricalMeasure(std::move(out), m.weights());
}

EmpiricalMeasure mixture(std::span<const std::pair<double, EmpiricalMeasure>> components)
{
    if (components.empty()) throw InputError("mixture of zero components");
    const Index dim = components.front().second.dim();
    double total = 0.0;
    Index count = 0;
    for (const auto& [w, m] : components) {
        if (!(w >= 0.0)) throw InputError("mixture weights must be nonnegative");
        if (m.dim() != dim) throw InputError("mixture components differ in dimension");
        total += w;
        count += m.size();
    }
    if (std::abs(total - 1.0) > kRenormalizeTol) {
        std::ostringstream os;
        os.precision(17);
        os << "mixture weights sum to " << total << ", expected 1";
        throw InputError(os.str());
    }
    Matrix pts(dim, count);
    Vector wts(count);
    Index offset = 0;
    for (const auto& [w, m] : components) {
        pts.middleCols(offset, m.size()) = m.points();
        wts.segment(offset, m.size()) = (w / total) * m.weights();
        offset += m.size();
    }
    return EmpiricalMeasure(std::move(pts), std::move(wts));
}

namespace {

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

namespace {

// Position along the 2-D Hilbert curve of the cell (x, y) on a 2^bits grid.
std::uint64_t hilbert_index(std::uint64_t x, std::uint64_t y, int bits)
{
    std::uint64_t d = 0;
    for (std::uint64_t s = std::uint64_t{1} << (bits - 1); s > 0; s >>= 1) {
        const std::uint64_t rx = (x & s) ? 1 : 0;
        const std::uint64_t ry = (y & s) ? 1 : 0;
        d += s * s * ((3 * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

// Particle order along a space-filling curve: sorted coordinate in 1-D,
// Hilbert curve in 2-D, Morton (bit-interleaved) order above.
std::vector<Index> spatial_order(const EmpiricalMeasure& m)
{
    const Index n = m.size();
    const Index dim = m.dim();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    if (dim == 1) {
        const auto& p = m.points();
        std::stable_sort(order.begin(), order.end(), [&p](Index a, Index b) { return p(0, a) < p(0, b); });
        return order;
    }
    const Vector lo = m.points().rowwise().minCoeff();
    const Vector span = (m.points().rowwise().maxCoeff() - lo).cwiseMax(1e-300);
    const int bits = dim == 2 ? 30 : std::max(1, static_cast<int>(63 / dim));
    const double cells = std::ldexp(1.0, bits) - 1.0;
    std::vector<std::uint64_t> key(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        std::vector<std::uint64_t> q(static_cast<std::size_t>(dim));
        for (Index k = 0; k < dim; ++k)
            q[static_cast<std::size_t>(k)] =
                static_cast<std::uint64_t>(std::floor((m.points()(k, i) - lo(k)) / span(k) * cells));
        std::uint64_t h = 0;
        if (dim == 2) {
            h = hilbert_index(q[0], q[1], bits);
        } else {
            for (int b = bits - 1; b >= 0; --b)
                for (Index k = 0; k < dim; ++k) h = (h << 1) | ((q[static_cast<std::size_t>(k)] >> b) & 1U);
        }
        key[static_cast<std::size_t>(i)] = h;
    }
    std::stable_sort(order.begin(), order.end(), [&key](Index a, Index b) {
        return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)];
    });
    return order;
}

}  // namespace

EmpiricalMeasure resample(const EmpiricalMeasure& m, Index budget, std::uint64_t seed)
{
    if (budget < 1) throw InputError("resample budget must be >= 1");
    if (m.size() <= budget) return m;

    // Systematic selection along a space-filling order stratifies the
    // draws in space, so the resampled cloud tracks the input far more
    // closely than selection in storage order would.
    const std::vector<Index> order = spatial_order(m);
    std::mt19937_64 rng(seed);
    const double offset = uniform01(rng);
    const double step = 1.0 / static_cast<double>(budget);

    std::vector<Index> picks;
    picks.reserve(static_cast<std::size_t>(budget));
    std::size_t i = 0;
    double cumulative = m.weight(order[0]);
    for (Index k = 0; k < budget; ++k) {
        const double u = (offset + static_cast<double>(k)) * step;
        while (u >= cumulative && i + 1 < order.size()) cumulative += m.weight(order[++i]);
        picks.push_back(order[i]);
    }
    // Fisher-Yates with raw engine output keeps the order bit-reproducible.
    for (std::size_t k = picks.size(); k > 1; --k) {
        const std::size_t j = static_cast<std::size_t>(rng() % k);
        std::swap(picks[k - 1], picks[j]);
    }
    Matrix pts(m.dim(), budget);
    for (Index k = 0; k < budget; ++k) pts.col(k) = m.points().col(picks[static_cast<std::size_t>(k)]);
    return EmpiricalMeasure::uniform(std::move(pts));
}

EmpiricalMeasure to_equal_weights(const EmpiricalMeasure& m, Index max_count)
{
    if (m.has_equal_weights()) return m;
    for (Index q = m.size(); q <= max_count; ++q) {
        std::vector<Index> copies(static_cast<std::size_t>(m.size()));
        Index total = 0;
        bool ok = true;
        for (Index i = 0; i < m.size() && ok; ++i) {
            const double scaled = m.weight(i) * static_cast<double>(q);
            const double rounded = std::round(scaled);
            ok = std::abs(scaled - rounded) <= 1e-9 * std::max(1.0, scaled);
            copies[static_cast<std::size_t>(i)] = static_cast<Index>(rounded);
            total += static_cast<Index>(rounded);
        }
        if (!ok || total != q) continue;
        Matrix pts(m.dim(), q);
        Index col = 0;
        for (Index i = 0; i < m.size(); ++i)
            for (Index c = 0; c < copies[static_cast<std::size_t>(i)]; ++c) pts.col(col++) = m.points().col(i);
        return EmpiricalMeasure::uniform(std::move(pts));
    }
    throw InputError("weights are not multiples of 1/q for any q within the particle budget");
}

double tail_radius(double moment_root, double p, double q, double eps)
{
    if (!(q < p)) throw InputError("tail_radius requires q < p");
    const double ratio = p / (p - q);
    if (std::pow(moment_root, q) * ratio <= eps) return 0.0;
    return std::pow(std::pow(moment_root, p) * ratio, 1.0 / (p - q)) * std::pow(eps, 1.0 / (q - p));
}

double tail_moment(const EmpiricalMeasure& m, const Vector& x0, double radius, double q)
{
    double sum = 0.0;
    for (Index i = 0; i < m.size(); ++i) {
        const double d = (m.points().col(i) - x0).norm();
        if (d > radius) sum += m.weight(i) * std::pow(d, q);
    }
    return sum;
}

}  // namespace mde
