#include "mde/afas.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mde/errors.hpp"
#include "mde/sampling.hpp"

namespace mde {

Partition::Partition(std::vector<double> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.size() < 2) throw InputError("partition needs at least two nodes");
    if (nodes_.front() != 0.0) throw InputError("partition must start at 0");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
        if (!(nodes_[i + 1] > nodes_[i]) || !std::isfinite(nodes_[i + 1]))
            throw InputError("partition nodes must be finite and strictly increasing");
}

Partition Partition::uniform(double horizon, int steps)
{
    if (steps < 1) throw InputError("uniform partition needs at least one step");
    if (!(horizon > 0.0)) throw InputError("partition horizon must be positive");
    std::vector<double> nodes(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) nodes[static_cast<std::size_t>(i)] = horizon * i / steps;
    nodes.back() = horizon;
    return Partition(std::move(nodes));
}

double Partition::max_step() const
{
    double step = 0.0;
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) step = std::max(step, nodes_[i + 1] - nodes_[i]);
    return step;
}

namespace {

int substeps_for(const VectorField& field, const EmpiricalMeasure& m, double t, const AfasConfig& cfg)
{
    if (cfg.flow_substeps > 0) return cfg.flow_substeps;
    double bound = 0.0;
    for (Index i = 0; i < m.size(); ++i) bound = std::max(bound, field.value(m.point(i)).norm());
    return default_substeps(t, bound);
}

EmpiricalMeasure flow_cloud(const VectorField& field, const EmpiricalMeasure& m, double t, const AfasConfig& cfg)
{
    if (const auto* c = field.as_constant()) {
        if (c->v.isZero(0.0) || t == 0.0) return m;
        const Vector shift = t * c->v;
        Matrix pts = m.points().colwise() + shift;
        return EmpiricalMeasure(std::move(pts), m.weights());
    }
    const int steps = substeps_for(field, m, t, cfg);
    return pushforward(m, [&field, t, steps](const Vector& x) { return flow(field, x, t, steps); });
}

MeasureCurve run_scheme(const std::function<Vfp(const EmpiricalMeasure&, double)>& provider,
                        const EmpiricalMeasure& mu0, const Partition& partition, const AfasConfig& cfg)
{
    if (cfg.particle_budget < 1) throw InputError("particle budget must be >= 1");
    if (cfg.flow_substeps < 0) throw InputError("flow substeps must be >= 0");
    const auto& nodes = partition.nodes();
    std::vector<double> times{0.0};
    std::vector<EmpiricalMeasure> states{mu0};
    EmpiricalMeasure state = mu0;
    for (std::size_t l = 0; l + 1 < nodes.size(); ++l) {
        const double t0 = nodes[l];
        const double dt = nodes[l + 1] - t0;
        const Vfp v = provider(state, t0);
        if (v.dim() != state.dim()) throw InputError("vector-field probability and measure differ in dimension");
        AfasConfig step = cfg;
        step.seed = mix_seed(cfg.seed, l);
        EmpiricalMeasure mid = f_flow(v, state, dt, step);
        const Vfp ve = cfg.reevaluate_after_f ? provider(mid, t0) : v;
        state = e_flow(ve, mid, dt, step);
        if (cfg.record_half_steps) {
            times.push_back(t0 + 0.5 * dt);
            states.push_back(std::move(mid));
        }
        times.push_back(nodes[l + 1]);
        states.push_back(state);
    }
    return MeasureCurve(std::move(times), std::move(states));
}

}  // namespace

EmpiricalMeasure e_flow(const Vfp& v, const EmpiricalMeasure& m, double t, const AfasConfig& cfg)
{
    if (t < 0.0) throw InputError("e_flow: t must be >= 0");
    return flow_cloud(barycenter(v), m, t, cfg);
}

EmpiricalMeasure f_flow_unresampled(const Vfp& v, const EmpiricalMeasure& m, double t, const AfasConfig& cfg)
{
    if (t < 0.0) throw InputError("f_flow: t must be >= 0");
    const double root = std::sqrt(t);
    const Vfp centered = centered_atoms(v);
    std::vector<std::pair<double, EmpiricalMeasure>> parts;
    parts.reserve(centered.size());
    for (const auto& a : centered.atoms()) {
        if (a.weight == 0.0) continue;
        parts.emplace_back(a.weight, flow_cloud(a.field, m, root, cfg));
    }
    return mixture(parts);
}

EmpiricalMeasure f_flow(const Vfp& v, const EmpiricalMeasure& m, double t, const AfasConfig& cfg)
{
    return resample(f_flow_unresampled(v, m, t, cfg), cfg.particle_budget, cfg.seed);
}

MeasureCurve build_afas(const VfpMap& map, const EmpiricalMeasure& mu0, const Partition& partition,
                        const AfasConfig& cfg)
{
    if (map.dim != mu0.dim()) throw InputError("build_afas: initial measure has wrong dimension");
    return run_scheme([&map](const EmpiricalMeasure& m, double) { return map(m); }, mu0, partition, cfg);
}

MeasureCurve build_lafas(const std::function<Vfp(double)>& vt, const EmpiricalMeasure& mu0,
                         const Partition& partition, const AfasConfig& cfg)
{
    return run_scheme([&vt](const EmpiricalMeasure&, double t) { return vt(t); }, mu0, partition, cfg);
}

double cloud_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p, Index points,
                      std::uint64_t seed)
{
    if (a.dim() == 1) return wasserstein_distance(a, b, p, TransportMethod::Exact1D);
    const bool assignable = a.size() == b.size() && a.has_equal_weights() && b.has_equal_weights();
    if (assignable && a.size() <= points) return wasserstein_distance(a, b, p, TransportMethod::Assignment);
    const EmpiricalMeasure ra = resample(a, points, mix_seed(seed, 1));
    const EmpiricalMeasure rb = resample(b, points, mix_seed(seed, 2));
    if (ra.size() == rb.size() && ra.has_equal_weights() && rb.has_equal_weights())
        return wasserstein_distance(ra, rb, p, TransportMethod::Assignment);
    return wasserstein_distance(ra, rb, p, TransportMethod::Auto);
}

ConvergenceReport convergence_study(const VfpMap& map, const EmpiricalMeasure& mu0, double horizon,
                                    const std::vector<int>& levels, const AfasConfig& cfg,
                                    const ConvergenceOptions& options)
{
    if (levels.empty()) throw InputError("convergence study needs at least one level");
    for (std::size_t i = 0; i + 1 < levels.size(); ++i)
        if (levels[i + 1] <= levels[i]) throw InputError("convergence levels must be strictly increasing");

    AfasConfig run_cfg = cfg;
    run_cfg.record_half_steps = false;
    const auto dist = [&](const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
        return cloud_distance(a, b, options.p, options.distance_points, cfg.seed);
    };
    std::optional<EmpiricalMeasure> reference;
    if (options.reference) reference = options.reference(horizon);

    ConvergenceReport report;
    std::optional<MeasureCurve> previous;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        MeasureCurve curve = build_afas(map, mu0, Partition::uniform(horizon, levels[i]), run_cfg);
        ConvergenceRow row{levels[i], std::nullopt, std::nullopt};
        if (reference) row.distance_to_reference = dist(curve.final_state(), *reference);
        if (previous) {
            double sup = 0.0;
            for (std::size_t k = 0; k < previous->size(); ++k) {
                const double t = previous->times()[k];
                if (!curve.has_node(t)) continue;
                sup = std::max(sup, dist(previous->state(k), curve.state(curve.node_index(t))));
            }
            report.rows.back().sup_distance_to_next = sup;
        }
        report.rows.push_back(row);
        if (i + 1 == levels.size()) {
            AfasConfig other = run_cfg;
            other.seed = mix_seed(cfg.seed, options.noise_stream);
            const MeasureCurve twin = build_afas(map, mu0, Partition::uniform(horizon, levels[i]), other);
            report.noise_floor = dist(curve.final_state(), twin.final_state());
        }
        previous = std::move(curve);
    }
    for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
        const auto& a = report.rows[i].distance_to_reference;
        const auto& b = report.rows[i + 1].distance_to_reference;
        if (a && b && *b > *a + report.noise_floor) report.monotone = false;
    }
    return report;
}

}  // namespace mde
