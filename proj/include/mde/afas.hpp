#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mde/measure.hpp"
#include "mde/transport.hpp"
#include "mde/vfp.hpp"

namespace mde {

/// Strictly increasing grid 0 = x_0 < ... < x_N = T.
class Partition {
public:
    explicit Partition(std::vector<double> nodes);
    static Partition uniform(double horizon, int steps);

    const std::vector<double>& nodes() const { return nodes_; }
    int steps() const { return static_cast<int>(nodes_.size()) - 1; }
    double horizon() const { return nodes_.back(); }
    double max_step() const;

private:
    std::vector<double> nodes_;
};

struct AfasConfig {
    Index particle_budget = 10000;
    std::uint64_t seed = 0;
    /// RK4 substeps for non-constant fields; 0 picks default_substeps.
    int flow_substeps = 0;
    bool record_half_steps = false;
    /// Evaluate V at the post-f state for the e step instead of at the step
    /// start state.
    bool reevaluate_after_f = false;
};

/// (rho^{Vbar}_t)_* m
EmpiricalMeasure e_flow(const Vfp& v, const EmpiricalMeasure& m, double t, const AfasConfig& cfg);

/// sum_k w_k (rho^{X_k - Vbar}_{sqrt t})_* m, resampled to the particle
/// budget with cfg.seed.
EmpiricalMeasure f_flow(const Vfp& v, const EmpiricalMeasure& m, double t, const AfasConfig& cfg);

/// Same mixture before resampling.
EmpiricalMeasure f_flow_unresampled(const Vfp& v, const EmpiricalMeasure& m, double t, const AfasConfig& cfg);

/// Node values mu(x_{l+1}) = e_{dx} f_{dx} mu(x_l) with V evaluated at
/// mu(x_l). Step l resamples with mix_seed(cfg.seed, l). With
/// record_half_steps the midpoint (x_l + x_{l+1})/2 is recorded as the f
/// output.
MeasureCurve build_afas(const VfpMap& map, const EmpiricalMeasure& mu0, const Partition& partition,
                        const AfasConfig& cfg);

/// As build_afas with the VFP frozen to vt(x_l) on each step.
MeasureCurve build_lafas(const std::function<Vfp(double)>& vt, const EmpiricalMeasure& mu0,
                         const Partition& partition, const AfasConfig& cfg);

using ReferenceCurve = std::function<EmpiricalMeasure(double)>;

struct ConvergenceOptions {
    double p = 2.0;
    /// Closed-form solution evaluated at T; empty means no reference column.
    ReferenceCurve reference;
    /// In dimension > 1 both clouds are resampled to this many equal-weight
    /// points so that distances can be computed by exact assignment.
    Index distance_points = 1000;
    /// Seed offset of the second run at the finest level used for the noise
    /// floor.
    std::uint64_t noise_stream = 0x5eedULL;
};

struct ConvergenceRow {
    int level;
    std::optional<double> sup_distance_to_next;
    std::optional<double> distance_to_reference;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    /// W_p between two seeds at the finest level, final time.
    double noise_floor = 0.0;
    /// distance_to_reference is nonincreasing up to the noise floor.
    bool monotone = true;
};

/// W_p between clouds; in dimension > 1 via equal-weight resampling to
/// `points` particles and exact assignment.
double cloud_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p, Index points,
                      std::uint64_t seed);

ConvergenceReport convergence_study(const VfpMap& map, const EmpiricalMeasure& mu0, double horizon,
                                    const std::vector<int>& levels, const AfasConfig& cfg,
                                    const ConvergenceOptions& options);

}  // namespace mde
