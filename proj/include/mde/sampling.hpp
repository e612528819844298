#pragma once

#include <cstdint>

#include "mde/measure.hpp"

namespace mde {

/// Standard normal quantiles at the midpoints (i + 1/2)/n, rescaled so the
/// set has mean 0 and variance exactly 1.
Vector standard_normal_quantiles(Index n);

/// N(mean, variance) on R^1 by deterministic quantile sampling. Variance 0
/// yields the Dirac at `mean`.
EmpiricalMeasure gaussian_quantile_cloud(double mean, double variance, Index n);

/// N(mean, cov) on R^d from the tensor grid of standard quantiles
/// (per_axis^d points) mapped through a symmetric square root of `cov`.
/// The cloud's mean and covariance match the targets to rounding.
EmpiricalMeasure gaussian_grid_cloud(const Vector& mean, const Matrix& cov, Index per_axis);

/// Seeded Monte Carlo sample of N(mean, cov) with equal weights.
EmpiricalMeasure gaussian_sample_cloud(const Vector& mean, const Matrix& cov, Index n, std::uint64_t seed);

/// Symmetric positive semidefinite square root.
Matrix psd_sqrt(const Matrix& cov);

/// Deterministic 64-bit mixer used to derive per-step seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mde
