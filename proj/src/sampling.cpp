#include "mde/sampling.hpp"

#include <cmath>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "mde/errors.hpp"

namespace mde {

Vector standard_normal_quantiles(Index n)
{
    if (n < 1) throw InputError("quantile count must be >= 1");
    if (n == 1) return Vector::Zero(1);
    const boost::math::normal_distribution<double> normal;
    Vector q(n);
    for (Index i = 0; i < n; ++i) {
        const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        q(i) = boost::math::quantile(normal, u);
    }
    // exact antisymmetry, then unit variance
    for (Index i = 0; i < n / 2; ++i) {
        const double a = 0.5 * (q(n - 1 - i) - q(i));
        q(i) = -a;
        q(n - 1 - i) = a;
    }
    if (n % 2 == 1) q(n / 2) = 0.0;
    const double var = q.squaredNorm() / static_cast<double>(n);
    return q / std::sqrt(var);
}

EmpiricalMeasure gaussian_quantile_cloud(double mean, double variance, Index n)
{
    if (variance < 0.0) throw InputError("negative variance");
    if (variance == 0.0) return EmpiricalMeasure::dirac(Vector::Constant(1, mean));
    Matrix pts = (standard_normal_quantiles(n) * std::sqrt(variance)).array() + mean;
    return EmpiricalMeasure::uniform(pts.transpose());
}

Matrix psd_sqrt(const Matrix& cov)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
    const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

EmpiricalMeasure gaussian_grid_cloud(const Vector& mean, const Matrix& cov, Index per_axis)
{
    const Index d = mean.size();
    if (cov.rows() != d || cov.cols() != d) throw InputError("covariance shape mismatch");
    if (cov.isZero(0.0)) return EmpiricalMeasure::dirac(mean);
    const Vector q = standard_normal_quantiles(per_axis);
    Index total = 1;
    for (Index k = 0; k < d; ++k) total *= per_axis;
    Matrix grid(d, total);
    for (Index j = 0; j < total; ++j) {
        Index rest = j;
        for (Index k = 0; k < d; ++k) {
            grid(k, j) = q(rest % per_axis);
            rest /= per_axis;
        }
    }
    const bool diagonal = cov.isDiagonal(0.0);
    if (diagonal) {
        grid = cov.diagonal().cwiseMax(0.0).cwiseSqrt().asDiagonal() * grid;
    } else {
        grid = psd_sqrt(cov) * grid;
    }
    grid.colwise() += mean;
    return EmpiricalMeasure::uniform(std::move(grid));
}

EmpiricalMeasure gaussian_sample_cloud(const Vector& mean, const Matrix& cov, Index n, std::uint64_t seed)
{
    const Index d = mean.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(d, n);
    for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < d; ++k) z(k, j) = normal(rng);
    const Eigen::LLT<Matrix> llt(cov);
    Matrix factor = llt.info() == Eigen::Success ? Matrix(llt.matrixL()) : psd_sqrt(cov);
    Matrix pts = factor * z;
    pts.colwise() += mean;
    return EmpiricalMeasure::uniform(std::move(pts));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace mde
