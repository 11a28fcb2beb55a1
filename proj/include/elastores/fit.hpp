#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace elastores {

// Least-squares slope of log(y) against log(x); the usual convergence-order
// estimator for (parameter, error) samples.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = std::min(x.size(), y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Deterministic power-iteration estimate of the spectral norm (largest
// singular value); accurate to far better than the order-fit needs.
inline double spectral_norm_estimate(const Eigen::MatrixXcd& a, int iters = 120) {
    if (a.size() == 0) return 0.0;
    Eigen::VectorXcd v(a.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = std::complex<double>(1.0 + 1e-3 * std::sin(0.7 * static_cast<double>(i + 1)),
                                    1e-3 * std::cos(1.3 * static_cast<double>(i + 1)));
    v.normalize();
    double s = 0.0;
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXcd w = a.adjoint() * (a * v);
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        s = std::sqrt(n);
        v = w / n;
    }
    return s;
}

}  // namespace elastores
