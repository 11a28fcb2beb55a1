#include "elastores/resonance.hpp"

#include "elastores/errors.hpp"
#include "elastores/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace elastores {

namespace {

using Mat6c = Eigen::Matrix<Complex, 6, 6>;

void require_static(const SingleLayerSolver& s0, const BoundaryOperator& kstar0) {
    if (s0.wavenumber() != Complex(0.0) || kstar0.k != Complex(0.0))
        throw ConfigError("resonance assembly requires the static (k = 0) operators");
}

// Weak Neumann data (mass-weighted M[.] values) of a set of trace columns.
Eigen::MatrixXcd weak_neumann(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                              const Eigen::MatrixXd& traces) {
    const Eigen::MatrixXcd loads =
        s0.mass().cast<Complex>().asDiagonal() * traces.cast<Complex>().eval();
    const Eigen::MatrixXcd psi = s0.solve_loads(loads);
    Eigen::MatrixXcd weak = kstar0.mat * psi;
    weak += 0.5 * s0.mass().cast<Complex>().asDiagonal() * psi;
    return weak;
}

}  // namespace

Contrast::Contrast(double delta_, double tau_) : delta(delta_), tau(tau_) {
    // delta = 0 is the degenerate zero-contrast limit; scattering amplitudes
    // are defined (and vanish) there, so it is representable.
    if (!(delta >= 0.0) || !(tau > 0.0))
        throw ConfigError("contrast parameters must satisfy delta >= 0 and tau > 0");
}

Mat6 assemble_Q(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                const SurfaceMesh& mesh, const RigidBasis& basis) {
    require_static(s0, kstar0);
    const Eigen::MatrixXd traces = basis_traces(mesh, basis);
    const Eigen::MatrixXcd weak = weak_neumann(s0, kstar0, traces);
    return -(weak.transpose() * traces.cast<Complex>()).real();
}

Mat36 assemble_C(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                 const SurfaceMesh& mesh, const RigidBasis& basis) {
    require_static(s0, kstar0);
    const int dim = 3 * s0.panels();
    Eigen::MatrixXd constants = Eigen::MatrixXd::Zero(dim, 3);
    for (int i = 0; i < s0.panels(); ++i) constants.block<3, 3>(3 * i, 0).setIdentity();
    const Eigen::MatrixXcd weak = weak_neumann(s0, kstar0, constants);
    const Eigen::MatrixXd traces = basis_traces(mesh, basis);
    return -(weak.transpose() * traces.cast<Complex>()).real();
}

Mat6 assemble_R(const Mat36& c) { return c.transpose() * c; }

double symmetry_defect(const Mat6& m) {
    const double scale = m.norm();
    return scale > 0.0 ? (m - m.transpose()).norm() / scale : 0.0;
}

SpectralDecomposition spectral_decompose(const Mat6& q, const Mat6& r, double cluster_tol) {
    SpectralDecomposition out;
    out.q_defect = symmetry_defect(q);
    const Mat6 qs = 0.5 * (q + q.transpose());
    const Mat6 rs = 0.5 * (r + r.transpose());

    Eigen::SelfAdjointEigenSolver<Mat6> eig(qs);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of Q failed");
    out.lambda = eig.eigenvalues();
    out.v = eig.eigenvectors();
    const double scale = std::max(std::abs(out.lambda(0)), std::abs(out.lambda(5)));
    if (!(out.lambda(0) > 0.0)) {
        std::ostringstream msg;
        msg << "Q is not positive definite (min eigenvalue " << out.lambda(0) << ")";
        throw NumericalError(msg.str());
    }

    int begin = 0;
    for (int i = 1; i <= 6; ++i) {
        if (i == 6 || out.lambda(i) - out.lambda(i - 1) > cluster_tol * scale) {
            out.clusters.emplace_back(begin, i);
            begin = i;
        }
    }

    // Degenerate eigenvalues leave the eigenvector block free up to rotation;
    // diagonalizing R on the block picks the representatives whose damping
    // coefficients are well defined (and sorts them ascending within the
    // cluster).
    for (const auto& [b, e] : out.clusters) {
        const int m = e - b;
        if (m <= 1) continue;
        const Eigen::MatrixXd p = out.v.block(0, b, 6, m);
        const Eigen::MatrixXd rblock = p.transpose() * rs * p;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sub(0.5 * (rblock + rblock.transpose()));
        if (sub.info() != Eigen::Success)
            throw NumericalError("cluster rotation eigendecomposition failed");
        out.v.block(0, b, 6, m) = p * sub.eigenvectors();
    }

    for (int i = 0; i < 6; ++i) out.vRv(i) = out.v.col(i).dot(rs * out.v.col(i));
    Eigen::SelfAdjointEigenSolver<Mat6> reig(rs);
    if (reig.info() != Eigen::Success) throw NumericalError("eigendecomposition of R failed");
    out.r_norm = reig.eigenvalues().cwiseAbs().maxCoeff();
    return out;
}

std::array<ResonanceMode, 6> asymptotic_resonances(const SpectralDecomposition& spec,
                                                   const ElasticMedium& medium,
                                                   const Contrast& contrast) {
    const double g = gamma_const(medium);
    const double t2 = contrast.tau * contrast.tau;
    std::array<ResonanceMode, 6> out;
    for (int i = 0; i < 6; ++i) {
        ResonanceMode& mode = out[static_cast<size_t>(i)];
        mode.mode = i;
        mode.lambda = spec.lambda(i);
        mode.vRv = spec.vRv(i);
        mode.damping_vanishes = spec.vRv(i) <= 1e-12 * spec.r_norm;
        const double re = std::sqrt(spec.lambda(i) * contrast.delta / (medium.rho * t2));
        // vRv can round to a tiny negative for undamped modes; clamp so the
        // imaginary part never crosses into the upper half plane.
        const double damping = std::max(spec.vRv(i), 0.0);
        const double im = -(g * damping / (2.0 * std::sqrt(medium.rho) * t2)) * contrast.delta;
        mode.omega_plus = Complex(re, im);
        mode.omega_minus = -std::conj(mode.omega_plus);
    }
    return out;
}

std::array<Complex, 12> qep_resonances(const Mat6& q, const Mat6& r, const ElasticMedium& medium,
                                       const Contrast& contrast) {
    const Mat6 qs = 0.5 * (q + q.transpose());
    const Mat6 rs = 0.5 * (r + r.transpose());
    const double g = gamma_const(medium);
    const double t2 = contrast.tau * contrast.tau;
    const double inv = contrast.delta / (medium.rho * t2);

    // Monic form omega^2 I + omega P1 + P0 = 0 of the characteristic matrix.
    const Mat6c p1 = Complex(0.0, 1.0) * (inv * std::sqrt(medium.rho) * g) * rs;
    const Mat6c p0 = -inv * qs;

    // Companion linearization in the scaled variable z = omega / sigma, which
    // keeps the block norms O(1) for tiny delta.
    Eigen::SelfAdjointEigenSolver<Mat6> qeig(qs);
    if (qeig.info() != Eigen::Success) throw NumericalError("eigendecomposition of Q failed");
    const double qnorm = qeig.eigenvalues().cwiseAbs().maxCoeff();
    const double sigma = std::sqrt(std::max(inv * qnorm, 1e-300));

    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(12, 12);
    companion.block<6, 6>(0, 6).setIdentity();
    companion.block<6, 6>(6, 0) = -p0 / (sigma * sigma);
    companion.block<6, 6>(6, 6) = -p1 / sigma;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(companion, /*computeEigenvectors=*/false);
    if (ces.info() != Eigen::Success) throw NumericalError("companion eigensolver failed");

    std::array<Complex, 12> roots;
    for (int i = 0; i < 12; ++i) roots[static_cast<size_t>(i)] = sigma * ces.eigenvalues()(i);
    std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

SpectraComparison compare_spectra(const std::vector<std::array<ResonanceMode, 6>>& asymptotic,
                                  const std::vector<std::array<Complex, 12>>& qep,
                                  const std::vector<double>& deltas) {
    if (asymptotic.size() != deltas.size() || qep.size() != deltas.size())
        throw ConfigError("compare_spectra: input lists must have one entry per delta");
    if (deltas.empty()) throw ConfigError("compare_spectra: empty delta sweep");

    SpectraComparison out;
    out.deltas = deltas;
    for (size_t d = 0; d < deltas.size(); ++d) {
        std::array<Complex, 12> avals;
        for (int i = 0; i < 6; ++i) {
            avals[static_cast<size_t>(2 * i)] = asymptotic[d][static_cast<size_t>(i)].omega_plus;
            avals[static_cast<size_t>(2 * i + 1)] =
                asymptotic[d][static_cast<size_t>(i)].omega_minus;
        }

        // Greedy one-to-one nearest matching: globally smallest distances
        // first, ties by imaginary-part difference, then by index for
        // determinism.
        std::vector<std::tuple<double, double, int, int>> pairs;
        pairs.reserve(144);
        for (int a = 0; a < 12; ++a)
            for (int qi = 0; qi < 12; ++qi)
                pairs.emplace_back(std::abs(avals[static_cast<size_t>(a)] -
                                            qep[d][static_cast<size_t>(qi)]),
                                   std::abs(avals[static_cast<size_t>(a)].imag() -
                                            qep[d][static_cast<size_t>(qi)].imag()),
                                   a, qi);
        std::sort(pairs.begin(), pairs.end());
        std::array<int, 12> match;
        match.fill(-1);
        std::array<bool, 12> taken{};
        int assigned = 0;
        for (const auto& [dist, imdiff, a, qi] : pairs) {
            (void)imdiff;
            if (match[static_cast<size_t>(a)] >= 0 || taken[static_cast<size_t>(qi)]) continue;
            match[static_cast<size_t>(a)] = qi;
            taken[static_cast<size_t>(qi)] = true;
            if (++assigned == 12) break;
        }

        std::array<double, 6> abs_err{}, rel_err{};
        for (int i = 0; i < 6; ++i) {
            const Complex a = avals[static_cast<size_t>(2 * i)];
            const Complex qv = qep[d][static_cast<size_t>(match[static_cast<size_t>(2 * i)])];
            const double dist = std::abs(a - qv);
            const double mag = std::abs(qv);
            if (dist > 0.5 * std::max(mag, 1e-300)) {
                std::ostringstream msg;
                msg << "root matching failed for mode " << i << " at delta " << deltas[d]
                    << " (distance " << dist << " vs |root| " << mag << ")";
                throw NumericalError(msg.str());
            }
            abs_err[static_cast<size_t>(i)] = dist;
            rel_err[static_cast<size_t>(i)] = dist / mag;
        }
        out.abs_error.push_back(abs_err);
        out.rel_error.push_back(rel_err);
    }

    for (int i = 0; i < 6; ++i) {
        bool mono = true;
        for (size_t d = 1; d < deltas.size(); ++d) {
            const double prev = out.rel_error[d - 1][static_cast<size_t>(i)];
            const double cur = out.rel_error[d][static_cast<size_t>(i)];
            if (cur > prev && cur > 1e-10) mono = false;
        }
        out.monotone[static_cast<size_t>(i)] = mono;

        out.fitted[static_cast<size_t>(i)] = !asymptotic[0][static_cast<size_t>(i)].damping_vanishes;
        if (out.fitted[static_cast<size_t>(i)] && deltas.size() >= 2) {
            std::vector<double> errs;
            for (size_t d = 0; d < deltas.size(); ++d)
                errs.push_back(out.abs_error[d][static_cast<size_t>(i)]);
            out.slope[static_cast<size_t>(i)] = loglog_slope(deltas, errs);
        } else {
            out.slope[static_cast<size_t>(i)] = 0.0;
            out.fitted[static_cast<size_t>(i)] = false;
        }
    }
    return out;
}

}  // namespace elastores
