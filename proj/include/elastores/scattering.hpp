#pragma once

#include "elastores/boundary_ops.hpp"
#include "elastores/geometry.hpp"
#include "elastores/kernels.hpp"
#include "elastores/quadrature.hpp"
#include "elastores/resonance.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace elastores {

enum class WaveKind : unsigned char { kCompressional = 0, kShear = 1 };

// Time-harmonic incident plane wave, amplitude * exp(i k_carrier x . direction).
// The amplitude is u_in(0): the propagation direction itself for a compressional
// wave, the (orthogonal) polarization vector for a shear wave. The carrier
// wavenumber is k_p respectively k_s at reduced wavenumber sqrt(rho) * omega.
struct IncidentWave {
    WaveKind kind;
    Vec3 direction;   // unit propagation direction
    Vec3 amplitude;   // u_in(0); unit polarization, orthogonal to direction for shear
    double omega;     // angular frequency, real and nonnegative

    static IncidentWave compressional(const Vec3& direction, double omega);
    static IncidentWave shear(const Vec3& direction, const Vec3& polarization, double omega);

    double carrier_wavenumber(const ElasticMedium& medium) const;
    Vec3c evaluate(const Vec3& x, const ElasticMedium& medium) const;
    // Panel-centroid samples stacked into a 3N vector.
    Eigen::VectorXcd trace(const SurfaceMesh& mesh, const ElasticMedium& medium) const;
};

// Modal response s_i of the six rigid modes to a real driving frequency:
//   s_i = sum_j delta V_ji (V^T C^T p)_j / (-rho tau^2 w^2 + lambda_j delta
//                                           - i gamma sqrt(rho) vRv_j w delta),
// the leading Lorentzian term only. `source` is the leading source vector
// g = delta C^T p.
struct ModalAmplitudes {
    std::array<Complex, 6> s{};
    Vec6 source = Vec6::Zero();
    double omega = 0.0;
    double delta = 0.0;
    double tau = 1.0;
    // The formula is asymptotic in the band omega = O(delta^{1/2}); outside
    // kRegimeWindowFactor times the top resonance scale the result is still
    // computed but flagged.
    bool regime_warning = false;

    double max_abs() const;
    int argmax() const;
};

inline constexpr double kRegimeWindowFactor = 10.0;

ModalAmplitudes amplitudes(double omega, const ElasticMedium& medium,
                           const SpectralDecomposition& spec, const Mat36& c,
                           const Contrast& contrast, const Vec3& p);

// One evaluated frequency of an enhancement scan.
struct EnhancementPoint {
    double omega = 0.0;
    double max_abs_s = 0.0;
    int argmax_mode = -1;
};

// |s| scan over a frequency band. Besides the supplied grid, the exact peak
// frequency of every damped mode's Lorentzian is evaluated, so the reported
// peak does not depend on the grid resolving lines of relative width
// O(sqrt(delta)). If an undamped mode resonates inside the band the true
// supremum is infinite; damping_vanishes reports that instead of a finite
// peak claim (peak_* then cover the evaluated points only).
struct EnhancementCurve {
    std::vector<EnhancementPoint> points;  // ascending in omega
    double peak_omega = 0.0;
    double peak_value = 0.0;
    int peak_mode = -1;
    bool damping_vanishes = false;
    int undamped_mode = -1;
    double delta = 0.0;
};

// Canonical scan band [lo, hi] * sqrt(lambda_max delta / (rho tau^2)),
// uniformly spaced, count >= 2.
std::vector<double> enhancement_grid(const SpectralDecomposition& spec,
                                     const ElasticMedium& medium, const Contrast& contrast,
                                     int count, double lo = 0.2, double hi = 3.0);

EnhancementCurve enhancement_curve(const std::vector<double>& omega_grid,
                                   const ElasticMedium& medium,
                                   const SpectralDecomposition& spec, const Mat36& c,
                                   const Contrast& contrast, const Vec3& p);

// Peak amplitude across a delta sweep plus the fitted log-log slope
// (near-resonance theory: -1/2).
struct EnhancementSweep {
    std::vector<double> deltas;
    std::vector<double> peaks;
    std::vector<EnhancementCurve> curves;
    double slope = 0.0;
};

EnhancementSweep enhancement_sweep(const std::vector<double>& deltas, int grid_count,
                                   const ElasticMedium& medium,
                                   const SpectralDecomposition& spec, const Mat36& c,
                                   double tau, const Vec3& p, double lo = 0.2,
                                   double hi = 3.0);

// Leading-order interior field u(x) = sum_i s_i xi_i(x) for x inside the body.
Vec3c interior_field(const ModalAmplitudes& amp, const RigidBasis& basis,
                     const SurfaceMesh& mesh, const Vec3& x);

// Panel-constant single-layer density representing the scattered field, with
// the reduced wavenumber it was solved at.
struct BoundaryField {
    Eigen::VectorXcd values;  // 3 per panel
    double omega = 0.0;
    Complex k{};
};

// density = S^{-1}[ (sum_i s_i xi_i)|boundary - u_in|boundary ], the single
// layer solved at k = sqrt(rho) * omega.
BoundaryField boundary_density(const ModalAmplitudes& amp, const RigidBasis& basis,
                               const IncidentWave& wave, const SingleLayerSolver& solver,
                               const SurfaceMesh& mesh, const ElasticMedium& medium);

// Transverse (shear-carried) and longitudinal (pressure-carried) far-field
// patterns of the scattered field. Sign convention: the patterns are positive;
// the reconstruction of the scattered field carries the minus signs,
//   u_ex(x) - u_in(x) ~ -(e^{i ks |x|}/|x|) u_s(xhat) - (e^{i kp |x|}/|x|) u_p(xhat),
// with ks = sqrt(rho) omega / sqrt(mu), kp = sqrt(rho) omega / sqrt(lambda+2mu).
struct FarFieldPattern {
    std::vector<Vec3> directions;
    std::vector<Vec3c> u_s;
    std::vector<Vec3c> u_p;
    double omega = 0.0;
    double delta = 0.0;
};

FarFieldPattern far_field(const BoundaryField& density, const SurfaceMesh& mesh,
                          const std::vector<Vec3>& directions, const ElasticMedium& medium,
                          const QuadratureConfig& cfg = {});

// Scattered field u_ex(x) - u_in(x) at a point strictly outside the body,
// farther from the surface than the largest panel diameter (near-singular
// evaluation is refused).
Vec3c exterior_field(const BoundaryField& density, const SurfaceMesh& mesh, const Vec3& x,
                     const ElasticMedium& medium, const QuadratureConfig& cfg = {});

// Far-field reconstruction of the scattered field at x = r * xhat (the two
// phase prefactors applied with the documented minus signs).
Vec3c farfield_reconstruction(const Vec3c& u_s, const Vec3c& u_p, double r,
                              const ElasticMedium& medium, double omega);

// Deterministic near-uniform unit directions (golden-angle spiral).
std::vector<Vec3> fibonacci_directions(int count);

}  // namespace elastores
