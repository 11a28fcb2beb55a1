#pragma once

#include "elastores/geometry.hpp"

#include <Eigen/Dense>

#include <complex>

namespace elastores {

using Complex = std::complex<double>;
using Mat3c = Eigen::Matrix3cd;
using Vec3c = Eigen::Vector3cd;

// Homogeneous isotropic material. `k` below is the reduced wavenumber
// sqrt(rho) * omega; the shear/pressure wavenumbers derive from it.
struct ElasticMedium {
    double lambda;
    double mu;
    double rho;

    ElasticMedium(double lambda_, double mu_, double rho_);

    double pressure_modulus() const { return lambda + 2.0 * mu; }
    double shear_speed() const { return std::sqrt(mu / rho); }
    double pressure_speed() const { return std::sqrt(pressure_modulus() / rho); }
    Complex shear_wavenumber(Complex k) const { return k / std::sqrt(mu); }
    Complex pressure_wavenumber(Complex k) const { return k / std::sqrt(pressure_modulus()); }
};

// Leading radiation-damping constant: (1/12pi) (2 mu^{-3/2} + (lambda+2mu)^{-3/2}).
double gamma_const(const ElasticMedium& medium);

// Static (Kelvin) fundamental solution.
Mat3 kelvin(const Vec3& x, const ElasticMedium& medium);

// Time-harmonic fundamental solution of (L + k^2) at reduced wavenumber k.
// Supports complex k. Below |k| |x| < kKernelSeriesSwitch the evaluation
// switches to the truncated expansion in k, which avoids the catastrophic
// cancellation of the closed form (it subtracts two nearly equal exponentials
// and divides by k^2).
Mat3c kupradze(const Vec3& x, Complex k, const ElasticMedium& medium);

// Partial sum of the expansion of kupradze in powers of k, terms j = 0..J
// (J <= 8). J = 0 reproduces kelvin; the j = 1 term is -i gamma k * Identity.
Mat3c kupradze_series(const Vec3& x, Complex k, int J, const ElasticMedium& medium);

// Conormal derivative of the columns of kupradze(x - y) with respect to x:
// column m is lambda (div u) n + mu (grad u + grad u^T) n for u = Gamma(.-y) e_m,
// with n the unit normal at x.
Mat3c traction_kernel(const Vec3& x, const Vec3& y, const Vec3& normal_x, Complex k,
                      const ElasticMedium& medium);

// traction_kernel(k) - traction_kernel(0), evaluated cancellation-safely.
// This is the kernel of the dynamic part of the Neumann-Poincare operator.
Mat3c traction_kernel_dynamic(const Vec3& x, const Vec3& y, const Vec3& normal_x, Complex k,
                              const ElasticMedium& medium);

// |x|^{-1} far factors of kupradze: for |x| -> infinity with k fixed,
//   kupradze(x - y, k) ~ (e^{i ks |x|}/|x|) transverse + (e^{i kp |x|}/|x|) longitudinal,
// where transverse = -(1/4 pi mu) (I - xx^T) e^{-i ks xhat.y} and
// longitudinal = -(1/4 pi (lambda+2mu)) xx^T e^{-i kp xhat.y}.
struct FarFieldFactors {
    Mat3c transverse;
    Mat3c longitudinal;
};
FarFieldFactors farfield_kernel(const Vec3& xhat, const Vec3& y, double k,
                                const ElasticMedium& medium);

inline constexpr double kKernelSeriesSwitch = 1e-4;

}  // namespace elastores
