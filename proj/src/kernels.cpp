#include "elastores/kernels.hpp"

#include "elastores/errors.hpp"

#include <cmath>

namespace elastores {

namespace {

const double kPi = 3.14159265358979323846;
const Complex kI(0.0, 1.0);

// Radial factorization Gamma^k(z) = phi1(r) I + phi2(r) zhat zhat^T together
// with the radial derivatives needed by the traction kernel.
struct Phi {
    Complex phi1 = 0.0, phi2 = 0.0;    // coefficients of I and zhat zhat^T
    Complex dphi1 = 0.0, dphi2 = 0.0;  // d/dr of the above
    Complex phi2_r = 0.0;              // phi2 / r
};

struct SeriesCoeffs {
    // phi1 = (1/r) sum_j a_j (k r)^j,  phi2 = (1/r) sum_j b_j (k r)^j
    std::array<Complex, 9> a{}, b{};
};

SeriesCoeffs series_coeffs(const ElasticMedium& m) {
    SeriesCoeffs c;
    const double pm = m.pressure_modulus();
    double factorial = 1.0;
    Complex ipow(1.0, 0.0);
    for (int j = 0; j <= 8; ++j) {
        if (j > 0) {
            factorial *= j;
            ipow *= kI;
        }
        const double ms = std::pow(m.mu, -0.5 * (j + 2));
        const double ps = std::pow(pm, -0.5 * (j + 2));
        const double pref = 1.0 / (4.0 * kPi * (j + 2) * factorial);
        c.a[static_cast<size_t>(j)] = -pref * ipow * ((j + 1) * ms + ps);
        c.b[static_cast<size_t>(j)] = pref * ipow * (j - 1.0) * (ms - ps);
    }
    return c;
}

Phi phi_static(double r, const ElasticMedium& m) {
    const double alpha = (1.0 / (8.0 * kPi)) * (1.0 / m.mu + 1.0 / m.pressure_modulus());
    const double beta = (1.0 / (8.0 * kPi)) * (1.0 / m.mu - 1.0 / m.pressure_modulus());
    Phi f;
    f.phi1 = -alpha / r;
    f.phi2 = -beta / r;
    f.dphi1 = alpha / (r * r);
    f.dphi2 = beta / (r * r);
    f.phi2_r = -beta / (r * r);
    return f;
}

// Partial sums j = j0..J of the k-expansion. j0 = 1 drops the static part,
// giving Gamma^k - Gamma^0 without cancellation.
Phi phi_series(double r, Complex k, const ElasticMedium& m, int j0, int J) {
    const SeriesCoeffs c = series_coeffs(m);
    const Complex kr = k * r;
    Phi f;
    Complex krj = 1.0;  // (k r)^j
    for (int j = 0; j <= J; ++j) {
        if (j >= j0) {
            const Complex a = c.a[static_cast<size_t>(j)] * krj;
            const Complex b = c.b[static_cast<size_t>(j)] * krj;
            f.phi1 += a;
            f.phi2 += b;
            f.dphi1 += (j - 1.0) * a;
            f.dphi2 += (j - 1.0) * b;
        }
        krj *= kr;
    }
    f.phi1 /= r;
    f.phi2 /= r;
    f.dphi1 /= r * r;
    f.dphi2 /= r * r;
    f.phi2_r = f.phi2 / r;
    return f;
}

Phi phi_closed(double r, Complex k, const ElasticMedium& m) {
    const Complex ks = m.shear_wavenumber(k);
    const Complex kp = m.pressure_wavenumber(k);
    const Complex es = std::exp(kI * ks * r);
    const Complex ep = std::exp(kI * kp * r);
    const double r2 = r * r, r3 = r2 * r, r4 = r3 * r;

    const Complex gs1 = es * (kI * ks * r - 1.0) / r2;
    const Complex gp1 = ep * (kI * kp * r - 1.0) / r2;
    const Complex gs2 = es * (-ks * ks * r2 - 2.0 * kI * ks * r + 2.0) / r3;
    const Complex gp2 = ep * (-kp * kp * r2 - 2.0 * kI * kp * r + 2.0) / r3;
    const Complex gs3 =
        es * (-kI * ks * ks * ks * r3 + 3.0 * ks * ks * r2 + 6.0 * kI * ks * r - 6.0) / r4;
    const Complex gp3 =
        ep * (-kI * kp * kp * kp * r3 + 3.0 * kp * kp * r2 + 6.0 * kI * kp * r - 6.0) / r4;

    const Complex d1 = gp1 - gs1, d2 = gp2 - gs2, d3 = gp3 - gs3;
    const Complex c = 1.0 / (4.0 * kPi * k * k);

    Phi f;
    f.phi1 = -es / (4.0 * kPi * m.mu * r) + c * d1 / r;
    f.phi2 = c * (d2 - d1 / r);
    f.dphi1 = -gs1 / (4.0 * kPi * m.mu) + c * (d2 / r - d1 / r2);
    f.dphi2 = c * (d3 - d2 / r + d1 / r2);
    f.phi2_r = f.phi2 / r;
    return f;
}

Phi phi_eval(double r, Complex k, const ElasticMedium& m) {
    if (k == 0.0) return phi_static(r, m);
    if (std::abs(k) * r < kKernelSeriesSwitch) return phi_series(r, k, m, 0, 6);
    return phi_closed(r, k, m);
}

// Gamma^k - Gamma^0 radial data, cancellation-safe for small |k| r.
Phi phi_dynamic(double r, Complex k, const ElasticMedium& m) {
    if (k == 0.0) return Phi{};
    if (std::abs(k) * r < kKernelSeriesSwitch) return phi_series(r, k, m, 1, 6);
    const Phi full = phi_closed(r, k, m);
    const Phi stat = phi_static(r, m);
    Phi f;
    f.phi1 = full.phi1 - stat.phi1;
    f.phi2 = full.phi2 - stat.phi2;
    f.dphi1 = full.dphi1 - stat.dphi1;
    f.dphi2 = full.dphi2 - stat.dphi2;
    f.phi2_r = full.phi2_r - stat.phi2_r;
    return f;
}

double checked_radius(const Vec3& z) {
    const double r = z.norm();
    if (r <= 0.0) throw NumericalError("fundamental solution evaluated at a zero offset");
    return r;
}

Mat3c gamma_from_phi(const Phi& f, const Vec3& zhat) {
    const Mat3 zz = zhat * zhat.transpose();
    return f.phi1 * Mat3c::Identity() + f.phi2 * zz.cast<Complex>();
}

// Conormal derivative at x with unit normal n of column fields u_m = Gamma(z) e_m:
//   T = lambda (phi1' + phi2' + 2 phi2/r) n zhat^T
//     + mu [ phi1' (p I + zhat n^T) + 2 phi2' p zhat zhat^T
//            + (phi2/r) (2 n zhat^T + zhat n^T + p I - 4 p zhat zhat^T) ],  p = zhat.n
Mat3c traction_from_phi(const Phi& f, const Vec3& zhat, const Vec3& n,
                        const ElasticMedium& m) {
    const double p = zhat.dot(n);
    const Mat3 nz = n * zhat.transpose();
    const Mat3 zn = zhat * n.transpose();
    const Mat3 zz = zhat * zhat.transpose();
    const Mat3 id = Mat3::Identity();

    Mat3c t = (m.lambda * (f.dphi1 + f.dphi2 + 2.0 * f.phi2_r)) * nz.cast<Complex>();
    t += (m.mu * f.dphi1) * (p * id + zn).cast<Complex>();
    t += (2.0 * m.mu * p * f.dphi2) * zz.cast<Complex>();
    t += (m.mu * f.phi2_r) * (2.0 * nz + zn + p * id - 4.0 * p * zz).cast<Complex>();
    return t;
}

}  // namespace

ElasticMedium::ElasticMedium(double lambda_, double mu_, double rho_)
    : lambda(lambda_), mu(mu_), rho(rho_) {
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
        throw ConfigError("medium violates strong convexity (requires mu > 0 and 3 lambda + 2 mu > 0)");
    if (!(rho > 0.0)) throw ConfigError("density must be positive");
}

double gamma_const(const ElasticMedium& m) {
    return (1.0 / (12.0 * kPi)) *
           (2.0 * std::pow(m.mu, -1.5) + std::pow(m.pressure_modulus(), -1.5));
}

Mat3 kelvin(const Vec3& x, const ElasticMedium& m) {
    const double r = checked_radius(x);
    const double alpha = (1.0 / (8.0 * kPi)) * (1.0 / m.mu + 1.0 / m.pressure_modulus());
    const double beta = (1.0 / (8.0 * kPi)) * (1.0 / m.mu - 1.0 / m.pressure_modulus());
    const Vec3 zhat = x / r;
    return (-alpha / r) * Mat3::Identity() + (-beta / r) * (zhat * zhat.transpose());
}

Mat3c kupradze(const Vec3& x, Complex k, const ElasticMedium& m) {
    const double r = checked_radius(x);
    return gamma_from_phi(phi_eval(r, k, m), x / r);
}

Mat3c kupradze_series(const Vec3& x, Complex k, int J, const ElasticMedium& m) {
    if (J < 0 || J > 8) throw NumericalError("series truncation must satisfy 0 <= J <= 8");
    const double r = checked_radius(x);
    return gamma_from_phi(phi_series(r, k, m, 0, J), x / r);
}

Mat3c traction_kernel(const Vec3& x, const Vec3& y, const Vec3& normal_x, Complex k,
                      const ElasticMedium& m) {
    const Vec3 z = x - y;
    const double r = checked_radius(z);
    return traction_from_phi(phi_eval(r, k, m), z / r, normal_x, m);
}

Mat3c traction_kernel_dynamic(const Vec3& x, const Vec3& y, const Vec3& normal_x, Complex k,
                              const ElasticMedium& m) {
    const Vec3 z = x - y;
    const double r = checked_radius(z);
    return traction_from_phi(phi_dynamic(r, k, m), z / r, normal_x, m);
}

FarFieldFactors farfield_kernel(const Vec3& xhat, const Vec3& y, double k,
                                const ElasticMedium& m) {
    if (std::abs(xhat.norm() - 1.0) > 1e-12)
        throw NumericalError("far-field direction must be a unit vector");
    const Complex ks = m.shear_wavenumber(k);
    const Complex kp = m.pressure_wavenumber(k);
    const Mat3 xx = xhat * xhat.transpose();
    FarFieldFactors f;
    f.transverse = (-std::exp(-kI * ks * xhat.dot(y)) / (4.0 * kPi * m.mu)) *
                   (Mat3::Identity() - xx).cast<Complex>();
    f.longitudinal = (-std::exp(-kI * kp * xhat.dot(y)) / (4.0 * kPi * m.pressure_modulus())) *
                     xx.cast<Complex>();
    return f;
}

}  // namespace elastores
