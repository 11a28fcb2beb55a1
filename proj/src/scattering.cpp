#include "elastores/scattering.hpp"

#include "elastores/errors.hpp"
#include "elastores/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace elastores {

namespace {

constexpr double kUnitTol = 1e-12;
constexpr double kOrthoTol = 1e-14;

void check_unit(const Vec3& v, const char* what) {
    if (std::abs(v.norm() - 1.0) > kUnitTol) {
        std::ostringstream msg;
        msg << what << " must be a unit vector, got norm " << v.norm();
        throw ConfigError(msg.str());
    }
}

void check_frequency(double omega) {
    if (!(omega >= 0.0)) throw ConfigError("frequency must be real and nonnegative");
}

// Reduced wavenumber of the background at a real frequency.
double reduced_wavenumber(const ElasticMedium& medium, double omega) {
    return std::sqrt(medium.rho) * omega;
}

// Mirrors the flag convention of asymptotic_resonances.
bool mode_undamped(const SpectralDecomposition& spec, int j) {
    return spec.vRv(j) <= 1e-12 * spec.r_norm;
}

}  // namespace

IncidentWave IncidentWave::compressional(const Vec3& direction, double omega) {
    check_unit(direction, "incident direction");
    check_frequency(omega);
    return IncidentWave{WaveKind::kCompressional, direction, direction, omega};
}

IncidentWave IncidentWave::shear(const Vec3& direction, const Vec3& polarization,
                                 double omega) {
    check_unit(direction, "incident direction");
    check_unit(polarization, "shear polarization");
    check_frequency(omega);
    if (std::abs(direction.dot(polarization)) > kOrthoTol) {
        std::ostringstream msg;
        msg << "shear polarization must be orthogonal to the direction, got dot product "
            << direction.dot(polarization);
        throw ConfigError(msg.str());
    }
    return IncidentWave{WaveKind::kShear, direction, polarization, omega};
}

double IncidentWave::carrier_wavenumber(const ElasticMedium& medium) const {
    const double k = reduced_wavenumber(medium, omega);
    return kind == WaveKind::kCompressional ? k / std::sqrt(medium.pressure_modulus())
                                            : k / std::sqrt(medium.mu);
}

Vec3c IncidentWave::evaluate(const Vec3& x, const ElasticMedium& medium) const {
    const double kc = carrier_wavenumber(medium);
    const Complex phase = std::exp(Complex(0.0, kc * x.dot(direction)));
    return phase * amplitude.cast<Complex>();
}

Eigen::VectorXcd IncidentWave::trace(const SurfaceMesh& mesh,
                                     const ElasticMedium& medium) const {
    const int n = mesh.num_panels();
    Eigen::VectorXcd out(3 * n);
    for (int j = 0; j < n; ++j)
        out.segment<3>(3 * j) = evaluate(mesh.panels[static_cast<size_t>(j)].centroid, medium);
    return out;
}

double ModalAmplitudes::max_abs() const {
    double best = 0.0;
    for (const Complex& v : s) best = std::max(best, std::abs(v));
    return best;
}

int ModalAmplitudes::argmax() const {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < 6; ++i) {
        const double a = std::abs(s[static_cast<size_t>(i)]);
        if (a > best) {
            best = a;
            arg = i;
        }
    }
    return arg;
}

ModalAmplitudes amplitudes(double omega, const ElasticMedium& medium,
                           const SpectralDecomposition& spec, const Mat36& c,
                           const Contrast& contrast, const Vec3& p) {
    check_frequency(omega);
    ModalAmplitudes out;
    out.omega = omega;
    out.delta = contrast.delta;
    out.tau = contrast.tau;

    const double delta = contrast.delta;
    const double rho = medium.rho;
    const double tau2 = contrast.tau * contrast.tau;
    const double gamma = gamma_const(medium);

    out.source = delta * (c.transpose() * p);
    const double top = std::sqrt(std::max(spec.lambda(5), 0.0) * delta / (rho * tau2));
    out.regime_warning = omega > kRegimeWindowFactor * top;
    if (delta == 0.0) return out;  // zero contrast scatters nothing

    // s = V diag(delta / den_j) V^T C^T p: the eigen-decomposed inverse of the
    // leading characteristic matrix applied to the source.
    const Vec6 proj = spec.v.transpose() * (c.transpose() * p);
    Eigen::Matrix<Complex, 6, 1> weighted;
    for (int j = 0; j < 6; ++j) {
        const double vrv = std::max(spec.vRv(j), 0.0);
        const Complex den(-rho * tau2 * omega * omega + spec.lambda(j) * delta,
                          -gamma * std::sqrt(rho) * vrv * omega * delta);
        if (std::abs(den) == 0.0) {
            std::ostringstream msg;
            msg << "modal denominator vanished exactly at mode " << j << ", omega " << omega
                << ": undamped resonance hit on the real axis";
            throw NumericalError(msg.str());
        }
        weighted(j) = delta * proj(j) / den;
    }
    const Eigen::Matrix<Complex, 6, 1> sv = spec.v.cast<Complex>() * weighted;
    for (int i = 0; i < 6; ++i) out.s[static_cast<size_t>(i)] = sv(i);
    return out;
}

std::vector<double> enhancement_grid(const SpectralDecomposition& spec,
                                     const ElasticMedium& medium, const Contrast& contrast,
                                     int count, double lo, double hi) {
    if (count < 2) throw ConfigError("enhancement grid needs at least two points");
    if (!(lo > 0.0) || !(hi > lo))
        throw ConfigError("enhancement band must satisfy 0 < lo < hi");
    const double top = std::sqrt(std::max(spec.lambda(5), 0.0) * contrast.delta /
                                 (medium.rho * contrast.tau * contrast.tau));
    std::vector<double> grid(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        grid[static_cast<size_t>(i)] = (lo + (hi - lo) * t) * top;
    }
    return grid;
}

EnhancementCurve enhancement_curve(const std::vector<double>& omega_grid,
                                   const ElasticMedium& medium,
                                   const SpectralDecomposition& spec, const Mat36& c,
                                   const Contrast& contrast, const Vec3& p) {
    if (omega_grid.empty()) throw ConfigError("enhancement scan needs a nonempty grid");

    EnhancementCurve out;
    out.delta = contrast.delta;

    std::vector<double> omegas = omega_grid;
    std::sort(omegas.begin(), omegas.end());
    const double band_lo = omegas.front();
    const double band_hi = omegas.back();

    const double rho = medium.rho;
    const double tau2 = contrast.tau * contrast.tau;
    const double gamma = gamma_const(medium);
    for (int j = 0; j < 6; ++j) {
        const double res2 = spec.lambda(j) * contrast.delta / (rho * tau2);
        if (res2 <= 0.0) continue;
        const double res = std::sqrt(res2);
        if (mode_undamped(spec, j)) {
            // An undamped line inside the band has no finite supremum; report
            // the flag and keep the evaluated points as a lower envelope.
            if (res >= band_lo && res <= band_hi && !out.damping_vanishes) {
                out.damping_vanishes = true;
                out.undamped_mode = j;
            }
            continue;
        }
        // Exact peak of this mode's Lorentzian: the |denominator| minimizer
        // omega^2 = lambda delta/(rho tau^2) - 2 (gamma vRv delta/(2 sqrt(rho) tau^2))^2.
        const double dim = gamma * spec.vRv(j) * contrast.delta / (2.0 * std::sqrt(rho) * tau2);
        const double pk2 = res2 - 2.0 * dim * dim;
        if (pk2 <= 0.0) continue;
        const double pk = std::sqrt(pk2);
        if (pk >= band_lo && pk <= band_hi) omegas.push_back(pk);
    }
    std::sort(omegas.begin(), omegas.end());
    omegas.erase(std::unique(omegas.begin(), omegas.end()), omegas.end());

    out.points.reserve(omegas.size());
    for (const double w : omegas) {
        EnhancementPoint pt;
        pt.omega = w;
        try {
            const ModalAmplitudes amp = amplitudes(w, medium, spec, c, contrast, p);
            pt.max_abs_s = amp.max_abs();
            pt.argmax_mode = amp.argmax();
        } catch (const NumericalError&) {
            // Exact hit on an undamped resonance: the value is unbounded.
            out.damping_vanishes = true;
            continue;
        }
        out.points.push_back(pt);
        if (pt.max_abs_s > out.peak_value) {
            out.peak_value = pt.max_abs_s;
            out.peak_omega = pt.omega;
            out.peak_mode = pt.argmax_mode;
        }
    }
    return out;
}

EnhancementSweep enhancement_sweep(const std::vector<double>& deltas, int grid_count,
                                   const ElasticMedium& medium,
                                   const SpectralDecomposition& spec, const Mat36& c,
                                   double tau, const Vec3& p, double lo, double hi) {
    if (deltas.size() < 2) throw ConfigError("enhancement sweep needs at least two deltas");
    EnhancementSweep out;
    out.deltas = deltas;
    for (const double d : deltas) {
        if (!(d > 0.0)) throw ConfigError("enhancement sweep needs positive deltas");
        const Contrast contrast(d, tau);
        const std::vector<double> grid = enhancement_grid(spec, medium, contrast, grid_count, lo, hi);
        out.curves.push_back(enhancement_curve(grid, medium, spec, c, contrast, p));
        out.peaks.push_back(out.curves.back().peak_value);
    }
    out.slope = loglog_slope(out.deltas, out.peaks);
    return out;
}

Vec3c interior_field(const ModalAmplitudes& amp, const RigidBasis& basis,
                     const SurfaceMesh& mesh, const Vec3& x) {
    if (!point_inside(mesh, x)) throw ConfigError("interior field evaluated outside the body");
    Vec3c u = Vec3c::Zero();
    for (int i = 0; i < 6; ++i)
        u += amp.s[static_cast<size_t>(i)] * basis.eval(i, x).cast<Complex>();
    return u;
}

BoundaryField boundary_density(const ModalAmplitudes& amp, const RigidBasis& basis,
                               const IncidentWave& wave, const SingleLayerSolver& solver,
                               const SurfaceMesh& mesh, const ElasticMedium& medium) {
    if (std::abs(amp.omega - wave.omega) > kUnitTol * std::max(1.0, wave.omega))
        throw ConfigError("modal amplitudes and incident wave use different frequencies");
    const double k = reduced_wavenumber(medium, wave.omega);
    if (std::abs(solver.wavenumber() - Complex(k, 0.0)) > kUnitTol * std::max(1.0, k)) {
        std::ostringstream msg;
        msg << "single layer assembled at wavenumber " << solver.wavenumber()
            << " but the scattering run needs sqrt(rho)*omega = " << k;
        throw ConfigError(msg.str());
    }
    if (solver.panels() != mesh.num_panels())
        throw MeshError("single layer and mesh have different panel counts");

    Eigen::Matrix<Complex, 6, 1> s6;
    for (int i = 0; i < 6; ++i) s6(i) = amp.s[static_cast<size_t>(i)];
    const Eigen::VectorXcd utrace = basis_traces(mesh, basis).cast<Complex>() * s6;
    const Eigen::VectorXcd jump = utrace - wave.trace(mesh, medium);

    BoundaryField out;
    out.values = solver.solve_trace(jump);
    out.omega = wave.omega;
    out.k = solver.wavenumber();
    return out;
}

FarFieldPattern far_field(const BoundaryField& density, const SurfaceMesh& mesh,
                          const std::vector<Vec3>& directions, const ElasticMedium& medium,
                          const QuadratureConfig& cfg) {
    const int n = mesh.num_panels();
    if (density.values.size() != 3 * n)
        throw MeshError("density and mesh have different panel counts");
    if (density.k.imag() != 0.0)
        throw ConfigError("far-field patterns need a real wavenumber");

    const double k = density.k.real();
    const double ks = k / std::sqrt(medium.mu);
    const double kp = k / std::sqrt(medium.pressure_modulus());
    const double inv_s = 1.0 / (4.0 * M_PI * medium.mu);
    const double inv_p = 1.0 / (4.0 * M_PI * medium.pressure_modulus());
    const TriangleRule& rule = TriangleRule::with_points(cfg.regular_order);

    FarFieldPattern out;
    out.omega = density.omega;
    out.directions = directions;
    out.u_s.resize(directions.size());
    out.u_p.resize(directions.size());

    for (size_t m = 0; m < directions.size(); ++m) {
        const Vec3& d = directions[m];
        check_unit(d, "far-field direction");
        Vec3c sum_s = Vec3c::Zero();
        Vec3c sum_p = Vec3c::Zero();
        for (int j = 0; j < n; ++j) {
            const Panel& panel = mesh.panels[static_cast<size_t>(j)];
            const Complex ps = integrate_triangle(panel.v, rule, [&](const Vec3& y) {
                return std::exp(Complex(0.0, -ks * d.dot(y)));
            });
            const Complex pp = integrate_triangle(panel.v, rule, [&](const Vec3& y) {
                return std::exp(Complex(0.0, -kp * d.dot(y)));
            });
            const Vec3c phi = density.values.segment<3>(3 * j);
            sum_s += ps * phi;
            sum_p += pp * phi;
        }
        // Positive-pattern convention: the reconstruction of the scattered
        // field carries the minus signs (see header).
        out.u_s[m] = inv_s * (sum_s - d.cast<Complex>() * d.cast<Complex>().dot(sum_s));
        out.u_p[m] = inv_p * d.cast<Complex>() * d.cast<Complex>().dot(sum_p);
    }
    return out;
}

Vec3c exterior_field(const BoundaryField& density, const SurfaceMesh& mesh, const Vec3& x,
                     const ElasticMedium& medium, const QuadratureConfig& cfg) {
    const int n = mesh.num_panels();
    if (density.values.size() != 3 * n)
        throw MeshError("density and mesh have different panel counts");
    if (point_inside(mesh, x) ||
        distance_to_surface(mesh, x) <= mesh.max_panel_diameter()) {
        throw ConfigError(
            "exterior field evaluation needs a point outside the body, farther from the "
            "surface than the largest panel diameter");
    }

    const TriangleRule& rule = TriangleRule::with_points(cfg.regular_order);
    Vec3c u = Vec3c::Zero();
    for (int j = 0; j < n; ++j) {
        const Panel& panel = mesh.panels[static_cast<size_t>(j)];
        const Mat3c block = integrate_triangle(panel.v, rule, [&](const Vec3& y) {
            return kupradze(x - y, density.k, medium);
        });
        u += block * density.values.segment<3>(3 * j);
    }
    return u;
}

Vec3c farfield_reconstruction(const Vec3c& u_s, const Vec3c& u_p, double r,
                              const ElasticMedium& medium, double omega) {
    if (!(r > 0.0)) throw ConfigError("far-field reconstruction needs a positive radius");
    const double k = reduced_wavenumber(medium, omega);
    const double ks = k / std::sqrt(medium.mu);
    const double kp = k / std::sqrt(medium.pressure_modulus());
    return -(std::exp(Complex(0.0, ks * r)) / r) * u_s -
           (std::exp(Complex(0.0, kp * r)) / r) * u_p;
}

std::vector<Vec3> fibonacci_directions(int count) {
    if (count < 1) throw ConfigError("direction grid needs at least one point");
    std::vector<Vec3> dirs;
    dirs.reserve(static_cast<size_t>(count));
    const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(count);
        const double r = std::sqrt(std::max(1.0 - z * z, 0.0));
        const double theta = golden_angle * static_cast<double>(i);
        dirs.push_back(Vec3(r * std::cos(theta), r * std::sin(theta), z).normalized());
    }
    return dirs;
}

}  // namespace elastores
