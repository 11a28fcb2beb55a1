#pragma once

#include "elastores/boundary_ops.hpp"
#include "elastores/geometry.hpp"
#include "elastores/kernels.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace elastores {

using Mat36 = Eigen::Matrix<double, 3, 6>;

// Material contrast between inclusion and background: delta scales the Lame
// constants, tau the wave speeds; the density contrast is epsilon = delta/tau^2.
// delta = 0 (no inclusion) is representable; negatives are rejected.
struct Contrast {
    double delta;
    double tau;

    Contrast(double delta_, double tau_);
    double epsilon() const { return delta / (tau * tau); }
};

// Q_ij = -\int M[xi_i] . xi_j ds over the boundary: the static
// Dirichlet-to-Neumann map paired against the rigid-motion basis. Returned as
// assembled; the (small) asymmetry is a discretization diagnostic, use
// symmetry_defect() and symmetrize before eigendecomposition.
Mat6 assemble_Q(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                const SurfaceMesh& mesh, const RigidBasis& basis);

// c_nk = -\int M[e_n] . xi_k ds: couplings of the coordinate directions to the
// basis fields; rows n = 1..3.
Mat36 assemble_C(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                 const SurfaceMesh& mesh, const RigidBasis& basis);

// R = C^T C, the positive semi-definite radiation-coupling Gram matrix
// (rank <= 3 by construction).
Mat6 assemble_R(const Mat36& c);

double symmetry_defect(const Mat6& m);

// Eigen-decomposition of sym(Q) with eigenvalue clustering. Within a cluster
// the eigenvectors are rotated so that V^T R V is diagonal on the cluster
// block; for degenerate eigenvalues the per-mode damping coefficients are only
// defined after that choice (degenerate first-order perturbation theory).
struct SpectralDecomposition {
    Vec6 lambda;                                // ascending eigenvalues of sym(Q)
    Mat6 v;                                     // orthonormal eigenvectors (columns)
    Vec6 vRv;                                   // V_i^T R V_i after cluster rotation
    std::vector<std::pair<int, int>> clusters;  // half-open index ranges [begin, end)
    double q_defect = 0.0;                      // relative asymmetry of the input Q
    double r_norm = 0.0;                        // spectral norm of sym(R)
};

SpectralDecomposition spectral_decompose(const Mat6& q, const Mat6& r,
                                         double cluster_tol = 1e-6);

// One subwavelength mode: omega_plus = sqrt(lambda_i delta/(rho tau^2))
//                                      - i (gamma vRv_i/(2 sqrt(rho) tau^2)) delta
// and omega_minus = -conj(omega_plus). damping_vanishes marks modes whose
// first-order radiative damping is below tolerance (rank R <= 3 cannot damp
// all six modes on symmetric shapes).
struct ResonanceMode {
    int mode = 0;
    double lambda = 0.0;
    double vRv = 0.0;
    bool damping_vanishes = false;
    Complex omega_plus;
    Complex omega_minus;
};

std::array<ResonanceMode, 6> asymptotic_resonances(const SpectralDecomposition& spec,
                                                   const ElasticMedium& medium,
                                                   const Contrast& contrast);

// All twelve roots of det(-rho tau^2 omega^2 I + delta Q - i omega delta
// sqrt(rho) gamma R) = 0, via a scaled companion linearization of the
// quadratic eigenproblem. Q is symmetrized first (same convention as the
// decomposition). Roots are sorted by real part, then imaginary part.
std::array<Complex, 12> qep_resonances(const Mat6& q, const Mat6& r,
                                       const ElasticMedium& medium, const Contrast& contrast);

// Per-mode agreement between the closed-form asymptotic frequencies and the
// quadratic-eigenproblem roots across a delta sweep. Roots are matched
// greedily (nearest in the complex plane, one-to-one); the fitted slope of the
// absolute error quantifies the post-leading remainder order.
struct SpectraComparison {
    std::vector<double> deltas;
    std::vector<std::array<double, 6>> abs_error;  // [delta][mode], + branch
    std::vector<std::array<double, 6>> rel_error;
    std::array<bool, 6> monotone{};   // rel errors non-increasing (1e-10 floor)
    std::array<double, 6> slope{};    // log-log fit of abs error vs delta
    std::array<bool, 6> fitted{};     // false for undamped modes (error at noise level)
};

SpectraComparison compare_spectra(const std::vector<std::array<ResonanceMode, 6>>& asymptotic,
                                  const std::vector<std::array<Complex, 12>>& qep,
                                  const std::vector<double>& deltas);

}  // namespace elastores
