#pragma once

#include "elastores/geometry.hpp"
#include "elastores/kernels.hpp"
#include "elastores/quadrature.hpp"

#include <Eigen/Dense>

#include <string>

namespace elastores {

enum class OperatorKind : unsigned char {
    kSingleLayer = 0,
    kNeumannPoincare = 1,
};

// Dense Galerkin matrix of a boundary operator on piecewise-constant vector
// densities: unknown (3i+a) is component a on panel i.
struct BoundaryOperator {
    OperatorKind kind = OperatorKind::kSingleLayer;
    Complex k = 0.0;
    int panels = 0;
    Eigen::MatrixXcd mat;
};

// Galerkin single layer: entries \int_{T_i} \int_{T_j} Gamma^k_{ab}(x-y).
// The matrix is symmetric by construction (each unordered pair is integrated
// once and mirrored, diagonal blocks are symmetrized), which is exact for the
// underlying operator.
BoundaryOperator assemble_single_layer(const SurfaceMesh& mesh, Complex k,
                                       const ElasticMedium& medium,
                                       const QuadratureConfig& cfg = {}, int threads = 1);

// Galerkin Neumann-Poincare adjoint: entries
// \int_{T_i} \int_{T_j} T^k(x, y; n_i)_{ab}. On flat panels the static part of
// the same-panel principal value integral vanishes by antisymmetry, so the
// diagonal blocks carry only the dynamic kernel (and are exactly zero at k=0).
BoundaryOperator assemble_neumann_poincare(const SurfaceMesh& mesh, Complex k,
                                           const ElasticMedium& medium,
                                           const QuadratureConfig& cfg = {}, int threads = 1);

// Per-component panel areas (the diagonal of the P0 mass matrix), length 3N.
Eigen::VectorXd mass_diagonal(const SurfaceMesh& mesh);

// Plain (unconjugated) surface pairing sum_p area_p u_p . v_p of panel values.
Complex surface_pairing(const Eigen::VectorXd& mass, const Eigen::VectorXcd& u,
                        const Eigen::VectorXcd& v);

// Area-weighted l2 norm of panel values, the discrete L2(boundary) surrogate.
double surface_norm(const Eigen::VectorXd& mass, const Eigen::VectorXcd& values);

// LU factorization of a single-layer matrix with a conditioning guard.
class SingleLayerSolver {
public:
    SingleLayerSolver(const BoundaryOperator& op, const SurfaceMesh& mesh);

    // Solve S phi = load for a Galerkin load vector (or one per column).
    Eigen::VectorXcd solve_load(const Eigen::VectorXcd& load) const;
    Eigen::MatrixXcd solve_loads(const Eigen::MatrixXcd& loads) const;
    // Solve with the load induced by panel trace values (load = mass .* values).
    Eigen::VectorXcd solve_trace(const Eigen::VectorXcd& values) const;

    const Eigen::VectorXd& mass() const { return mass_; }
    Complex wavenumber() const { return k_; }
    int panels() const { return panels_; }

private:
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
    Eigen::VectorXd mass_;
    Complex k_;
    int panels_;
};

// Dirichlet-to-Neumann map on panel values: f -> (1/2 I + K*) S^{-1} f,
// realized weakly as values = mass^{-1} (1/2 mass + K) S^{-1} (mass f).
Eigen::VectorXcd dtn_apply(const SingleLayerSolver& s, const BoundaryOperator& kstar,
                           const Eigen::VectorXcd& values);

// Full matrix of dtn_apply (diagnostics and expansion tests).
Eigen::MatrixXcd dtn_dense(const SingleLayerSolver& s, const BoundaryOperator& kstar);

// First-order (in k) correction of the Dirichlet-to-Neumann map:
//   M1[f] = i gamma sum_n (\int M[e_n].f ds) M[e_n],
// a rank-3 map built from the static Dirichlet-to-Neumann images of the
// coordinate directions.
struct DtnFirstOrder {
    Eigen::MatrixXcd values;  // 3N x 3: M[e_n] panel values
    Eigen::MatrixXcd weak;    // 3N x 3: mass .* values (the integration weights)
    double gamma = 0.0;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const;
    Eigen::MatrixXcd dense() const;
};
DtnFirstOrder make_dtn_first_order(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                                   const ElasticMedium& medium);

// Area-weighted norm of (-1/2 I + K*) S^{-1} f. Rigid-motion traces are
// annihilated in the continuum, so this measures discretization consistency;
// generic traces give O(1).
double np_identity_residual(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                            const Eigen::VectorXcd& values);

// Binary operator snapshot: magic "ELOP", version u32, kind u8, panel count
// u64, wavenumber (re, im) f64, then row-major complex f64 entries.
// Little-endian throughout.
void dump_operator(const BoundaryOperator& op, const std::string& path);
BoundaryOperator load_operator(const std::string& path);

}  // namespace elastores
