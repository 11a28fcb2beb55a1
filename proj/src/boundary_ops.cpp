#include "elastores/boundary_ops.hpp"

#include "elastores/errors.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <utility>
#include <vector>

namespace elastores {

namespace {

enum class PairClass { kSame, kNear, kFar };

PairClass classify_pair(const Panel& a, const Panel& b, bool same, double near_ratio) {
    if (same) return PairClass::kSame;
    const double d = (a.centroid - b.centroid).norm();
    return d < near_ratio * std::max(a.diameter, b.diameter) ? PairClass::kNear : PairClass::kFar;
}

// Galerkin double integral of kernel(x, y) over T_i x T_j. The outer integral
// always uses the regular rule (its nodes are strictly interior, so the inner
// integrand is finite even for touching panels); the inner integral picks the
// scheme for the pair class. Every kernel evaluation is counted against the
// per-pair budget.
template <typename Kernel>
Eigen::Matrix3cd pair_integral(const Panel& pi, const Panel& pj, PairClass cls,
                               const QuadratureConfig& cfg, const TriangleRule& rule,
                               const GaussSegment& gl, int i, int j, Kernel&& kernel) {
    std::uint64_t evals = 0;
    std::uint64_t dummy = 0;
    auto inner = [&](const Vec3& x) -> Eigen::Matrix3cd {
        auto f = [&](const Vec3& y) -> Eigen::Matrix3cd {
            ++evals;
            return kernel(x, y);
        };
        switch (cls) {
            case PairClass::kSame:
                return integrate_triangle_singular(pj.v, x, gl, cfg.singular_subdiv, f);
            case PairClass::kNear:
                return integrate_triangle_near(pj.v, x, rule, cfg.near_depth, cfg.adapt_ratio,
                                               dummy, f);
            default:
                return integrate_triangle(pj.v, rule, f);
        }
    };
    Eigen::Matrix3cd block = integrate_triangle(pi.v, rule, inner);
    if (evals > cfg.pair_budget) {
        std::ostringstream msg;
        msg << "quadrature budget exceeded on panel pair (" << i << ", " << j << "): " << evals
            << " kernel evaluations, budget " << cfg.pair_budget;
        throw NumericalError(msg.str());
    }
    return block;
}

// Runs job(i) for i in [0, n), spread over `threads` workers. Each index is
// processed exactly once with identical arithmetic, so results do not depend
// on the worker count.
template <typename RowJob>
void run_rows(int n, int threads, RowJob&& job) {
    threads = std::max(1, std::min(threads, n));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto worker = [&]() {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const int i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

void check_regime(const SurfaceMesh& mesh, Complex k) {
    const double kd = std::abs(k) * mesh.diameter();
    if (kd > 1.0) {
        std::ostringstream msg;
        msg << "wavenumber outside the low-frequency regime: |k| * diam = " << kd << " > 1";
        throw ConfigError(msg.str());
    }
}

}  // namespace

Eigen::VectorXd mass_diagonal(const SurfaceMesh& mesh) {
    const int n = mesh.num_panels();
    Eigen::VectorXd mass(3 * n);
    for (int i = 0; i < n; ++i) mass.segment<3>(3 * i).setConstant(mesh.panels[i].area);
    return mass;
}

Complex surface_pairing(const Eigen::VectorXd& mass, const Eigen::VectorXcd& u,
                        const Eigen::VectorXcd& v) {
    return (mass.array().cast<Complex>() * u.array() * v.array()).sum();
}

double surface_norm(const Eigen::VectorXd& mass, const Eigen::VectorXcd& values) {
    return std::sqrt((mass.array() * values.array().abs2()).sum());
}

BoundaryOperator assemble_single_layer(const SurfaceMesh& mesh, Complex k,
                                       const ElasticMedium& medium, const QuadratureConfig& cfg,
                                       int threads) {
    check_regime(mesh, k);
    const int n = mesh.num_panels();
    const TriangleRule& rule = TriangleRule::with_points(cfg.regular_order);
    const GaussSegment& gl = GaussSegment::order7();

    BoundaryOperator op;
    op.kind = OperatorKind::kSingleLayer;
    op.k = k;
    op.panels = n;
    op.mat.resize(3 * n, 3 * n);

    auto kernel = [&](const Vec3& x, const Vec3& y) -> Eigen::Matrix3cd {
        return kupradze(x - y, k, medium);
    };

    // The kernel is even and symmetric, so the (j, i) block is exactly the
    // transpose of the (i, j) block; computing unordered pairs once and
    // mirroring keeps the matrix symmetric to the last bit. The thread that
    // owns row i writes blocks (i, j>=i) and their mirrors, which never
    // collide across rows.
    run_rows(n, threads, [&](int i) {
        for (int j = i; j < n; ++j) {
            const PairClass cls =
                classify_pair(mesh.panels[i], mesh.panels[j], i == j, cfg.near_ratio);
            Eigen::Matrix3cd block = pair_integral(mesh.panels[i], mesh.panels[j], cls, cfg, rule,
                                                   gl, i, j, kernel);
            if (i == j) {
                block = 0.5 * (block + block.transpose()).eval();
                op.mat.block<3, 3>(3 * i, 3 * i) = block;
            } else {
                op.mat.block<3, 3>(3 * i, 3 * j) = block;
                op.mat.block<3, 3>(3 * j, 3 * i) = block.transpose();
            }
        }
    });
    return op;
}

BoundaryOperator assemble_neumann_poincare(const SurfaceMesh& mesh, Complex k,
                                           const ElasticMedium& medium,
                                           const QuadratureConfig& cfg, int threads) {
    check_regime(mesh, k);
    const int n = mesh.num_panels();
    const TriangleRule& rule = TriangleRule::with_points(cfg.regular_order);
    const GaussSegment& gl = GaussSegment::order7();

    BoundaryOperator op;
    op.kind = OperatorKind::kNeumannPoincare;
    op.k = k;
    op.panels = n;
    op.mat.resize(3 * n, 3 * n);

    const bool is_static = (k == Complex(0.0));

    run_rows(n, threads, [&](int i) {
        const Vec3 normal = mesh.panels[i].normal;
        auto kernel = [&](const Vec3& x, const Vec3& y) -> Eigen::Matrix3cd {
            return traction_kernel(x, y, normal, k, medium);
        };
        for (int j = 0; j < n; ++j) {
            if (j == i) {
                // On a flat panel the static traction kernel is antisymmetric
                // and odd, so its Galerkin principal value vanishes exactly;
                // only the smooth dynamic remainder T^k - T^0 is integrated.
                if (is_static) {
                    op.mat.block<3, 3>(3 * i, 3 * i).setZero();
                } else {
                    auto dyn = [&](const Vec3& x, const Vec3& y) -> Eigen::Matrix3cd {
                        return traction_kernel_dynamic(x, y, normal, k, medium);
                    };
                    op.mat.block<3, 3>(3 * i, 3 * i) = pair_integral(
                        mesh.panels[i], mesh.panels[i], PairClass::kSame, cfg, rule, gl, i, i, dyn);
                }
                continue;
            }
            const PairClass cls =
                classify_pair(mesh.panels[i], mesh.panels[j], false, cfg.near_ratio);
            op.mat.block<3, 3>(3 * i, 3 * j) =
                pair_integral(mesh.panels[i], mesh.panels[j], cls, cfg, rule, gl, i, j, kernel);
        }
    });
    return op;
}

SingleLayerSolver::SingleLayerSolver(const BoundaryOperator& op, const SurfaceMesh& mesh)
    : k_(op.k), panels_(op.panels) {
    if (op.kind != OperatorKind::kSingleLayer)
        throw ConfigError("SingleLayerSolver requires a single-layer operator");
    if (mesh.num_panels() != op.panels)
        throw MeshError("operator/mesh panel count mismatch");
    if (op.mat.rows() != 3 * op.panels || op.mat.cols() != 3 * op.panels)
        throw NumericalError("operator matrix has inconsistent dimensions");
    mass_ = mass_diagonal(mesh);
    lu_.compute(op.mat);
    const double rc = lu_.rcond();
    if (!(rc > 1e-14)) {
        std::ostringstream msg;
        msg << "single-layer matrix numerically singular (rcond = " << rc
            << "); mesh or quadrature failure";
        throw NumericalError(msg.str());
    }
}

Eigen::VectorXcd SingleLayerSolver::solve_load(const Eigen::VectorXcd& load) const {
    if (load.size() != 3 * panels_) throw NumericalError("load vector size mismatch");
    return lu_.solve(load);
}

Eigen::MatrixXcd SingleLayerSolver::solve_loads(const Eigen::MatrixXcd& loads) const {
    if (loads.rows() != 3 * panels_) throw NumericalError("load matrix size mismatch");
    return lu_.solve(loads);
}

Eigen::VectorXcd SingleLayerSolver::solve_trace(const Eigen::VectorXcd& values) const {
    if (values.size() != 3 * panels_) throw NumericalError("trace vector size mismatch");
    return lu_.solve((mass_.array().cast<Complex>() * values.array()).matrix());
}

namespace {

void check_compatible(const SingleLayerSolver& s, const BoundaryOperator& kstar) {
    if (kstar.kind != OperatorKind::kNeumannPoincare)
        throw ConfigError("expected a Neumann-Poincare operator");
    if (kstar.panels != s.panels()) throw MeshError("operator panel count mismatch");
    if (kstar.k != s.wavenumber())
        throw ConfigError("single-layer and Neumann-Poincare operators assembled at different k");
}

}  // namespace

Eigen::VectorXcd dtn_apply(const SingleLayerSolver& s, const BoundaryOperator& kstar,
                           const Eigen::VectorXcd& values) {
    check_compatible(s, kstar);
    const Eigen::VectorXcd phi = s.solve_trace(values);
    const Eigen::VectorXcd weak =
        0.5 * (s.mass().array().cast<Complex>() * phi.array()).matrix() + kstar.mat * phi;
    return (weak.array() / s.mass().array().cast<Complex>()).matrix();
}

Eigen::MatrixXcd dtn_dense(const SingleLayerSolver& s, const BoundaryOperator& kstar) {
    check_compatible(s, kstar);
    Eigen::MatrixXcd loads = s.mass().cast<Complex>().asDiagonal();
    const Eigen::MatrixXcd phi = s.solve_loads(loads);
    Eigen::MatrixXcd weak = kstar.mat * phi;
    weak += 0.5 * s.mass().cast<Complex>().asDiagonal() * phi;
    return s.mass().cwiseInverse().cast<Complex>().asDiagonal() * weak;
}

Eigen::VectorXcd DtnFirstOrder::apply(const Eigen::VectorXcd& f) const {
    const Complex ig(0.0, gamma);
    return ig * (values * (weak.transpose() * f));
}

Eigen::MatrixXcd DtnFirstOrder::dense() const {
    const Complex ig(0.0, gamma);
    return ig * (values * weak.transpose());
}

DtnFirstOrder make_dtn_first_order(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                                   const ElasticMedium& medium) {
    check_compatible(s0, kstar0);
    if (s0.wavenumber() != Complex(0.0))
        throw ConfigError("first-order correction is built from the static operators");
    const int dim = 3 * s0.panels();
    DtnFirstOrder out;
    out.gamma = gamma_const(medium);
    out.values.resize(dim, 3);
    out.weak.resize(dim, 3);
    for (int n = 0; n < 3; ++n) {
        Eigen::VectorXcd trace = Eigen::VectorXcd::Zero(dim);
        for (int i = 0; i < s0.panels(); ++i) trace(3 * i + n) = 1.0;
        const Eigen::VectorXcd psi = s0.solve_trace(trace);
        // Neumann data of the coordinate trace: (1/2 M + K) psi scaled back to
        // panel values...
        Eigen::VectorXcd weak =
            0.5 * (s0.mass().array().cast<Complex>() * psi.array()).matrix() + kstar0.mat * psi;
        out.values.col(n) = (weak.array() / s0.mass().array().cast<Complex>()).matrix();
        // ...paired against the density itself: in the continuum the Neumann
        // data of a constant trace equals the density (the interior extension
        // is constant and traction-free), and using the density here keeps the
        // pairing exact through first order in k.
        out.weak.col(n) = (s0.mass().array().cast<Complex>() * psi.array()).matrix();
    }
    return out;
}

double np_identity_residual(const SingleLayerSolver& s0, const BoundaryOperator& kstar0,
                            const Eigen::VectorXcd& values) {
    check_compatible(s0, kstar0);
    const Eigen::VectorXcd phi = s0.solve_trace(values);
    const Eigen::VectorXcd weak =
        -0.5 * (s0.mass().array().cast<Complex>() * phi.array()).matrix() + kstar0.mat * phi;
    const Eigen::VectorXcd vals = (weak.array() / s0.mass().array().cast<Complex>()).matrix();
    return surface_norm(s0.mass(), vals);
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

}  // namespace

void dump_operator(const BoundaryOperator& op, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open operator dump for writing: " + path);
    out.write("ELOP", 4);
    const std::uint32_t version = 1;
    write_pod(out, version);
    const std::uint8_t kind = static_cast<std::uint8_t>(op.kind);
    write_pod(out, kind);
    const std::uint64_t n = static_cast<std::uint64_t>(op.panels);
    write_pod(out, n);
    write_pod(out, op.k.real());
    write_pod(out, op.k.imag());
    const int dim = 3 * op.panels;
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            const Complex z = op.mat(r, c);
            write_pod(out, z.real());
            write_pod(out, z.imag());
        }
    }
    if (!out) throw ConfigError("failed writing operator dump: " + path);
}

BoundaryOperator load_operator(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open operator dump: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ELOP", 4) != 0)
        throw ConfigError("not an operator dump (bad magic): " + path);
    std::uint32_t version = 0;
    read_pod(in, version);
    if (version != 1) throw ConfigError("unsupported operator dump version");
    std::uint8_t kind = 0;
    read_pod(in, kind);
    if (kind > 1) throw ConfigError("unknown operator kind in dump");
    std::uint64_t n = 0;
    read_pod(in, n);
    if (n == 0 || n > (1ull << 24)) throw ConfigError("implausible panel count in dump");
    double re = 0.0, im = 0.0;
    read_pod(in, re);
    read_pod(in, im);
    BoundaryOperator op;
    op.kind = static_cast<OperatorKind>(kind);
    op.k = Complex(re, im);
    op.panels = static_cast<int>(n);
    const int dim = 3 * op.panels;
    op.mat.resize(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) {
            double zr = 0.0, zi = 0.0;
            read_pod(in, zr);
            read_pod(in, zi);
            op.mat(r, c) = Complex(zr, zi);
        }
    }
    if (!in) throw ConfigError("truncated operator dump: " + path);
    return op;
}

}  // namespace elastores
