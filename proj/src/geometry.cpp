#include "elastores/geometry.hpp"

#include "elastores/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace elastores {

namespace {

double signed_volume(const std::vector<Vec3>& vertices,
                     const std::vector<std::array<int, 3>>& faces) {
    double six_v = 0.0;
    for (const auto& f : faces) {
        const Vec3& a = vertices[static_cast<size_t>(f[0])];
        const Vec3& b = vertices[static_cast<size_t>(f[1])];
        const Vec3& c = vertices[static_cast<size_t>(f[2])];
        six_v += a.dot(b.cross(c));
    }
    return six_v / 6.0;
}

double bbox_diagonal(const std::vector<Vec3>& vertices) {
    Vec3 lo = vertices.front(), hi = vertices.front();
    for (const Vec3& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
}

}  // namespace

double SurfaceMesh::surface_area() const {
    double a = 0.0;
    for (const Panel& p : panels) a += p.area;
    return a;
}

double SurfaceMesh::diameter() const {
    double d2 = 0.0;
    for (size_t i = 0; i < vertices.size(); ++i)
        for (size_t j = i + 1; j < vertices.size(); ++j)
            d2 = std::max(d2, (vertices[i] - vertices[j]).squaredNorm());
    return std::sqrt(d2);
}

double SurfaceMesh::max_panel_diameter() const {
    double d = 0.0;
    for (const Panel& p : panels) d = std::max(d, p.diameter);
    return d;
}

void SurfaceMesh::finalize() {
    if (vertices.size() < 4 || faces.size() < 4)
        throw MeshError("mesh must contain at least 4 vertices and 4 faces");

    const int nv = static_cast<int>(vertices.size());
    for (size_t fi = 0; fi < faces.size(); ++fi) {
        const auto& f = faces[fi];
        for (int c = 0; c < 3; ++c)
            if (f[c] < 0 || f[c] >= nv)
                throw MeshError("face " + std::to_string(fi) + " references vertex " +
                                std::to_string(f[c]) + " outside the valid range [0," +
                                std::to_string(nv - 1) + "]");
        if (f[0] == f[1] || f[1] == f[2] || f[2] == f[0])
            throw MeshError("face " + std::to_string(fi) + " repeats a vertex index");
    }

    // Every undirected edge must be used by exactly two faces, once per direction.
    std::map<std::pair<int, int>, std::array<int, 3>> edges;  // {fwd, bwd, example face}
    for (size_t fi = 0; fi < faces.size(); ++fi) {
        const auto& f = faces[fi];
        for (int c = 0; c < 3; ++c) {
            const int a = f[c], b = f[(c + 1) % 3];
            auto& rec = edges[{std::min(a, b), std::max(a, b)}];
            ++rec[a < b ? 0 : 1];
            rec[2] = static_cast<int>(fi);
        }
    }
    for (const auto& [e, rec] : edges) {
        const int total = rec[0] + rec[1];
        if (total == 1)
            throw MeshError("surface is not closed: edge (" + std::to_string(e.first) + "," +
                            std::to_string(e.second) + ") of face " + std::to_string(rec[2]) +
                            " has no partner");
        if (total > 2)
            throw MeshError("non-manifold edge (" + std::to_string(e.first) + "," +
                            std::to_string(e.second) + ") shared by " + std::to_string(total) +
                            " faces");
        if (rec[0] != 1 || rec[1] != 1)
            throw MeshError("inconsistent orientation across edge (" + std::to_string(e.first) +
                            "," + std::to_string(e.second) + ")");
    }

    const double scale = bbox_diagonal(vertices);
    const double vol = signed_volume(vertices, faces);
    if (std::abs(vol) < 1e-14 * scale * scale * scale)
        throw MeshError("mesh encloses no volume");
    if (vol < 0.0)
        for (auto& f : faces) std::swap(f[1], f[2]);

    panels.clear();
    panels.reserve(faces.size());
    for (size_t fi = 0; fi < faces.size(); ++fi) {
        const auto& f = faces[fi];
        Panel p;
        p.v = {vertices[static_cast<size_t>(f[0])], vertices[static_cast<size_t>(f[1])],
               vertices[static_cast<size_t>(f[2])]};
        const Vec3 cr = (p.v[1] - p.v[0]).cross(p.v[2] - p.v[0]);
        p.area = 0.5 * cr.norm();
        if (p.area < 1e-12 * scale * scale)
            throw MeshError("face " + std::to_string(fi) + " is degenerate (zero area)");
        p.normal = cr / cr.norm();
        p.centroid = (p.v[0] + p.v[1] + p.v[2]) / 3.0;
        p.diameter = triangle_diameter(p.v);
        panels.push_back(p);
    }
}

SurfaceMesh parse_off(std::istream& in, const std::string& name) {
    // Tokenize, dropping '#' comments. A "# sphere cx cy cz r" comment is the
    // one annotation we understand: it restores the projection marker that
    // plain OFF cannot carry, so refinement of a saved sphere mesh keeps
    // converging to the ball instead of freezing the coarse polyhedron.
    std::vector<std::string> tokens;
    std::optional<SphereProjection> sphere_tag;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            std::istringstream cs(line.substr(hash + 1));
            std::string keyword;
            if (cs >> keyword && keyword == "sphere") {
                SphereProjection tag;
                if (!(cs >> tag.center.x() >> tag.center.y() >> tag.center.z() >> tag.radius) ||
                    !(tag.radius > 0.0))
                    throw MeshError(name +
                                    ": malformed sphere annotation; expected '# sphere cx cy cz "
                                    "r' with r > 0");
                sphere_tag = tag;
            }
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
    }
    size_t pos = 0;
    auto next = [&](const char* what) -> const std::string& {
        if (pos >= tokens.size())
            throw MeshError(name + ": unexpected end of file while reading " + what);
        return tokens[pos++];
    };
    auto next_int = [&](const char* what) {
        const std::string& t = next(what);
        size_t used = 0;
        long v = 0;
        try {
            v = std::stol(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size())
            throw MeshError(name + ": expected an integer for " + what + ", got '" + t + "'");
        return static_cast<int>(v);
    };
    auto next_double = [&](const char* what) {
        const std::string& t = next(what);
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size())
            throw MeshError(name + ": expected a number for " + what + ", got '" + t + "'");
        return v;
    };

    if (next("header") != "OFF") throw MeshError(name + ": missing OFF header");
    const int nv = next_int("vertex count");
    const int nf = next_int("face count");
    next_int("edge count");  // present in the header, unused
    if (nv <= 0 || nf <= 0) throw MeshError(name + ": vertex/face counts must be positive");

    SurfaceMesh mesh;
    mesh.vertices.reserve(static_cast<size_t>(nv));
    for (int i = 0; i < nv; ++i) {
        const double x = next_double("vertex coordinate");
        const double y = next_double("vertex coordinate");
        const double z = next_double("vertex coordinate");
        mesh.vertices.emplace_back(x, y, z);
    }
    mesh.faces.reserve(static_cast<size_t>(nf));
    for (int i = 0; i < nf; ++i) {
        const int cnt = next_int("face vertex count");
        if (cnt != 3)
            throw MeshError(name + ": face " + std::to_string(i) + " has " + std::to_string(cnt) +
                            " vertices; only triangles are supported");
        std::array<int, 3> f;
        for (int c = 0; c < 3; ++c) f[static_cast<size_t>(c)] = next_int("face vertex index");
        mesh.faces.push_back(f);
    }
    if (pos != tokens.size()) throw MeshError(name + ": trailing data after the face list");

    if (sphere_tag) {
        for (const Vec3& v : mesh.vertices) {
            const double off = std::abs((v - sphere_tag->center).norm() - sphere_tag->radius);
            if (off > 1e-9 * std::max(1.0, sphere_tag->radius))
                throw MeshError(name + ": sphere annotation does not match the vertices (a "
                                       "vertex is off the stated sphere by " +
                                std::to_string(off) + ")");
        }
        mesh.sphere = sphere_tag;
    }

    mesh.finalize();
    return mesh;
}

SurfaceMesh load_off(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file '" + path + "'");
    return parse_off(in, path);
}

void save_off(const SurfaceMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot open '" + path + "' for writing");
    out.precision(17);
    out << "OFF\n";
    if (mesh.sphere)
        out << "# sphere " << mesh.sphere->center.x() << " " << mesh.sphere->center.y() << " "
            << mesh.sphere->center.z() << " " << mesh.sphere->radius << "\n";
    out << mesh.vertices.size() << " " << mesh.faces.size() << " 0\n";
    for (const Vec3& v : mesh.vertices) out << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& f : mesh.faces) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
    if (!out) throw MeshError("failed while writing '" + path + "'");
}

SurfaceMesh refine(const SurfaceMesh& mesh) {
    SurfaceMesh out;
    out.vertices = mesh.vertices;
    out.sphere = mesh.sphere;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = std::make_pair(std::min(a, b), std::max(a, b));
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        Vec3 m = 0.5 * (mesh.vertices[static_cast<size_t>(a)] + mesh.vertices[static_cast<size_t>(b)]);
        if (mesh.sphere) {
            const Vec3 d = m - mesh.sphere->center;
            m = mesh.sphere->center + mesh.sphere->radius * d / d.norm();
        }
        const int idx = static_cast<int>(out.vertices.size());
        out.vertices.push_back(m);
        midpoint.emplace(key, idx);
        return idx;
    };
    out.faces.reserve(mesh.faces.size() * 4);
    for (const auto& f : mesh.faces) {
        const int m01 = mid(f[0], f[1]);
        const int m12 = mid(f[1], f[2]);
        const int m20 = mid(f[2], f[0]);
        out.faces.push_back({f[0], m01, m20});
        out.faces.push_back({m01, f[1], m12});
        out.faces.push_back({m20, m12, f[2]});
        out.faces.push_back({m01, m12, m20});
    }
    out.finalize();
    return out;
}

SurfaceMesh translated(const SurfaceMesh& mesh, const Vec3& shift) {
    SurfaceMesh out = mesh;
    for (Vec3& v : out.vertices) v += shift;
    if (out.sphere) out.sphere->center += shift;
    out.finalize();
    return out;
}

SurfaceMesh rotated(const SurfaceMesh& mesh, const Mat3& rot) {
    SurfaceMesh out = mesh;
    for (Vec3& v : out.vertices) v = rot * v;
    if (out.sphere) out.sphere->center = rot * out.sphere->center;
    out.finalize();
    return out;
}

SurfaceMesh make_cube() {
    SurfaceMesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                  {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    m.faces = {{0, 2, 1}, {0, 3, 2},   // z = 0
               {4, 5, 6}, {4, 6, 7},   // z = 1
               {0, 1, 5}, {0, 5, 4},   // y = 0
               {2, 3, 7}, {2, 7, 6},   // y = 1
               {0, 4, 7}, {0, 7, 3},   // x = 0
               {1, 2, 6}, {1, 6, 5}};  // x = 1
    m.finalize();
    return m;
}

SurfaceMesh make_icosphere(int subdivisions) {
    if (subdivisions < 0) throw MeshError("subdivision count must be non-negative");
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    SurfaceMesh m;
    m.vertices = {{-1, p, 0}, {1, p, 0},   {-1, -p, 0}, {1, -p, 0},
                  {0, -1, p}, {0, 1, p},   {0, -1, -p}, {0, 1, -p},
                  {p, 0, -1}, {p, 0, 1},   {-p, 0, -1}, {-p, 0, 1}};
    for (Vec3& v : m.vertices) v.normalize();
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    m.sphere = SphereProjection{Vec3::Zero(), 1.0};
    m.finalize();
    for (int i = 0; i < subdivisions; ++i) m = refine(m);
    return m;
}

SurfaceMesh make_ellipsoid(double a, double b, double c, int subdivisions) {
    if (a <= 0 || b <= 0 || c <= 0) throw MeshError("ellipsoid semi-axes must be positive");
    SurfaceMesh m = make_icosphere(subdivisions);
    m.sphere.reset();
    for (Vec3& v : m.vertices) v = Vec3(a * v.x(), b * v.y(), c * v.z());
    m.finalize();
    return m;
}

VolumeMoments volume_moments(const SurfaceMesh& mesh) {
    // Divergence theorem with F chosen per integrand:
    //   1        <- x.n / 3
    //   x_i      <- (x_i^2 / 2) n_i
    //   x_i^2    <- (x_i^3 / 3) n_i
    //   x_i x_j  <- (x_i^2 x_j / 2) n_i   (i < j)
    // The integrands are cubic per flat panel, so the degree-5 rule is exact.
    const TriangleRule& rule = TriangleRule::degree5();
    VolumeMoments m;
    for (const Panel& p : mesh.panels) {
        for (int q = 0; q < rule.size(); ++q) {
            const Vec3 x = p.v[0] + rule.u[q] * (p.v[1] - p.v[0]) + rule.v[q] * (p.v[2] - p.v[0]);
            const double w = p.area * rule.w[q];
            m.volume += w * x.dot(p.normal) / 3.0;
            for (int i = 0; i < 3; ++i) {
                m.first[i] += w * 0.5 * x[i] * x[i] * p.normal[i];
                m.second(i, i) += w * x[i] * x[i] * x[i] / 3.0 * p.normal[i];
                for (int j = i + 1; j < 3; ++j) m.second(i, j) += w * 0.5 * x[i] * x[i] * x[j] * p.normal[i];
            }
        }
    }
    m.second(1, 0) = m.second(0, 1);
    m.second(2, 0) = m.second(0, 2);
    m.second(2, 1) = m.second(1, 2);
    if (!(m.volume > 0.0)) throw MeshError("computed volume is not positive");
    return m;
}

VolumeMoments volume_moments_tet_fan(const SurfaceMesh& mesh) {
    // Signed tetrahedra (0, v0, v1, v2); exact simplex moment formulas.
    VolumeMoments m;
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[static_cast<size_t>(f[0])];
        const Vec3& b = mesh.vertices[static_cast<size_t>(f[1])];
        const Vec3& c = mesh.vertices[static_cast<size_t>(f[2])];
        const double vt = a.dot(b.cross(c)) / 6.0;
        const Vec3 s = a + b + c;  // the origin vertex contributes zero
        m.volume += vt;
        m.first += vt * s / 4.0;
        m.second += (vt / 20.0) *
                    (a * a.transpose() + b * b.transpose() + c * c.transpose() + s * s.transpose());
    }
    if (!(m.volume > 0.0)) throw MeshError("computed volume is not positive");
    return m;
}

RigidBasis rigid_basis(const VolumeMoments& moments) {
    if (!(moments.volume > 0.0)) throw MeshError("rigid basis requires positive volume");
    const Mat3 J = moments.second_centered();
    {
        Eigen::SelfAdjointEigenSolver<Mat3> es(J);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw MeshError("degenerate solid: centered second moments are not positive definite");
    }
    RigidBasis basis;
    basis.moments = moments;
    const Vec3 c = moments.centroid();
    const double inv_sqrt_v = 1.0 / std::sqrt(moments.volume);
    for (int n = 0; n < 3; ++n) {
        basis.fields[static_cast<size_t>(n)].a = inv_sqrt_v * Vec3::Unit(n);
        basis.fields[static_cast<size_t>(n)].center = c;
    }

    // Infinitesimal rotation generators about the centroid and their exact
    // L2(D) Gram matrix in terms of the centered second moments.
    Mat3 gen[3];
    gen[0] << 0, 1, 0, -1, 0, 0, 0, 0, 0;   // (y2, -y1, 0)
    gen[1] << 0, 0, 1, 0, 0, 0, -1, 0, 0;   // (y3, 0, -y1)
    gen[2] << 0, 0, 0, 0, 0, 1, 0, -1, 0;   // (0, y3, -y2)
    Mat3 G;
    G(0, 0) = J(0, 0) + J(1, 1);
    G(1, 1) = J(0, 0) + J(2, 2);
    G(2, 2) = J(1, 1) + J(2, 2);
    G(0, 1) = G(1, 0) = J(1, 2);
    G(0, 2) = G(2, 0) = -J(0, 2);
    G(1, 2) = G(2, 1) = J(0, 1);

    // Gram-Schmidt via Cholesky: rows of L^{-1} give the orthonormal combinations.
    Eigen::LLT<Mat3> llt(G);
    if (llt.info() != Eigen::Success)
        throw MeshError("rotation generators are linearly dependent in L2(D)");
    const Mat3 W = llt.matrixL().solve(Mat3::Identity());
    for (int k = 0; k < 3; ++k) {
        Mat3 B = Mat3::Zero();
        for (int mcol = 0; mcol <= k; ++mcol) B += W(k, mcol) * gen[mcol];
        basis.fields[static_cast<size_t>(3 + k)].B = B;
        basis.fields[static_cast<size_t>(3 + k)].center = c;
    }
    basis.d4 = W(0, 0);
    basis.d5 = W(1, 1);
    basis.d6 = W(2, 2);
    basis.L1 = -W(1, 0) / W(1, 1);
    basis.L3 = -W(2, 1) / W(2, 2);
    basis.L2 = basis.L3 * basis.L1 - W(2, 0) / W(2, 2);
    return basis;
}

Mat6 basis_gram(const RigidBasis& basis) {
    const VolumeMoments& m = basis.moments;
    const Vec3 c = m.centroid();
    const Vec3 iy = m.first - m.volume * c;  // residual of the centering, ~roundoff
    const Mat3 J = m.second_centered();
    Mat6 g;
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            const RigidBodyField& fi = basis.fields[static_cast<size_t>(i)];
            const RigidBodyField& fj = basis.fields[static_cast<size_t>(j)];
            double v = fi.a.dot(fj.a) * m.volume;
            v += fi.a.dot(fj.B * iy) + fj.a.dot(fi.B * iy);
            v += (fi.B.transpose() * fj.B * J).trace();
            g(i, j) = v;
        }
    }
    return g;
}

Eigen::MatrixXd basis_traces(const SurfaceMesh& mesh, const RigidBasis& basis) {
    const int n = mesh.num_panels();
    Eigen::MatrixXd t(3 * n, 6);
    for (int p = 0; p < n; ++p)
        for (int i = 0; i < 6; ++i)
            t.block<3, 1>(3 * p, i) = basis.eval(i, mesh.panels[static_cast<size_t>(p)].centroid);
    return t;
}

bool point_inside(const SurfaceMesh& mesh, const Vec3& x) {
    // Sum of signed solid angles: ~4*pi inside, ~0 outside.
    double omega = 0.0;
    for (const Panel& p : mesh.panels) {
        const Vec3 a = p.v[0] - x, b = p.v[1] - x, c = p.v[2] - x;
        const double la = a.norm(), lb = b.norm(), lc = c.norm();
        const double num = a.dot(b.cross(c));
        const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        omega += 2.0 * std::atan2(num, den);
    }
    return std::abs(omega) > 2.0 * M_PI;
}

namespace {

double point_triangle_distance(const Vec3& p, const Triangle& t) {
    // Closest point on a triangle (Ericson, Real-Time Collision Detection 5.1.5).
    const Vec3 ab = t[1] - t[0], ac = t[2] - t[0], ap = p - t[0];
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return (p - t[0]).norm();
    const Vec3 bp = p - t[1];
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return (p - t[1]).norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (t[0] + (d1 / (d1 - d3)) * ab)).norm();
    const Vec3 cp = p - t[2];
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return (p - t[2]).norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (t[0] + (d2 / (d2 - d6)) * ac)).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return (p - (t[1] + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (t[2] - t[1]))).norm();
    const double denom = 1.0 / (va + vb + vc);
    return (p - (t[0] + ab * (vb * denom) + ac * (vc * denom))).norm();
}

}  // namespace

double distance_to_surface(const SurfaceMesh& mesh, const Vec3& x) {
    double d = std::numeric_limits<double>::infinity();
    for (const Panel& p : mesh.panels) d = std::min(d, point_triangle_distance(x, p.v));
    return d;
}

}  // namespace elastores
