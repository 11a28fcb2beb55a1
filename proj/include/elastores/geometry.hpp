#pragma once

#include "elastores/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace elastores {

using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct Panel {
    Triangle v;
    Vec3 centroid;
    Vec3 normal;  // unit outward
    double area;
    double diameter;  // longest edge
};

// Marker for meshes that approximate a sphere; refinement re-projects new
// vertices so the sequence converges to the exact ball.
struct SphereProjection {
    Vec3 center;
    double radius;
};

// Closed, outward-oriented triangulated surface.
struct SurfaceMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Panel> panels;
    std::optional<SphereProjection> sphere;

    int num_panels() const { return static_cast<int>(faces.size()); }
    double surface_area() const;
    // Largest vertex-to-vertex distance (used to scale far-field probes).
    double diameter() const;
    double max_panel_diameter() const;

    // Rebuild panel caches, validate closedness/orientation, and flip all faces
    // if the signed volume is negative. Throws MeshError on defects.
    void finalize();
};

// OFF reader/writer. ASCII, '#' comments, zero-based triangular faces with
// counterclockwise orientation seen from outside.
SurfaceMesh load_off(const std::string& path);
SurfaceMesh parse_off(std::istream& in, const std::string& name);
void save_off(const SurfaceMesh& mesh, const std::string& path);

// Uniform refinement: each triangle splits into four at the edge midpoints.
// Sphere-tagged meshes re-project the midpoints onto the sphere.
SurfaceMesh refine(const SurfaceMesh& mesh);

SurfaceMesh translated(const SurfaceMesh& mesh, const Vec3& shift);
SurfaceMesh rotated(const SurfaceMesh& mesh, const Mat3& rot);

// Reference shapes.
SurfaceMesh make_cube();                      // unit cube [0,1]^3, 12 panels
SurfaceMesh make_icosphere(int subdivisions); // unit sphere, 20*4^n panels
SurfaceMesh make_ellipsoid(double a, double b, double c, int subdivisions);

// Volume, first and second moments of the enclosed solid, exact for
// polyhedra (the integrands are low-degree polynomials per flat panel).
struct VolumeMoments {
    double volume = 0.0;
    Vec3 first = Vec3::Zero();   // \int_D x dV
    Mat3 second = Mat3::Zero();  // \int_D x x^T dV

    Vec3 centroid() const { return first / volume; }
    // \int_D (x - centroid)(x - centroid)^T dV
    Mat3 second_centered() const { return second - first * first.transpose() / volume; }
};

// Surface route: divergence theorem applied panel by panel.
VolumeMoments volume_moments(const SurfaceMesh& mesh);
// Independent volume route: signed tetrahedra fanned from the origin.
// Kept separate from volume_moments on purpose; the two must agree to
// roundoff and serve as cross-checks of each other.
VolumeMoments volume_moments_tet_fan(const SurfaceMesh& mesh);

// One rigid-motion field x -> a + B (x - center) with constant a and B.
struct RigidBodyField {
    Vec3 a = Vec3::Zero();
    Mat3 B = Mat3::Zero();  // antisymmetric for rotations, zero for translations
    Vec3 center = Vec3::Zero();

    Vec3 eval(const Vec3& x) const { return a + B * (x - center); }
};

// L2(D)-orthonormal basis of the rigid motions: three normalized translations
// followed by three Gram-Schmidt-orthonormalized infinitesimal rotations about
// the centroid.
struct RigidBasis {
    std::array<RigidBodyField, 6> fields;
    VolumeMoments moments;
    // Normalization/shear coefficients of the rotation fields, reported for
    // diagnostics only (d4 = first rotation normalizer, etc.).
    double d4 = 0.0, d5 = 0.0, d6 = 0.0;
    double L1 = 0.0, L2 = 0.0, L3 = 0.0;

    Vec3 eval(int i, const Vec3& x) const { return fields[static_cast<size_t>(i)].eval(x); }
};

RigidBasis rigid_basis(const VolumeMoments& moments);

// Exact L2(D) Gram matrix of the basis fields, computed from the moments.
Mat6 basis_gram(const RigidBasis& basis);

// Panel-centroid samples of the basis fields, stacked per panel: column i holds
// (xi_i(c_0); xi_i(c_1); ...), a (3N) x 6 matrix.
Eigen::MatrixXd basis_traces(const SurfaceMesh& mesh, const RigidBasis& basis);

// Winding-number point classification for a closed mesh.
bool point_inside(const SurfaceMesh& mesh, const Vec3& x);

// Distance from x to the surface (exact point-triangle minimum).
double distance_to_surface(const SurfaceMesh& mesh, const Vec3& x);

}  // namespace elastores
