#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "elastores/errors.hpp"
#include "elastores/geometry.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace elastores;

namespace {

const double kPi = 3.14159265358979323846;

void check_moments_close(const VolumeMoments& a, const VolumeMoments& b, double tol) {
    CHECK(std::abs(a.volume - b.volume) <= tol * std::max(1.0, std::abs(a.volume)));
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(a.first[i] - b.first[i]) <= tol * std::max(1.0, std::abs(a.first[i])));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(a.second(i, j) - b.second(i, j)) <=
                  tol * std::max(1.0, std::abs(a.second(i, j))));
}

}  // namespace

TEST_CASE("unit cube: panel geometry and moments") {
    SurfaceMesh cube = make_cube();
    CHECK(cube.num_panels() == 12);
    CHECK(cube.surface_area() == doctest::Approx(6.0).epsilon(1e-14));

    VolumeMoments m = volume_moments(cube);
    CHECK(m.volume == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.centroid().isApprox(Vec3(0.5, 0.5, 0.5), 1e-13));
    // \int x_i^2 = 1/3, \int x_i x_j = 1/4 over [0,1]^3
    for (int i = 0; i < 3; ++i) CHECK(m.second(i, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(m.second(0, 1) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(m.second(1, 2) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("surface moments agree with the tetrahedral-fan route") {
    for (const SurfaceMesh& mesh :
         {make_cube(), translated(make_cube(), Vec3(1.7, -0.3, 2.2)), make_icosphere(1),
          make_ellipsoid(1.0, 0.8, 0.65, 1)}) {
        check_moments_close(volume_moments(mesh), volume_moments_tet_fan(mesh), 1e-12);
    }
}

TEST_CASE("translated cube moves its centroid only") {
    SurfaceMesh cube = translated(make_cube(), Vec3(1, 0, 0));
    VolumeMoments m = volume_moments(cube);
    CHECK(m.volume == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.centroid().isApprox(Vec3(1.5, 0.5, 0.5), 1e-13));
    CHECK(m.second_centered().isApprox(volume_moments(make_cube()).second_centered(), 1e-12));
}

TEST_CASE("OFF writer/reader round trip") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "elastores_cube_roundtrip.off";
    SurfaceMesh cube = make_cube();
    save_off(cube, path.string());
    SurfaceMesh loaded = load_off(path.string());
    fs::remove(path);
    REQUIRE(loaded.num_panels() == 12);
    CHECK(!loaded.sphere);
    check_moments_close(volume_moments(cube), volume_moments(loaded), 1e-15);
}

TEST_CASE("OFF round trip keeps the sphere projection marker") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "elastores_ball_roundtrip.off";
    const Vec3 center(0.5, -1.0, 2.0);
    SurfaceMesh ball = translated(make_icosphere(0), center);
    REQUIRE(ball.sphere);
    save_off(ball, path.string());
    SurfaceMesh loaded = load_off(path.string());
    fs::remove(path);
    REQUIRE(loaded.sphere);
    CHECK((loaded.sphere->center - center).norm() < 1e-15);
    CHECK(loaded.sphere->radius == doctest::Approx(1.0).epsilon(1e-15));
    // the marker is what makes refinement converge to the ball again
    SurfaceMesh fine = refine(loaded);
    for (const Vec3& v : fine.vertices) CHECK(std::abs((v - center).norm() - 1.0) < 1e-14);
}

TEST_CASE("OFF parser accepts comments and fixes inward orientation") {
    std::stringstream ss;
    ss << "OFF # header\n# a tetrahedron, deliberately inward-oriented\n4 4 0\n"
       << "0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
       << "3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";
    SurfaceMesh tet = parse_off(ss, "tet");
    CHECK(volume_moments(tet).volume == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("OFF parser rejects malformed input") {
    auto expect_mesh_error = [](const std::string& text) {
        std::stringstream ss(text);
        CHECK_THROWS_AS(parse_off(ss, "bad"), MeshError);
    };
    expect_mesh_error("NOFF\n4 4 0\n");
    // vertex index out of range
    expect_mesh_error(
        "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 9\n3 0 3 2\n3 1 2 3\n");
    // quad face
    expect_mesh_error("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n");
    // open surface (one face missing)
    expect_mesh_error("OFF\n4 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n");
    // trailing tokens
    expect_mesh_error(
        "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n7 7\n");
    // closed but volume-free surface
    expect_mesh_error("OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n3 0 2 1\n");
    const std::string tet_body =
        "4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
    // sphere annotations: truncated, non-positive radius, vertices off the sphere
    expect_mesh_error("OFF\n# sphere 0 0 0\n" + tet_body);
    expect_mesh_error("OFF\n# sphere 0 0 0 -1\n" + tet_body);
    expect_mesh_error("OFF\n# sphere 0 0 0 1\n" + tet_body);
}

TEST_CASE("icosphere volume converges to the ball from below at second order") {
    const double exact = 4.0 * kPi / 3.0;
    double err[3];
    for (int s = 1; s <= 3; ++s) {
        SurfaceMesh m = make_icosphere(s);
        CHECK(m.num_panels() == 20 * (1 << (2 * s)));
        const double v = volume_moments(m).volume;
        CHECK(v < exact);
        err[s - 1] = exact - v;
        CHECK(err[s - 1] > 0.0);
    }
    const double order12 = std::log2(err[0] / err[1]);
    const double order23 = std::log2(err[1] / err[2]);
    CHECK(order12 > 1.8);
    CHECK(order12 < 2.2);
    CHECK(order23 > 1.8);
    CHECK(order23 < 2.2);
}

TEST_CASE("refinement: counts, projection, and flat invariance") {
    SurfaceMesh cube = make_cube();
    SurfaceMesh cube2 = refine(refine(cube));
    CHECK(cube2.num_panels() == 12 * 16);
    check_moments_close(volume_moments(cube), volume_moments(cube2), 1e-13);

    SurfaceMesh ico = make_icosphere(2);
    CHECK(ico.num_panels() == 320);
    SurfaceMesh ico2 = refine(ico);
    CHECK(ico2.num_panels() == 1280);
    for (const Vec3& v : ico2.vertices) CHECK(std::abs(v.norm() - 1.0) < 1e-14);
    CHECK(volume_moments(ico2).volume > volume_moments(ico).volume);
}

TEST_CASE("rigid basis on analytic ball moments") {
    VolumeMoments ball;
    ball.volume = 4.0 * kPi / 3.0;
    ball.first = Vec3::Zero();
    ball.second = (4.0 * kPi / 15.0) * Mat3::Identity();
    RigidBasis basis = rigid_basis(ball);
    CHECK(basis.d4 == doctest::Approx(1.0 / std::sqrt(8.0 * kPi / 15.0)).epsilon(1e-14));
    CHECK(basis.d4 == doctest::Approx(0.77254).epsilon(1e-4));
    CHECK(std::abs(basis.L1) < 1e-14);
    CHECK(std::abs(basis.L2) < 1e-14);
    CHECK(std::abs(basis.L3) < 1e-14);
    CHECK((basis_gram(basis) - Mat6::Identity()).norm() < 1e-13);
}

TEST_CASE("rigid basis: orthonormality and structure on meshes") {
    for (const SurfaceMesh& mesh : {make_cube(), make_icosphere(2),
                                    make_ellipsoid(1.0, 0.8, 0.65, 2),
                                    translated(make_icosphere(1), Vec3(1.7, -0.3, 2.2))}) {
        RigidBasis basis = rigid_basis(volume_moments(mesh));
        CHECK((basis_gram(basis) - Mat6::Identity()).norm() <= 1e-10);
        for (int i = 0; i < 6; ++i) {
            const Mat3& B = basis.fields[static_cast<size_t>(i)].B;
            // strain-free: the linear part must be exactly antisymmetric
            CHECK((B + B.transpose()).norm() == 0.0);
            if (i < 3) CHECK(B.norm() == 0.0);
        }
    }
}

TEST_CASE("rigid basis translations scale with the volume") {
    RigidBasis basis = rigid_basis(volume_moments(make_cube()));
    CHECK(basis.fields[0].a.isApprox(Vec3(1, 0, 0), 1e-14));
    CHECK(basis.fields[1].a.isApprox(Vec3(0, 1, 0), 1e-14));
    CHECK(basis.fields[2].B.norm() == 0.0);
}

TEST_CASE("rigid basis is translation covariant") {
    const Vec3 shift(1.7, -0.3, 2.2);
    RigidBasis b0 = rigid_basis(volume_moments(make_ellipsoid(1.0, 0.8, 0.65, 1)));
    RigidBasis b1 =
        rigid_basis(volume_moments(translated(make_ellipsoid(1.0, 0.8, 0.65, 1), shift)));
    for (int i = 0; i < 6; ++i) {
        const auto& f0 = b0.fields[static_cast<size_t>(i)];
        const auto& f1 = b1.fields[static_cast<size_t>(i)];
        CHECK(f0.a.isApprox(f1.a, 1e-10));
        CHECK((f0.B - f1.B).norm() < 1e-10 * std::max(1.0, f0.B.norm()));
        CHECK(f1.center.isApprox(f0.center + shift, 1e-10));
    }
}

TEST_CASE("basis traces sample the fields at panel centroids") {
    SurfaceMesh cube = make_cube();
    RigidBasis basis = rigid_basis(volume_moments(cube));
    Eigen::MatrixXd t = basis_traces(cube, basis);
    REQUIRE(t.rows() == 36);
    REQUIRE(t.cols() == 6);
    for (int p = 0; p < 12; ++p) {
        CHECK(t.block<3, 1>(3 * p, 0).isApprox(Vec3(1, 0, 0), 1e-14));
        const Vec3 expected = basis.eval(4, cube.panels[static_cast<size_t>(p)].centroid);
        CHECK(t.block<3, 1>(3 * p, 4).isApprox(expected, 1e-14));
    }
}

TEST_CASE("point classification and surface distance") {
    SurfaceMesh cube = make_cube();
    CHECK(point_inside(cube, Vec3(0.5, 0.5, 0.5)));
    CHECK(!point_inside(cube, Vec3(2, 2, 2)));
    CHECK(!point_inside(cube, Vec3(-0.01, 0.5, 0.5)));
    CHECK(distance_to_surface(cube, Vec3(0.5, 0.5, 0.5)) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(distance_to_surface(cube, Vec3(2.0, 0.5, 0.5)) == doctest::Approx(1.0).epsilon(1e-13));

    SurfaceMesh ico = make_icosphere(1);
    CHECK(point_inside(ico, Vec3(0, 0, 0)));
    CHECK(!point_inside(ico, Vec3(0, 0, 1.01)));
}
