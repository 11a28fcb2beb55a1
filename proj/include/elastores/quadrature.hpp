#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace elastores {

using Vec3 = Eigen::Vector3d;

// Symmetric quadrature rule on the reference triangle {(u,v): u,v >= 0, u+v <= 1}.
// Weights sum to one, so for a flat triangle T with vertices (p0,p1,p2)
//   \int_T f ds  ~=  area(T) * sum_q w_q f(p0 + u_q (p1-p0) + v_q (p2-p0)).
struct TriangleRule {
    std::vector<double> u, v, w;

    int size() const { return static_cast<int>(w.size()); }

    // degree-2 (3 points) and degree-5 (7 points) rules; `order` is the point count.
    static const TriangleRule& degree2();
    static const TriangleRule& degree5();
    static const TriangleRule& with_points(int order);
};

// Gauss-Legendre nodes/weights mapped to [0,1]; weights sum to one.
struct GaussSegment {
    std::vector<double> x, w;
    static const GaussSegment& order7();
};

struct QuadratureConfig {
    // Points per panel for well-separated pairs (3 or 7).
    int regular_order = 7;
    // Composite segments per axis of the square obtained by the polar/Duffy
    // transform used for same-panel integrals.
    int singular_subdiv = 1;
    // Maximum 4-way subdivision depth of the inner panel for near pairs.
    int near_depth = 3;
    // A pair is "near" when the centroid distance is below this multiple of the
    // larger panel diameter.
    double near_ratio = 2.0;
    // During adaptive refinement a sub-panel is split while the evaluation point
    // is closer than this multiple of the sub-panel diameter.
    double adapt_ratio = 1.5;
    // Kernel-evaluation budget per panel pair; exceeding it raises an error
    // naming the offending pair.
    std::uint64_t pair_budget = 1000000000ull;
};

using Triangle = std::array<Vec3, 3>;

inline Vec3 triangle_centroid(const Triangle& t) { return (t[0] + t[1] + t[2]) / 3.0; }

inline double triangle_area(const Triangle& t) {
    return 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
}

inline double triangle_diameter(const Triangle& t) {
    const double a = (t[1] - t[0]).norm();
    const double b = (t[2] - t[1]).norm();
    const double c = (t[0] - t[2]).norm();
    return std::max(a, std::max(b, c));
}

namespace detail {
template <typename R>
void accumulate(R& acc, bool& first, const R& term) {
    if (first) {
        acc = term;
        first = false;
    } else {
        acc += term;
    }
}
}  // namespace detail

// sum_q w_q * f(x_q) * area over one flat triangle.
template <typename F>
auto integrate_triangle(const Triangle& t, const TriangleRule& rule, F&& f) {
    using R = std::decay_t<decltype(f(Vec3()))>;
    const double area = triangle_area(t);
    R acc;
    bool first = true;
    for (int q = 0; q < rule.size(); ++q) {
        const Vec3 x = t[0] + rule.u[q] * (t[1] - t[0]) + rule.v[q] * (t[2] - t[0]);
        detail::accumulate(acc, first, R((area * rule.w[q]) * f(x)));
    }
    return acc;
}

// Integral of f over `t` where f may be singular at x0 (a point inside `t`).
// The triangle is split into the three sub-triangles meeting at x0 and each is
// integrated in polar-type coordinates: with y(s,tt) sweeping toward the chord
// opposite x0, the Jacobian is proportional to s and cancels a 1/|x0-y|
// singularity.
template <typename F>
auto integrate_triangle_singular(const Triangle& t, const Vec3& x0, const GaussSegment& gl,
                                 int subdiv, F&& f) {
    using R = std::decay_t<decltype(f(Vec3()))>;
    R acc;
    bool first = true;
    const int n = static_cast<int>(gl.x.size());
    for (int e = 0; e < 3; ++e) {
        const Vec3 ea = t[e] - x0;
        const Vec3 eb = t[(e + 1) % 3] - x0;
        const double jac = ea.cross(eb).norm();  // = 2*area of the sub-triangle
        if (jac <= 0.0) continue;
        for (int is = 0; is < subdiv; ++is) {
            for (int qs = 0; qs < n; ++qs) {
                const double s = (is + gl.x[qs]) / subdiv;
                for (int it = 0; it < subdiv; ++it) {
                    for (int qt = 0; qt < n; ++qt) {
                        const double tt = (it + gl.x[qt]) / subdiv;
                        const Vec3 y = x0 + s * ((1.0 - tt) * ea + tt * eb);
                        const double w = jac * s * gl.w[qs] * gl.w[qt] / (subdiv * subdiv);
                        detail::accumulate(acc, first, R(w * f(y)));
                    }
                }
            }
        }
    }
    return acc;
}

// Near-singular integral of f over `t`: the triangle is 4-way subdivided while
// the evaluation point x0 sits closer than adapt_ratio * diameter, down to
// `depth` levels; leaves use the regular rule. `evals` accumulates the number
// of kernel evaluations spent.
template <typename F>
auto integrate_triangle_near(const Triangle& t, const Vec3& x0, const TriangleRule& rule,
                             int depth, double adapt_ratio, std::uint64_t& evals, F&& f) {
    const double d = (triangle_centroid(t) - x0).norm();
    if (depth <= 0 || d >= adapt_ratio * triangle_diameter(t)) {
        evals += static_cast<std::uint64_t>(rule.size());
        return integrate_triangle(t, rule, f);
    }
    const Vec3 m01 = 0.5 * (t[0] + t[1]);
    const Vec3 m12 = 0.5 * (t[1] + t[2]);
    const Vec3 m20 = 0.5 * (t[2] + t[0]);
    const Triangle kids[4] = {Triangle{t[0], m01, m20}, Triangle{m01, t[1], m12},
                              Triangle{m20, m12, t[2]}, Triangle{m01, m12, m20}};
    auto acc = integrate_triangle_near(kids[0], x0, rule, depth - 1, adapt_ratio, evals, f);
    for (int c = 1; c < 4; ++c)
        acc += integrate_triangle_near(kids[c], x0, rule, depth - 1, adapt_ratio, evals, f);
    return acc;
}

}  // namespace elastores
