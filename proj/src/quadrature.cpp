#include "elastores/quadrature.hpp"

#include "elastores/errors.hpp"

#include <cmath>

namespace elastores {

const TriangleRule& TriangleRule::degree2() {
    static const TriangleRule rule = [] {
        TriangleRule r;
        r.u = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
        r.v = {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0};
        r.w = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
        return r;
    }();
    return rule;
}

const TriangleRule& TriangleRule::degree5() {
    static const TriangleRule rule = [] {
        const double s15 = std::sqrt(15.0);
        const double a = (6.0 - s15) / 21.0;   // appears twice in its point
        const double b = (6.0 + s15) / 21.0;
        const double wa = (155.0 - s15) / 1200.0;
        const double wb = (155.0 + s15) / 1200.0;
        TriangleRule r;
        r.u = {1.0 / 3.0, a, 1.0 - 2.0 * a, a, b, 1.0 - 2.0 * b, b};
        r.v = {1.0 / 3.0, a, a, 1.0 - 2.0 * a, b, b, 1.0 - 2.0 * b};
        r.w = {9.0 / 40.0, wa, wa, wa, wb, wb, wb};
        return r;
    }();
    return rule;
}

const TriangleRule& TriangleRule::with_points(int order) {
    if (order == 3) return degree2();
    if (order == 7) return degree5();
    throw ConfigError("unsupported triangle rule order " + std::to_string(order) +
                      " (expected 3 or 7)");
}

const GaussSegment& GaussSegment::order7() {
    static const GaussSegment g = [] {
        // 7-point Gauss-Legendre on [-1,1], mapped to [0,1].
        const double x[7] = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                             0.0,                 0.4058451513773972,  0.7415311855993945,
                             0.9491079123427585};
        const double w[7] = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
                             0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
                             0.1294849661688697};
        GaussSegment s;
        for (int i = 0; i < 7; ++i) {
            s.x.push_back(0.5 * (x[i] + 1.0));
            s.w.push_back(0.5 * w[i]);
        }
        return s;
    }();
    return g;
}

}  // namespace elastores
