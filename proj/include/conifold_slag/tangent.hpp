#pragma once

// Tangent vectors to the resolved conifold, expressed by their components in
// the holomorphic chart of the base point, plus the chain rule to ambient
// (X,Y,U,V) velocities, chart changes and group pushforwards.

#include <array>

#include "conifold_slag/ambient.hpp"

namespace conifold_slag {

template <class Point>
struct TangentVector {
    Point base{};
    Vec3c components = Vec3c::Zero();
};

using ResolvedTangent = TangentVector<ResolvedPoint>;

/// Three tangent vectors sharing one base point.
template <class Point>
struct TangentFrame {
    Point base{};
    std::array<Vec3c, 3> v{Vec3c::Zero(), Vec3c::Zero(), Vec3c::Zero()};

    TangentVector<Point> vector(int i) const { return {base, v[static_cast<std::size_t>(i)]}; }
};

using ResolvedFrame = TangentFrame<ResolvedPoint>;

/// (dX, dY, dU, dV) of a chart velocity c at p.
inline Vec4c fiber_velocity(const ResolvedPoint& p, const Vec3c& c) {
    const Vec3c& x = p.local();
    const Complex l = x[2];
    if (p.patch() == Patch::HPlus) {
        // X = -l U, V = -l Y
        return Vec4c(-c[2] * x[0] - l * c[0], c[1], c[0], -c[2] * x[1] - l * c[1]);
    }
    // U = -l X, Y = -l V
    return Vec4c(c[0], -c[2] * x[1] - l * c[1], -c[2] * x[0] - l * c[0], c[1]);
}

/// Velocity of the homogeneous pair (l1, l2) with the chart normalization.
inline Vec2c homogeneous_velocity(const ResolvedPoint& p, const Vec3c& c) {
    return p.patch() == Patch::HPlus ? Vec2c(0.0, c[2]) : Vec2c(c[2], 0.0);
}

inline Vec2c homogeneous_lambda(const ResolvedPoint& p) {
    return p.patch() == Patch::HPlus ? Vec2c(1.0, p.lambda()) : Vec2c(p.lambda(), 1.0);
}

/// Chart components at target from ambient and homogeneous velocities.
inline Vec3c chart_components(const ResolvedPoint& target, const Vec4c& dw, const Vec2c& l, const Vec2c& dl) {
    if (target.patch() == Patch::HPlus) {
        return Vec3c(dw[2], dw[1], (dl[1] * l[0] - l[1] * dl[0]) / (l[0] * l[0]));
    }
    return Vec3c(dw[0], dw[3], (dl[0] * l[1] - l[0] * dl[1]) / (l[1] * l[1]));
}

/// Express v in another chart (Jacobian of the transition map).
inline ResolvedTangent to_patch(const ResolvedTangent& v, Patch target) {
    if (v.base.patch() == target) return v;
    const ResolvedPoint q = with_patch(v.base, target);
    return {q, chart_components(q, fiber_velocity(v.base, v.components), homogeneous_lambda(v.base),
                                homogeneous_velocity(v.base, v.components))};
}

inline ResolvedFrame to_patch(const ResolvedFrame& f, Patch target) {
    if (f.base.patch() == target) return f;
    ResolvedFrame out;
    for (int i = 0; i < 3; ++i) {
        const ResolvedTangent t = to_patch(f.vector(i), target);
        out.base = t.base;
        out.v[static_cast<std::size_t>(i)] = t.components;
    }
    return out;
}

/// The point with chart coordinates local + h * c.
inline ResolvedPoint displace(const ResolvedPoint& p, const Vec3c& c, double h) {
    return ResolvedPoint::from_local(p.patch(), p.local() + h * c);
}

/// Pushforward of a tangent vector by a group element; the result is based
/// at apply(g, v.base).
inline ResolvedTangent pushforward(const GroupElement& g, const ResolvedTangent& v) {
    const Mat4c gt = g.kind == GroupKind::ConjugatedGL4 ? g.matrix : conjugate_action(g.real).matrix;
    const Mat2c lm = lambda_map(gt);
    const ResolvedPoint q = apply(g, v.base);
    const Vec4c dw = gt * fiber_velocity(v.base, v.components);
    const Vec2c l = lm * homogeneous_lambda(v.base);
    const Vec2c dl = lm * homogeneous_velocity(v.base, v.components);
    return {q, chart_components(q, dw, l, dl)};
}

inline ResolvedFrame pushforward(const GroupElement& g, const ResolvedFrame& f) {
    ResolvedFrame out;
    for (int i = 0; i < 3; ++i) {
        const ResolvedTangent t = pushforward(g, f.vector(i));
        out.base = t.base;
        out.v[static_cast<std::size_t>(i)] = t.components;
    }
    return out;
}

/// Chart components of the infinitesimal action of a generator at p.
inline Vec3c generator_components(const Mat4c& m, const ResolvedPoint& p) {
    const Vec4c dw = m * p.xyuv().vector();
    const Complex dl = lambda_velocity(m, p.lambda(), p.patch());
    if (p.patch() == Patch::HPlus) return Vec3c(dw[2], dw[1], dl);
    return Vec3c(dw[0], dw[3], dl);
}

}  // namespace conifold_slag
