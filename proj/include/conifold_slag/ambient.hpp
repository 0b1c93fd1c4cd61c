#pragma once

// Coordinates on C^4, the conifold XY - UV = 0 and its small resolution
// {(X,Y,U,V,[l1:l2]) : X l1 + U l2 = 0, V l1 + Y l2 = 0}, the two
// inhomogeneous patches H+ (l1 != 0, chart (U,Y,l+)) and H- (l2 != 0,
// chart (X,V,l-)), and the SO(4) action conjugated into (X,Y,U,V).

#include <array>
#include <cmath>
#include <string>

#include "conifold_slag/numerics.hpp"

namespace conifold_slag {

/// Relative tolerance for on-variety checks, scaled by r^2.
inline constexpr double kVarietyTolerance = 1e-9;

struct ZPoint {
    Vec4c z = Vec4c::Zero();
};

struct XyuvPoint {
    Complex X{}, Y{}, U{}, V{};

    static XyuvPoint from_vector(const Vec4c& w) { return {w[0], w[1], w[2], w[3]}; }
    Vec4c vector() const { return Vec4c(X, Y, U, V); }
    double radius_sq() const { return std::norm(X) + std::norm(Y) + std::norm(U) + std::norm(V); }
    /// XY - UV; zero on the conifold.
    Complex quadric() const { return X * Y - U * V; }
};

struct CP1Point {
    Complex l1{1.0, 0.0}, l2{};

    Vec2c homogeneous() const { return Vec2c(l1, l2); }
    Complex lambda_plus() const { return l2 / l1; }
    Complex lambda_minus() const { return l1 / l2; }
    /// |l2|^2 / (|l1|^2 + |l2|^2), the moment map of the standard circle action.
    double height() const { return std::norm(l2) / (std::norm(l1) + std::norm(l2)); }
};

/// True when two homogeneous pairs describe the same point of CP^1.
inline double projective_distance(const CP1Point& a, const CP1Point& b) {
    const double na = std::sqrt(std::norm(a.l1) + std::norm(a.l2));
    const double nb = std::sqrt(std::norm(b.l1) + std::norm(b.l2));
    return std::abs(a.l1 * b.l2 - a.l2 * b.l1) / (na * nb);
}

enum class Patch { HPlus, HMinus };

inline const char* to_string(Patch p) { return p == Patch::HPlus ? "H+" : "H-"; }

/// A point of the resolved conifold. The chart coordinates are canonical; the
/// ambient (X,Y,U,V) and the CP^1 datum are derived from them, so the defining
/// equations hold to rounding.
class ResolvedPoint {
public:
    ResolvedPoint() = default;

    static ResolvedPoint from_plus(Complex U, Complex Y, Complex lambda_plus) {
        ResolvedPoint p;
        p.patch_ = Patch::HPlus;
        p.local_ = Vec3c(U, Y, lambda_plus);
        p.xyuv_ = {-lambda_plus * U, Y, U, -lambda_plus * Y};
        p.cp1_ = {Complex(1.0), lambda_plus};
        return p;
    }

    static ResolvedPoint from_minus(Complex X, Complex V, Complex lambda_minus) {
        ResolvedPoint p;
        p.patch_ = Patch::HMinus;
        p.local_ = Vec3c(X, V, lambda_minus);
        p.xyuv_ = {X, -lambda_minus * V, -lambda_minus * X, V};
        p.cp1_ = {lambda_minus, Complex(1.0)};
        return p;
    }

    static ResolvedPoint from_local(Patch patch, const Vec3c& c) {
        return patch == Patch::HPlus ? from_plus(c[0], c[1], c[2]) : from_minus(c[0], c[1], c[2]);
    }

    Patch patch() const { return patch_; }
    /// (U, Y, l+) in H+, (X, V, l-) in H-.
    const Vec3c& local() const { return local_; }
    const XyuvPoint& xyuv() const { return xyuv_; }
    const CP1Point& cp1() const { return cp1_; }
    /// The inhomogeneous CP^1 coordinate of the working patch.
    Complex lambda() const { return local_[2]; }
    double radius_sq() const { return xyuv_.radius_sq(); }

    friend bool operator==(const ResolvedPoint& a, const ResolvedPoint& b) {
        return a.patch_ == b.patch_ && a.local_ == b.local_;
    }

private:
    Patch patch_ = Patch::HPlus;
    Vec3c local_ = Vec3c::Zero();
    XyuvPoint xyuv_{};
    CP1Point cp1_{};
};

/// The unitary change of basis (X,Y,U,V) = P (z0,z1,z2,z3).
inline const Mat4c& change_of_basis() {
    static const Mat4c P = [] {
        Mat4c m;
        const double s = 1.0 / std::sqrt(2.0);
        m << s, -kI * s, 0, 0,
             s, kI * s, 0, 0,
             0, 0, -kI * s, s,
             0, 0, -kI * s, -s;
        return m;
    }();
    return P;
}

inline XyuvPoint to_xyuv(const ZPoint& z) { return XyuvPoint::from_vector(change_of_basis() * z.z); }

inline ZPoint to_z(const XyuvPoint& w) { return {change_of_basis().adjoint() * w.vector()}; }

/// Sum of z_i^2; equals 2(XY - UV).
inline Complex quadric_z(const ZPoint& z) { return (z.z.array() * z.z.array()).sum(); }

/// Blow-down inverse away from the origin. The CP^1 datum comes from the
/// larger of the representatives [-U:X] and [-Y:V]; the patch from
/// max(|l1|, |l2|) with ties going to H+.
inline ResolvedPoint lift_to_resolved(const XyuvPoint& w, double tol = kVarietyTolerance) {
    const double rsq = w.radius_sq();
    if (rsq == 0.0) throw OriginError("lift_to_resolved: the origin is blown up, no unique lift");
    if (std::abs(w.quadric()) > tol * rsq) throw NotOnQuadric("lift_to_resolved: |XY-UV| exceeds tolerance");
    const Vec2c r1(-w.U, w.X);
    const Vec2c r2(-w.Y, w.V);
    const Vec2c l = r1.norm() >= r2.norm() ? r1 : r2;
    if (std::abs(l[0]) >= std::abs(l[1])) return ResolvedPoint::from_plus(w.U, w.Y, l[1] / l[0]);
    return ResolvedPoint::from_minus(w.X, w.V, l[0] / l[1]);
}

/// Re-express p in the requested patch. Throws PatchBoundary when the target
/// inhomogeneous coordinate does not exist.
inline ResolvedPoint with_patch(const ResolvedPoint& p, Patch target) {
    if (p.patch() == target) return p;
    const Complex l = p.lambda();
    if (l == Complex(0.0)) throw PatchBoundary("transition: inhomogeneous coordinate is zero, target chart undefined");
    const Vec3c& c = p.local();
    if (target == Patch::HMinus) return ResolvedPoint::from_minus(-l * c[0], -l * c[1], 1.0 / l);
    return ResolvedPoint::from_plus(-l * c[0], -l * c[1], 1.0 / l);
}

/// Chart change on the overlap: (X,V,l-) = (-l+ U, -l+ Y, 1/l+) and back.
inline ResolvedPoint transition(const ResolvedPoint& p) {
    return with_patch(p, p.patch() == Patch::HPlus ? Patch::HMinus : Patch::HPlus);
}

/// The patch picked by max(|l1|, |l2|), ties to H+.
inline Patch preferred_patch(const ResolvedPoint& p) {
    return std::abs(p.cp1().l1) >= std::abs(p.cp1().l2) ? Patch::HPlus : Patch::HMinus;
}

inline ResolvedPoint with_preferred_patch(const ResolvedPoint& p) { return with_patch(p, preferred_patch(p)); }

/// r^2 = |X|^2+|Y|^2+|U|^2+|V|^2 = (1+|l|^2)(fiber chart norm).
inline double radius_sq(const ResolvedPoint& p) { return p.radius_sq(); }

inline double radius_sq_patch_formula(const ResolvedPoint& p) {
    const Vec3c& c = p.local();
    return (1.0 + std::norm(c[2])) * (std::norm(c[0]) + std::norm(c[1]));
}

// ---------------------------------------------------------------------------
// Group actions

enum class GroupKind { SO4, ConjugatedGL4 };

struct GroupElement {
    GroupKind kind = GroupKind::SO4;
    Mat4 real = Mat4::Identity();      ///< g acting on z
    Mat4c matrix = Mat4c::Identity();  ///< g itself (SO4) or P g P* (ConjugatedGL4)
};

inline void require_special_orthogonal(const Mat4& g, double tol = 1e-12) {
    if ((g.transpose() * g - Mat4::Identity()).cwiseAbs().maxCoeff() > tol)
        throw NotOrthogonal("matrix is not orthogonal");
    if (std::abs(g.determinant() - 1.0) > tol) throw NotOrthogonal("matrix has determinant != 1");
}

/// g~ = P g P*.
inline GroupElement conjugate_action(const Mat4& g) {
    require_special_orthogonal(g);
    return {GroupKind::ConjugatedGL4, g, change_of_basis() * g.cast<Complex>() * change_of_basis().adjoint()};
}

namespace detail {

inline Mat2c w_matrix(const Vec4c& w) {
    Mat2c m;
    m << w[0], w[2], w[3], w[1];
    return m;
}

inline Vec4c w_vector(const Mat2c& m) { return Vec4c(m(0, 0), m(1, 1), m(0, 1), m(1, 0)); }

}  // namespace detail

/// The induced linear action on [l1:l2]. A conjugated SO(4) element acts on
/// W = [[X,U],[V,Y]] as W -> L W R with L, R in SL(2,C); the kernel line
/// transforms as l -> R^{-1} l. R is read off from images of the rank-one
/// matrices E_ij = e_i e_j^T, whose rows are multiples of R^T e_j.
inline Mat2c lambda_map(const Mat4c& gt) {
    auto image = [&](int i, int j) {
        Mat2c e = Mat2c::Zero();
        e(i, j) = 1.0;
        return detail::w_matrix(gt * detail::w_vector(e));
    };
    int best_i = 0, best_k = 0;
    double best = -1.0;
    for (int i = 0; i < 2; ++i) {
        const Mat2c a = image(i, 0), b = image(i, 1);
        for (int k = 0; k < 2; ++k) {
            const double m = a.row(k).norm() + b.row(k).norm();
            if (m > best) {
                best = m;
                best_i = i;
                best_k = k;
            }
        }
    }
    Mat2c rt;
    rt.col(0) = image(best_i, 0).row(best_k).transpose();
    rt.col(1) = image(best_i, 1).row(best_k).transpose();
    return rt.transpose().inverse();
}

inline ResolvedPoint apply(const GroupElement& g, const ResolvedPoint& p) {
    const Mat4c gt = g.kind == GroupKind::ConjugatedGL4 ? g.matrix : conjugate_action(g.real).matrix;
    const Vec4c w = gt * p.xyuv().vector();
    const Vec2c l = lambda_map(gt) * p.cp1().homogeneous();
    if (std::abs(l[0]) >= std::abs(l[1])) return ResolvedPoint::from_plus(w[2], w[1], l[1] / l[0]);
    return ResolvedPoint::from_minus(w[0], w[3], l[0] / l[1]);
}

/// Rotation generator in the (i, j) coordinate plane of C^4 ⊃ R^4:
/// exp(t M) sends e_i to cos(t) e_i + sin(t) e_j.
inline Mat4 plane_generator(int i, int j) {
    Mat4 m = Mat4::Zero();
    m(j, i) = 1.0;
    m(i, j) = -1.0;
    return m;
}

/// The six plane rotations spanning so(4).
inline std::array<Mat4, 6> so4_basis() {
    return {plane_generator(0, 1), plane_generator(0, 2), plane_generator(0, 3),
            plane_generator(1, 2), plane_generator(1, 3), plane_generator(2, 3)};
}

enum class GeneratorName { B1, B2, A1, A2, A3 };

inline const char* to_string(GeneratorName n) {
    switch (n) {
        case GeneratorName::B1: return "B1";
        case GeneratorName::B2: return "B2";
        case GeneratorName::A1: return "A1";
        case GeneratorName::A2: return "A2";
        case GeneratorName::A3: return "A3";
    }
    return "?";
}

/// An infinitesimal generator: the real plane rotation acting on z and its
/// conjugate acting on (X,Y,U,V).
struct Generator {
    GeneratorName name = GeneratorName::B1;
    Mat4 real = Mat4::Zero();
    Mat4c matrix = Mat4c::Zero();
};

/// B~1 generates the first torus factor (z0z1 rotation), B~2 = A~1 the z2z3
/// rotation, A~2 and A~3 the z1z3 and z1z2 rotations of SO(3) ⊂ SO(4).
inline Generator make_generator(GeneratorName n) {
    Mat4 m;
    switch (n) {
        case GeneratorName::B1: m = plane_generator(0, 1); break;
        case GeneratorName::B2: m = plane_generator(2, 3); break;
        case GeneratorName::A1: m = plane_generator(2, 3); break;
        case GeneratorName::A2: m = plane_generator(3, 1); break;
        case GeneratorName::A3: m = plane_generator(1, 2); break;
    }
    return {n, m, change_of_basis() * m.cast<Complex>() * change_of_basis().adjoint()};
}

inline std::array<Generator, 2> torus_generators() {
    return {make_generator(GeneratorName::B1), make_generator(GeneratorName::B2)};
}

inline std::array<Generator, 3> so3_generators() {
    return {make_generator(GeneratorName::A1), make_generator(GeneratorName::A2),
            make_generator(GeneratorName::A3)};
}

/// exp(t M) for a real skew M with M^3 = -M (a unit plane rotation): exact.
inline Mat4 plane_exponential(const Mat4& m, double t) {
    return Mat4::Identity() + std::sin(t) * m + (1.0 - std::cos(t)) * m * m;
}

/// Velocity of the inhomogeneous coordinate under the conjugated generator
/// m: a quadratic polynomial in l, read off from d l+ = -(dX + l+ dU)/U.
inline Complex lambda_velocity(const Mat4c& m, Complex l, Patch patch) {
    const Complex diag = m(0, 0) - m(2, 2);
    if (patch == Patch::HPlus) return m(2, 0) * l * l + diag * l - m(0, 2);
    return -m(2, 0) - diag * l + m(0, 2) * l * l;
}

/// Traceless 2x2 matrix A with d/dt [l1:l2] = A [l1:l2] for the generator m.
inline Mat2c lambda_generator(const Mat4c& m) {
    const Complex diag = m(0, 0) - m(2, 2);
    Mat2c a;
    a << -0.5 * diag, -m(2, 0), -m(0, 2), 0.5 * diag;
    return a;
}

inline ResolvedPoint generator_flow(const Generator& gen, double t, const ResolvedPoint& p) {
    const ResolvedPoint q = apply(conjugate_action(plane_exponential(gen.real, t)), p);
    // Stay in the input chart when it is still valid there.
    if (q.patch() != p.patch()) {
        const Complex l = q.lambda();
        if (l != Complex(0.0)) return with_patch(q, p.patch());
    }
    return q;
}

}  // namespace conifold_slag
