#pragma once

// The Ricci-flat Kahler structure of the resolved conifold,
//
//   g = F'(r^2) tr(dW* dW) + F''(r^2) |tr(W* dW)|^2 + 4a^2 g_FS,
//
// with gamma = r^2 F' the positive root of gamma^3 + 6a^2 gamma^2 = r^4, the
// complex structure of the holomorphic charts, omega(u,v) = g(Ju,v) and the
// holomorphic volume form dU^dY^dl+ = dV^dX^dl-. Flat C^3 with its standard
// structure is provided alongside as an independent testbed.

#include <cmath>
#include <complex>

#include "conifold_slag/tangent.hpp"

namespace conifold_slag {

// ---------------------------------------------------------------------------
// The radial profile

struct GammaResult {
    double gamma = 0.0;
    double gamma_prime = 0.0;  ///< d gamma / d r^2
    Complex N{};               ///< closed-form intermediate, diagnostic only
};

inline Complex closed_form_n(double rsq, double a) {
    const double r4 = rsq * rsq;
    const double a6 = std::pow(a, 6);
    const double disc = r4 * r4 - 32.0 * a6 * r4;
    const Complex root = disc >= 0.0 ? Complex(std::sqrt(disc), 0.0) : Complex(0.0, std::sqrt(-disc));
    return 0.5 * (Complex(r4 - 16.0 * a6, 0.0) + root);
}

/// Unique positive root of p(gamma) = gamma^3 + 6a^2 gamma^2 - r^4 by Newton
/// from an upper bound with bisection as a safeguard. p is increasing and
/// convex on gamma > 0, so the iteration descends monotonically.
inline GammaResult solve_gamma(double rsq, double a) {
    if (a < 0.0) throw DomainError("solve_gamma: resolution parameter must be non-negative");
    if (rsq < 0.0 || (rsq == 0.0 && a == 0.0))
        throw DomainError("solve_gamma: r^2 must be positive on the singular conifold");
    GammaResult out;
    out.N = closed_form_n(rsq, a);
    if (rsq == 0.0) {
        out.gamma = 0.0;
        out.gamma_prime = 1.0 / (std::sqrt(6.0) * a);
        return out;
    }
    const double a2 = a * a;
    const double r4 = rsq * rsq;
    auto p = [&](double g) { return g * g * (g + 6.0 * a2) - r4; };
    auto dp = [&](double g) { return g * (3.0 * g + 12.0 * a2); };
    // Both r^{4/3} and r^2/(sqrt(6) a) satisfy p >= 0.
    double hi = std::cbrt(r4);
    if (a > 0.0) hi = std::min(hi, rsq / (std::sqrt(6.0) * a));
    hi *= 1.0 + 1e-15;
    out.gamma = safeguarded_newton(p, dp, 0.0, hi, hi).root;
    out.gamma_prime = (2.0 / 3.0) * rsq / (out.gamma * (out.gamma + 4.0 * a2));
    return out;
}

/// gamma = -2a^2 + 4a^4 N^{-1/3} + N^{1/3}. For r^4 < 32a^6 N is complex and
/// the principal cube root is used; the imaginary part must cancel.
inline double gamma_closed_form(double rsq, double a) {
    if (!(rsq > 0.0)) throw DomainError("gamma_closed_form: r^2 must be positive");
    const Complex n = closed_form_n(rsq, a);
    const double a2 = a * a;
    if (n.imag() == 0.0) {
        const double c = std::cbrt(n.real());
        return -2.0 * a2 + (a2 > 0.0 ? 4.0 * a2 * a2 / c : 0.0) + c;
    }
    const Complex c = std::pow(n, 1.0 / 3.0);
    const Complex g = -2.0 * a2 + 4.0 * a2 * a2 / c + c;
    if (std::abs(g.imag()) > 1e-9 * std::max(1.0, std::abs(g.real())))
        throw DomainError("gamma_closed_form: imaginary part did not cancel");
    return g.real();
}

/// F'(r^2) = gamma / r^2; at r = 0 (a > 0) the limit 1/(sqrt(6) a).
inline double f_prime(double rsq, double a) {
    const GammaResult g = solve_gamma(rsq, a);
    if (rsq == 0.0) return 1.0 / (std::sqrt(6.0) * a);
    return g.gamma / rsq;
}

/// F'' from differentiating F'^2 (F' r^2 + 6a^2) = 1, which is the radial
/// equation divided by r^4; algebraically (gamma' r^2 - gamma)/r^4 without the
/// cancellation near the bolt.
inline double f_double_prime(double rsq, double a) {
    const double phi = f_prime(rsq, a);
    return -phi * phi / (3.0 * phi * rsq + 12.0 * a * a);
}

// ---------------------------------------------------------------------------
// Structures

/// The resolved conifold with resolution parameter a >= 0 (a = 0 is the
/// singular cone metric, F' = r^{-2/3}).
struct ResolvedConifold {
    using Point = ResolvedPoint;
    double a = 1.0;

    explicit ResolvedConifold(double a_ = 1.0) : a(a_) {
        if (a < 0.0) throw DomainError("ResolvedConifold: a must be >= 0");
    }
    double bolt_coefficient() const { return 4.0 * a * a; }
};

/// C^3 with g = sum |dz|^2, omega_0 and Omega_0 = dz1^dz2^dz3.
struct FlatC3 {
    using Point = Vec3c;
};

/// The 3x3 Hermitian matrix h with g(u,v) = Re(u* h v) in the chart of p.
inline Mat3c hermitian_matrix(const ResolvedConifold& s, const ResolvedPoint& p) {
    const double rsq = p.radius_sq();
    const double fp = f_prime(rsq, s.a);
    const double fpp = f_double_prime(rsq, s.a);
    Eigen::Matrix<Complex, 4, 3> jac;
    for (int k = 0; k < 3; ++k) jac.col(k) = fiber_velocity(p, Vec3c::Unit(k));
    const Vec3c d = jac.adjoint() * p.xyuv().vector();
    Mat3c h = fp * jac.adjoint() * jac + fpp * d * d.adjoint();
    const double fs = 1.0 + std::norm(p.lambda());
    h(2, 2) += s.bolt_coefficient() / (fs * fs);
    return h;
}

inline Mat3c hermitian_matrix(const FlatC3&, const Vec3c&) { return Mat3c::Identity(); }

template <class S, class P>
Complex hermitian_eval(const S& s, const P& p, const Vec3c& u, const Vec3c& v) {
    return u.dot(hermitian_matrix(s, p) * v);  // Eigen's dot conjugates the left operand
}

template <class P>
void require_base(const P& p, const TangentVector<P>& u) {
    if (!(u.base == p)) throw BasePointMismatch("tangent vector is based at a different point");
}

template <class S, class P>
double metric_eval(const S& s, const P& p, const TangentVector<P>& u, const TangentVector<P>& v) {
    require_base(p, u);
    require_base(p, v);
    return hermitian_eval(s, p, u.components, v.components).real();
}

/// J is multiplication by i on holomorphic chart components.
template <class P>
TangentVector<P> complex_structure_apply(const P& p, const TangentVector<P>& v) {
    require_base(p, v);
    return {v.base, kI * v.components};
}

/// omega(u,v) = g(Ju,v) = Im h(u,v).
template <class S, class P>
double kahler_form_eval(const S& s, const P& p, const TangentVector<P>& u, const TangentVector<P>& v) {
    require_base(p, u);
    require_base(p, v);
    return hermitian_eval(s, p, u.components, v.components).imag();
}

inline Mat3c columns(const Vec3c& a, const Vec3c& b, const Vec3c& c) {
    Mat3c m;
    m.col(0) = a;
    m.col(1) = b;
    m.col(2) = c;
    return m;
}

/// dU^dY^dl+ in H+, dV^dX^dl- in H- (chart order (X,V,l-), hence the sign).
inline Complex holomorphic_volume(const ResolvedConifold&, const ResolvedPoint& p, const Vec3c& a, const Vec3c& b,
                                  const Vec3c& c) {
    const Complex det = columns(a, b, c).determinant();
    return p.patch() == Patch::HPlus ? det : -det;
}

inline Complex holomorphic_volume(const FlatC3&, const Vec3c&, const Vec3c& a, const Vec3c& b, const Vec3c& c) {
    return columns(a, b, c).determinant();
}

template <class S, class P>
Complex holomorphic_volume_eval(const S& s, const P& p, const TangentVector<P>& a, const TangentVector<P>& b,
                                const TangentVector<P>& c) {
    require_base(p, a);
    require_base(p, b);
    require_base(p, c);
    return holomorphic_volume(s, p, a.components, b.components, c.components);
}

template <class S, class P>
Complex holomorphic_volume_eval(const S& s, const TangentFrame<P>& f) {
    return holomorphic_volume(s, f.base, f.v[0], f.v[1], f.v[2]);
}

/// alpha_rc(v) = F'(r^2) Im tr(W* dW).
inline double alpha_rc_eval(const ResolvedConifold& s, const ResolvedPoint& p, const ResolvedTangent& v) {
    require_base(p, v);
    const Vec4c dw = fiber_velocity(p, v.components);
    return f_prime(p.radius_sq(), s.a) * p.xyuv().vector().dot(dw).imag();
}

/// alpha_pm(v) = 1/2 Im(l d(l-bar)) / (1 + |l|^2) in the chart of p.
inline double alpha_pm_eval(const ResolvedPoint& p, const ResolvedTangent& v) {
    require_base(p, v);
    const Complex l = p.lambda();
    return 0.5 * (l * std::conj(v.components[2])).imag() / (1.0 + std::norm(l));
}

/// (omega^3 volume of a chart frame) / |Omega(frame)|^2 as det of the real
/// 6x6 Gram matrix of g on (e1, i e1, e2, i e2, e3, i e3). Constant in p
/// exactly when the metric is Ricci-flat.
template <class S, class P>
double monge_ampere_ratio_unchecked(const S& s, const P& p) {
    const Mat3c h = hermitian_matrix(s, p);
    std::array<Vec3c, 6> basis;
    for (int k = 0; k < 3; ++k) {
        basis[static_cast<std::size_t>(2 * k)] = Vec3c::Unit(k);
        basis[static_cast<std::size_t>(2 * k + 1)] = kI * Vec3c::Unit(k);
    }
    Eigen::Matrix<double, 6, 6> gram;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            gram(i, j) = basis[static_cast<std::size_t>(i)].dot(h * basis[static_cast<std::size_t>(j)]).real();
    const Complex omega = holomorphic_volume(s, p, Vec3c::Unit(0), Vec3c::Unit(1), Vec3c::Unit(2));
    return gram.determinant() / std::norm(omega);
}

inline double monge_ampere_ratio(const ResolvedConifold& s, const ResolvedPoint& p) {
    if (!(p.radius_sq() > 0.0)) throw BoltError("monge_ampere_ratio: point lies on the bolt");
    return monge_ampere_ratio_unchecked(s, p);
}

inline double monge_ampere_ratio(const FlatC3& s, const Vec3c& p) { return monge_ampere_ratio_unchecked(s, p); }

}  // namespace conifold_slag
