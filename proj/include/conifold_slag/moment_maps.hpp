#pragma once

// Moment maps for the T^2 and SO(3) actions on the resolved conifold with
// respect to omega(u,v) = g(Ju,v), normalized so that d mu_xi = omega(X_xi, .).
//
// For a conjugated generator M (anti-Hermitian on (X,Y,U,V)) the fiber part
// is 1/2 F' Re(i w* M w). The bolt part of 4a^2 g_FS contributes
// 4a^2 (i/2) l* A l / |l|^2 with A the traceless action on [l1:l2]; for the
// torus this is 2a^2 |l2|^2/|l|^2 up to a constant.

#include <string>
#include <vector>

#include "conifold_slag/cy_structure.hpp"

namespace conifold_slag {

enum class MomentFrame { Torus, SO3 };

struct MomentValue {
    std::vector<double> components;
    MomentFrame frame = MomentFrame::Torus;

    double norm() const {
        double s = 0.0;
        for (double c : components) s += c * c;
        return std::sqrt(s);
    }
};

/// Equivariant moment map of an arbitrary conjugated so(4) element.
inline double moment_of(const ResolvedConifold& s, const Mat4c& m, const ResolvedPoint& p) {
    const Vec4c w = p.xyuv().vector();
    const double rsq = p.radius_sq();
    const double fiber = rsq > 0.0 ? 0.5 * f_prime(rsq, s.a) * (kI * w.dot(m * w)).real() : 0.0;
    const Vec2c l = p.cp1().homogeneous();
    const double bolt = (0.5 * kI * l.dot(lambda_generator(m) * l)).real() / l.squaredNorm();
    return fiber + s.bolt_coefficient() * bolt;
}

/// (1/2 F'(|X|^2-|Y|^2) + 2a^2 mu_S2, 1/2 F'(|V|^2-|U|^2) + 2a^2 mu_S2) with
/// mu_S2 = |l2|^2/(|l1|^2+|l2|^2).
inline MomentValue t2_moment(const ResolvedConifold& s, const ResolvedPoint& p) {
    const XyuvPoint& w = p.xyuv();
    const double rsq = p.radius_sq();
    const double half_fp = rsq > 0.0 ? 0.5 * f_prime(rsq, s.a) : 0.0;
    const double bolt = 0.5 * s.bolt_coefficient() * p.cp1().height();
    return {{half_fp * (std::norm(w.X) - std::norm(w.Y)) + bolt, half_fp * (std::norm(w.V) - std::norm(w.U)) + bolt},
            MomentFrame::Torus};
}

/// Components ordered by (A~1, A~2, A~3); equivariant under SO(3).
inline MomentValue so3_moment(const ResolvedConifold& s, const ResolvedPoint& p) {
    MomentValue out{{}, MomentFrame::SO3};
    for (const Generator& g : so3_generators()) out.components.push_back(moment_of(s, g.matrix, p));
    return out;
}

/// The moment component paired with a named generator (B~1, B~2 from the
/// torus map; A~k from the SO(3) map).
inline double moment_component(const ResolvedConifold& s, const Generator& gen, const ResolvedPoint& p) {
    switch (gen.name) {
        case GeneratorName::B1: return t2_moment(s, p).components[0];
        case GeneratorName::B2: return t2_moment(s, p).components[1];
        default: return moment_of(s, gen.matrix, p);
    }
}

inline ResolvedTangent generator_vector_field(const Generator& gen, const ResolvedPoint& p) {
    return {p, generator_components(gen.matrix, p)};
}

/// |d mu_xi(v) - omega(X_xi, v)| with d mu_xi by a Richardson-corrected
/// central difference along v in chart coordinates.
inline double hamiltonian_residual(const ResolvedConifold& s, const Generator& gen, const ResolvedPoint& p,
                                   const ResolvedTangent& v) {
    require_base(p, v);
    const double vn = std::max(v.components.norm(), 1e-300);
    const double h = fd::step(p.local().norm()) / std::max(1.0, vn);
    const double dmu = fd::derivative([&](double t) { return moment_component(s, gen, displace(p, v.components, t)); },
                                      h);
    const double om = kahler_form_eval(s, p, generator_vector_field(gen, p), v);
    return std::abs(dmu - om);
}

}  // namespace conifold_slag
