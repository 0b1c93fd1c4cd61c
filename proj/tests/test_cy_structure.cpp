#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "conifold_slag/cy_structure.hpp"
#include "conifold_slag/suites.hpp"

using namespace conifold_slag;

namespace {

// Positive real roots of g^3 + 6 a^2 g^2 - r^4, from an independent numpy solve.
constexpr double kGammaR4_4 = 0.7687343052762832;   // rsq = 2, a = 1
constexpr double kGammaR4_16 = 1.4641016151377546;  // rsq = 4, a = 1 (= 2 sqrt 3 - 2)

ResolvedPoint sample_point() {
    return ResolvedPoint::from_plus(Complex(0.3, 1), Complex(-2, 0.5), Complex(0.4, -0.9));
}

}  // namespace

TEST(Gamma, UnitRadiusFlatCone) {
    EXPECT_NEAR(solve_gamma(1.0, 0.0).gamma, 1.0, 1e-15);
}

TEST(Gamma, FactorableCubic) {
    EXPECT_NEAR(solve_gamma(4.0, 1.0).gamma, 2.0 * std::sqrt(3.0) - 2.0, 1e-14);
    EXPECT_NEAR(solve_gamma(4.0, 1.0).gamma, kGammaR4_16, 1e-14);
}

TEST(Gamma, SmallRadiusBranch) {
    EXPECT_NEAR(solve_gamma(2.0, 1.0).gamma, kGammaR4_4, 1e-14);
}

TEST(Gamma, CubicResidualOnGrid) {
    for (double rsq : {1e-6, 1e-3, 0.1, 1.0, 3.7, 50.0, 1e3, 1e6}) {
        for (double a : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0}) {
            if (a == 0.0 && rsq == 0.0) continue;
            const double g = solve_gamma(rsq, a).gamma;
            const double r4 = rsq * rsq;
            EXPECT_GT(g, 0.0);
            EXPECT_LT(std::abs(g * g * (g + 6 * a * a) - r4), 1e-12 * std::max(1.0, r4)) << rsq << " " << a;
        }
    }
}

TEST(Gamma, DerivativeMatchesOde) {
    for (double rsq : {0.2, 2.0, 40.0}) {
        for (double a : {0.0, 0.7, 1.5}) {
            const GammaResult r = solve_gamma(rsq, a);
            EXPECT_NEAR(r.gamma_prime * r.gamma * (r.gamma + 4 * a * a), 2.0 / 3.0 * rsq, 1e-12 * (1.0 + rsq));
        }
    }
}

TEST(Gamma, SingularPointRejected) {
    EXPECT_THROW(solve_gamma(0.0, 0.0), DomainError);
    EXPECT_THROW(f_prime(0.0, 0.0), DomainError);
}

TEST(GammaClosedForm, AgreesWithSolver) {
    EXPECT_NEAR(gamma_closed_form(2.0, 1.0), solve_gamma(2.0, 1.0).gamma, 1e-9);
    EXPECT_NEAR(gamma_closed_form(100.0, 1.0), solve_gamma(100.0, 1.0).gamma, 1e-10 * solve_gamma(100.0, 1.0).gamma);
    for (double rsq : {0.5, 3.0, 80.0}) EXPECT_NEAR(gamma_closed_form(rsq, 0.0), std::pow(rsq, 2.0 / 3.0), 1e-12 * rsq);
}

TEST(FPrime, ConeProfile) {
    for (double rsq = 1e-3; rsq <= 1e6; rsq *= 3.7)
        EXPECT_NEAR(f_prime(rsq, 0.0) * std::pow(rsq, 1.0 / 3.0), 1.0, 1e-12);
}

TEST(FPrime, ResolvedExample) {
    EXPECT_NEAR(f_prime(4.0, 1.0), (std::sqrt(3.0) - 1.0) / 2.0, 1e-14);
    EXPECT_NEAR(f_prime(2.0, 1.0), kGammaR4_4 / 2.0, 1e-14);
}

TEST(FDoublePrime, MatchesFiniteDifference) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(0.05, 20.0), ua(0.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        const double rsq = ur(rng), a = ua(rng);
        const double h = 1e-4 * rsq;
        const double fd2 = (f_prime(rsq + h, a) - f_prime(rsq - h, a)) / (2 * h);
        EXPECT_NEAR(f_double_prime(rsq, a), fd2, 1e-6 * std::abs(fd2)) << rsq << " " << a;
    }
}

TEST(Metric, FlatIsEuclidean) {
    const FlatC3 s;
    const Vec3c p(1, 2, 3);
    const TangentVector<Vec3c> e1{p, Vec3c::Unit(0)};
    EXPECT_EQ(metric_eval(s, p, e1, e1), 1.0);
    EXPECT_EQ(kahler_form_eval(s, p, e1, complex_structure_apply(p, e1)), 1.0);
}

TEST(Metric, BoltTangent) {
    const double a = 1.3;
    const ResolvedConifold s(a);
    const Complex l(0.4, -0.7);
    const ResolvedPoint p = ResolvedPoint::from_plus(0, 0, l);
    const ResolvedTangent v{p, Vec3c(0, 0, Complex(0.6, 0.2))};
    const double fs = 1.0 + std::norm(l);
    EXPECT_NEAR(metric_eval(s, p, v, v), 4 * a * a * std::norm(v.components[2]) / (fs * fs), 1e-14);
}

TEST(Metric, SymmetricPositiveDefinite) {
    std::mt19937_64 rng(9);
    for (double a : {0.0, 1.0}) {
        const ResolvedConifold s(a);
        for (int k = 0; k < 30; ++k) {
            const ResolvedPoint p = random_resolved_point(rng, 1e-2);
            const ResolvedTangent u{p, random_unit_vector(rng)}, v{p, random_unit_vector(rng)};
            EXPECT_NEAR(metric_eval(s, p, u, v), metric_eval(s, p, v, u), 1e-12);
            EXPECT_GT(metric_eval(s, p, u, u), 0.0);
            const ResolvedTangent w{p, u.components * 2.5 + v.components};
            EXPECT_NEAR(metric_eval(s, p, w, v), 2.5 * metric_eval(s, p, u, v) + metric_eval(s, p, v, v),
                        1e-12 * (1.0 + std::abs(metric_eval(s, p, v, v))));
        }
    }
}

TEST(Metric, BasePointMismatch) {
    const ResolvedConifold s(1.0);
    const ResolvedPoint p = sample_point();
    const ResolvedTangent v{transition(p), Vec3c::Unit(0)};
    EXPECT_THROW(metric_eval(s, p, v, v), BasePointMismatch);
}

TEST(ComplexStructure, SquaresToMinusOne) {
    const ResolvedPoint p = sample_point();
    const ResolvedTangent v{p, Vec3c(1, 0, 0)};
    EXPECT_EQ(complex_structure_apply(p, v).components, Vec3c(kI, 0, 0));
    EXPECT_EQ(complex_structure_apply(p, complex_structure_apply(p, v)).components, -v.components);
}

TEST(KahlerForm, CompatibleWithMetric) {
    const ResolvedConifold s(0.8);
    const ResolvedPoint p = sample_point();
    const ResolvedTangent u{p, Vec3c(Complex(1, 2), 0.5, Complex(0, -1))};
    const ResolvedTangent v{p, Vec3c(0.2, Complex(-1, 1), 0.3)};
    EXPECT_NEAR(kahler_form_eval(s, p, u, v), -kahler_form_eval(s, p, v, u), 1e-13);
    EXPECT_NEAR(kahler_form_eval(s, p, u, complex_structure_apply(p, u)), metric_eval(s, p, u, u), 1e-12);
}

TEST(HolomorphicVolume, UnitFrame) {
    const ResolvedConifold s(1.0);
    const ResolvedPoint p = sample_point();
    const ResolvedFrame f{p, {Vec3c::Unit(0), Vec3c::Unit(1), Vec3c::Unit(2)}};
    EXPECT_EQ(holomorphic_volume_eval(s, f), Complex(1.0));
}

TEST(HolomorphicVolume, AgreesAcrossPatches) {
    const ResolvedConifold s(1.0);
    const ResolvedPoint p = sample_point();
    const ResolvedFrame f{p, {Vec3c(1, 0.2, kI), Vec3c(Complex(0, 1), 1, 0.5), Vec3c(0.3, -1, 2)}};
    EXPECT_LT(std::abs(holomorphic_volume_eval(s, to_patch(f, Patch::HMinus)) - holomorphic_volume_eval(s, f)),
              1e-12);
}

TEST(MongeAmpere, ConstantRatio) {
    std::mt19937_64 rng(1);
    for (double a : {0.0, 0.5, 1.0, 2.0}) {
        const ResolvedConifold s(a);
        for (int k = 0; k < 40; ++k) {
            const ResolvedPoint p = random_resolved_point(rng, 1e-2);
            EXPECT_NEAR(monge_ampere_ratio(s, p), 4.0 / 9.0, 1e-10) << a;
        }
    }
    EXPECT_EQ(monge_ampere_ratio(FlatC3{}, Vec3c(1, 2, 3)), 1.0);
}

TEST(MongeAmpere, BoltRejected) {
    EXPECT_THROW(monge_ampere_ratio(ResolvedConifold(1.0), ResolvedPoint::from_plus(0, 0, 0.5)), BoltError);
}

TEST(AlphaForms, RadialLevelDirectionHasNoRcComponent) {
    const ResolvedConifold s(1.0);
    const ResolvedPoint p = ResolvedPoint::from_plus(Complex(1, 0), Complex(2, 0), Complex(0.5, 0));
    // Real scaling of all coordinates: tr(W* dW) is real.
    const ResolvedTangent v{p, Vec3c(1, 2, 0)};
    EXPECT_NEAR(alpha_rc_eval(s, p, v), 0.0, 1e-15);
}

// d alpha(u, v) for constant chart fields is u(alpha(v)) - v(alpha(u)).
TEST(AlphaForms, KahlerFormDecomposition) {
    std::mt19937_64 rng(21);
    for (double a : {0.0, 0.6, 1.0}) {
        const ResolvedConifold s(a);
        for (int k = 0; k < 10; ++k) {
            const ResolvedPoint p = random_resolved_point(rng, 0.1);
            const Vec3c u = random_unit_vector(rng), v = random_unit_vector(rng);
            auto d = [&](auto&& alpha) {
                const double h = 1e-5 * std::max(1.0, p.local().norm());
                auto along = [&](const Vec3c& dir, const Vec3c& arg) {
                    return fd::derivative([&](double t) {
                        const ResolvedPoint q = displace(p, dir, t);
                        return alpha(q, ResolvedTangent{q, arg});
                    }, h);
                };
                return along(u, v) - along(v, u);
            };
            const double drc = d([&](const ResolvedPoint& q, const ResolvedTangent& w) { return alpha_rc_eval(s, q, w); });
            const double dpm = d([&](const ResolvedPoint& q, const ResolvedTangent& w) { return alpha_pm_eval(q, w); });
            const double om = kahler_form_eval(s, p, ResolvedTangent{p, u}, ResolvedTangent{p, v});
            EXPECT_NEAR(0.5 * drc - s.bolt_coefficient() * dpm, om, 1e-7 * (1.0 + std::abs(om))) << a;
        }
    }
}
