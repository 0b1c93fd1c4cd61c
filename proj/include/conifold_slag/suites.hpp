#pragma once

// Verification suites: groups of quantitative checks over random points and
// sampled leaves. Each check records the measured value and its threshold,
// so failures stay visible with their numbers. Shared by the CLI and the
// acceptance runner.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "conifold_slag/verify_engine.hpp"

namespace conifold_slag {

struct Check {
    enum class Kind { AtMost, AtLeast };
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    Kind kind = Kind::AtMost;
    bool passed = false;

    static Check at_most(std::string n, double v, double t) { return {std::move(n), v, t, Kind::AtMost, v <= t}; }
    static Check at_least(std::string n, double v, double t) { return {std::move(n), v, t, Kind::AtLeast, v >= t}; }
};

struct SuiteResult {
    std::string suite;
    double a = 0.0;
    std::vector<Check> checks;

    bool passed() const {
        for (const Check& c : checks)
            if (!c.passed) return false;
        return !checks.empty();
    }
    void add(Check c) { checks.push_back(std::move(c)); }
};

// ---------------------------------------------------------------------------
// Random inputs

inline Complex random_complex(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng), n(rng)};
}

/// Chart coordinates with standard normal entries in a random patch,
/// redrawn until r^2 >= min_rsq.
inline ResolvedPoint random_resolved_point(std::mt19937_64& rng, double min_rsq = 0.0) {
    std::bernoulli_distribution coin(0.5);
    const Patch patch = coin(rng) ? Patch::HPlus : Patch::HMinus;
    while (true) {
        Vec3c c(random_complex(rng), random_complex(rng), random_complex(rng));
        const ResolvedPoint p = ResolvedPoint::from_local(patch, c);
        if (p.radius_sq() >= min_rsq) return p;
    }
}

inline Vec3c random_unit_vector(std::mt19937_64& rng) {
    Vec3c v(random_complex(rng), random_complex(rng), random_complex(rng));
    return v / v.norm();
}

/// Haar-distributed SO(4) element (QR of a Gaussian matrix, signs fixed).
inline Mat4 random_so4(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = n(rng);
    Eigen::HouseholderQR<Mat4> qr(m);
    Mat4 q = qr.householderQ();
    const Mat4 r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < 4; ++k)
        if (r(k, k) < 0.0) q.col(k) *= -1.0;
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

/// diag(1, R) with R Haar-distributed in SO(3): the subgroup fixing z0.
inline Mat4 random_so3(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = n(rng);
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(m);
    Eigen::Matrix3d q = qr.householderQ();
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    Mat4 g = Mat4::Identity();
    g.block<3, 3>(1, 1) = q;
    return g;
}

inline ResolvedFrame random_frame(std::mt19937_64& rng, const ResolvedPoint& p) {
    return {p, {random_unit_vector(rng), random_unit_vector(rng), random_unit_vector(rng)}};
}

// ---------------------------------------------------------------------------
// Structure

inline SuiteResult structure_suite(std::uint64_t seed, int n_points = 1000, int grid = 100) {
    SuiteResult out{"structure", 0.0, {}};
    std::mt19937_64 rng(seed);
    const Mat4c& P = change_of_basis();
    out.add(Check::at_most("P unitarity max|PP*-I|", (P * P.adjoint() - Mat4c::Identity()).cwiseAbs().maxCoeff(),
                           1e-15));
    double quad = 0.0, norm = 0.0;
    for (int k = 0; k < n_points; ++k) {
        ZPoint z{Vec4c(random_complex(rng), random_complex(rng), random_complex(rng), random_complex(rng))};
        const XyuvPoint w = to_xyuv(z);
        const double scale = std::max(1.0, z.z.squaredNorm());
        quad = std::max(quad, std::abs(2.0 * w.quadric() - quadric_z(z)) / scale);
        norm = std::max(norm, std::abs(w.radius_sq() - z.z.squaredNorm()) / scale);
    }
    out.add(Check::at_most("2(XY-UV) = sum z^2 (relative)", quad, 1e-13));
    out.add(Check::at_most("r^2 = sum |z|^2 (relative)", norm, 1e-13));

    double cubic = 0.0, closed = 0.0;
    int below_branch = 0;
    for (int i = 0; i < grid; ++i) {
        const double rsq = std::pow(10.0, -3.0 + 6.0 * i / (grid - 1));
        for (int j = 0; j < grid; ++j) {
            const double a = 0.05 + 2.95 * j / (grid - 1);
            const GammaResult g = solve_gamma(rsq, a);
            const double r4 = rsq * rsq;
            cubic = std::max(cubic, std::abs(g.gamma * g.gamma * (g.gamma + 6.0 * a * a) - r4) / r4);
            closed = std::max(closed, std::abs(gamma_closed_form(rsq, a) - g.gamma) / std::max(1.0, g.gamma));
            if (r4 < 32.0 * std::pow(a, 6)) ++below_branch;
        }
    }
    out.add(Check::at_most("gamma cubic residual (relative to r^4)", cubic, 1e-12));
    out.add(Check::at_most("gamma closed form vs Newton", closed, 1e-10));
    out.add(Check::at_least("grid points with r^4 < 32 a^6", below_branch, 1.0));
    double cone = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double rsq = std::pow(10.0, -3.0 + 9.0 * i / (grid - 1));
        cone = std::max(cone, std::abs(f_prime(rsq, 0.0) * std::cbrt(rsq) - 1.0));
    }
    out.add(Check::at_most("a=0: F' r^{2/3} - 1", cone, 1e-12));
    return out;
}

/// Relative spread of the Monge-Ampere ratio at random points.
inline SuiteResult ricci_suite(double a, std::uint64_t seed, int n_points = 200) {
    SuiteResult out{"ricci", a, {}};
    std::mt19937_64 rng(seed);
    const ResolvedConifold s(a);
    std::vector<double> ratios;
    for (int k = 0; k < n_points; ++k)
        ratios.push_back(monge_ampere_ratio(s, random_resolved_point(rng, a == 0.0 ? 1e-2 : 0.0)));
    out.add(Check::at_most("Monge-Ampere ratio relative stddev", relative_stddev(ratios), 1e-8));
    return out;
}

inline SuiteResult invariance_suite(double a, std::uint64_t seed, int n_groups = 20, int n_points = 20) {
    SuiteResult out{"invariance", a, {}};
    std::mt19937_64 rng(seed);
    const ResolvedConifold s(a);
    std::vector<ResolvedFrame> frames;
    for (int k = 0; k < n_points; ++k) frames.push_back(random_frame(rng, random_resolved_point(rng, 1e-2)));
    std::vector<GroupElement> groups;
    for (int k = 0; k < n_groups; ++k) groups.push_back(conjugate_action(random_so4(rng)));
    for (InvariantForm form : {InvariantForm::Metric, InvariantForm::Kahler, InvariantForm::HoloVol,
                               InvariantForm::AlphaRC}) {
        double worst = 0.0;
        for (const GroupElement& g : groups) worst = std::max(worst, invariance_residual(s, form, g, frames));
        out.add(Check::at_most(std::string("SO(4) invariance of ") + to_string(form), worst, 1e-9));
    }
    double torus = 0.0;
    for (int k = 0; k < n_groups; ++k) {
        std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
        torus = std::max(torus, invariance_residual(s, InvariantForm::AlphaPM, torus_element(angle(rng), angle(rng)),
                                                    frames));
    }
    out.add(Check::at_most("torus invariance of alpha_pm", torus, 1e-9));
    double overlap = 0.0;
    for (const ResolvedFrame& f : frames) {
        if (f.base.lambda() == Complex(0.0)) continue;
        const ResolvedFrame h = to_patch(f, f.base.patch() == Patch::HPlus ? Patch::HMinus : Patch::HPlus);
        const Complex a1 = holomorphic_volume_eval(s, f), a2 = holomorphic_volume_eval(s, h);
        overlap = std::max(overlap, std::abs(a1 - a2) / std::max(1.0, std::abs(a1)));
    }
    out.add(Check::at_most("patch overlap agreement of Omega", overlap, 1e-10));
    return out;
}

inline SuiteResult moment_suite(double a, std::uint64_t seed, int n_points = 50) {
    SuiteResult out{"moments", a, {}};
    std::mt19937_64 rng(seed);
    const ResolvedConifold s(a);
    const std::array<GeneratorName, 5> names{GeneratorName::B1, GeneratorName::B2, GeneratorName::A1,
                                             GeneratorName::A2, GeneratorName::A3};
    double worst = 0.0;
    for (int k = 0; k < n_points; ++k) {
        const ResolvedPoint p = random_resolved_point(rng, 1e-2);
        const ResolvedTangent v{p, random_unit_vector(rng)};
        for (GeneratorName n : names) worst = std::max(worst, hamiltonian_residual(s, make_generator(n), p, v));
    }
    out.add(Check::at_most("Hamiltonian residual, torus and SO(3) generators", worst, 1e-6));
    double orbit = 0.0;
    for (int k = 0; k < n_points; ++k) {
        const ResolvedPoint base = ResolvedPoint::from_plus(0.0, random_complex(rng), 0.0);
        const ResolvedPoint p = apply(conjugate_action(random_so3(rng)), base);
        orbit = std::max(orbit, so3_moment(s, p).norm());
    }
    out.add(Check::at_most("|mu_SO3| on SO(3) orbits of (0,Y,0,0)", orbit, 1e-9));
    return out;
}

// ---------------------------------------------------------------------------
// Leaf families

/// The torus leaves checked at a given a: generic constants, both signs of
/// c3, the zero leaf (the cone when a = 0) and, for a > 0, a leaf touching
/// the bolt.
inline std::vector<T2Leaf> default_t2_specs(double a) {
    std::vector<T2Leaf> specs{{0.3, 0.1, 0.2}, {-0.4, 0.7, 0.0}, {1.5, -0.2, -0.6}, {0.2, 0.5, 1.0}, {0.0, 0.0, 0.0}};
    if (a > 0.0) specs.push_back({a * a, a * a, 0.0});
    return specs;
}

inline bool touches_bolt(const T2Leaf& c, double a) {
    return a > 0.0 && c.c3 == 0.0 && c.c1 == c.c2 && c.c1 > 0.0 && c.c1 < 2.0 * a * a;
}

/// Sample of a torus leaf on the grid used by the suites; a bolt-touching
/// leaf gets an odd t-grid so that the bolt circle itself is sampled.
inline ResolvedSample suite_t2_sample(const ResolvedConifold& s, const T2Leaf& c) {
    return t2_leaf_sample(s, c, 4, 4, touches_bolt(c, s.a) ? 11 : 10, -2.5, 2.5);
}

inline ResolvedSample suite_so3_sample(const ResolvedConifold& s, const SO3Leaf& leaf) {
    return so3_leaf_sample(s, leaf, 11, 24, -2.0, 2.0);
}

inline double max_t2_equation_residual(const ResolvedConifold& s, const ResolvedSample& smp, const T2Leaf& c) {
    double worst = 0.0;
    for (const ResolvedPoint& p : smp.points)
        for (double r : t2_leaf_residual(s, p, c)) worst = std::max(worst, std::abs(r));
    return worst;
}

inline SuiteResult t2_suite(double a, std::uint64_t seed, const std::vector<T2Leaf>& specs, int n_foliation = 500) {
    SuiteResult out{"t2", a, {}};
    const ResolvedConifold s(a);
    double eq = 0.0, lag = 0.0, spec = 0.0;
    std::size_t bolt_rows = 0;
    for (const T2Leaf& c : specs) {
        const ResolvedSample smp = suite_t2_sample(s, c);
        eq = std::max(eq, max_t2_equation_residual(s, smp, c));
        const VerificationReport rep = run_report(s, smp);
        lag = std::max(lag, rep.lagrangian.max);
        spec = std::max(spec, rep.special.max);
        if (touches_bolt(c, a)) bolt_rows += rep.degenerate;
    }
    out.add(Check::at_most("leaf equations on all samples", eq, 1e-9));
    out.add(Check::at_most("Lagrangian residual", lag, 1e-8));
    out.add(Check::at_most("special residual", spec, 1e-8));
    if (a > 0.0) out.add(Check::at_least("bolt-circle samples flagged degenerate", static_cast<double>(bolt_rows), 1.0));
    std::mt19937_64 rng(seed);
    int generic = 0;
    for (int k = 0; k < n_foliation; ++k)
        if (foliation_generic(s, random_resolved_point(rng, a == 0.0 ? 1e-2 : 0.0))) ++generic;
    out.add(Check::at_least("foliation rank 3 fraction", static_cast<double>(generic) / n_foliation, 0.99));
    return out;
}

inline SuiteResult t2_suite(double a, std::uint64_t seed) { return t2_suite(a, seed, default_t2_specs(a)); }

inline SuiteResult so3_suite(double a, const std::vector<double>& cs = {0.5, 1.0, 2.0}) {
    SuiteResult out{"so3", a, {}};
    const ResolvedConifold s(a);
    double lag = 0.0, spec = 0.0, minr_err = 0.0, minr = INFINITY, drift = 0.0, mu = 0.0;
    for (double c : cs) {
        for (Branch b : {Branch::Plus, Branch::Minus}) {
            const ResolvedSample smp = suite_so3_sample(s, {c, b});
            const VerificationReport rep = run_report(s, smp);
            lag = std::max(lag, rep.lagrangian.max);
            spec = std::max(spec, rep.special.max);
            double leaf_min = INFINITY;
            for (const ResolvedPoint& p : smp.points) {
                leaf_min = std::min(leaf_min, p.radius_sq());
                drift = std::max(drift, std::abs(so3_invariant(p) - c) / std::max(1.0, p.radius_sq()));
                mu = std::max(mu, so3_moment(s, p).norm());
            }
            minr_err = std::max(minr_err, std::abs(leaf_min - std::abs(c)));
            minr = std::min(minr, leaf_min);
        }
    }
    out.add(Check::at_most("Lagrangian residual", lag, 1e-8));
    out.add(Check::at_most("special residual", spec, 1e-8));
    out.add(Check::at_most("|min r^2 - c|", minr_err, 1e-10));
    out.add(Check::at_least("min r^2 (leaves avoid the bolt)", minr, std::numeric_limits<double>::min()));
    out.add(Check::at_most("Re(Y^2) drift along orbits", drift, 1e-12));
    out.add(Check::at_most("|mu_SO3| on leaf samples", mu, 1e-9));
    return out;
}

/// Calibration ratio constancy over both families at one a; flat ratio = 1.
inline SuiteResult calibration_suite(double a) {
    SuiteResult out{"calibration", a, {}};
    const ResolvedConifold s(a);
    std::vector<double> ratios;
    auto collect = [&](const VerificationReport& rep) {
        for (const SampleRow& r : rep.rows)
            if (!r.degenerate) ratios.push_back(r.calibration);
    };
    for (const T2Leaf& c : default_t2_specs(a)) collect(run_report(s, suite_t2_sample(s, c)));
    for (double c : {0.5, 1.0, 2.0})
        for (Branch b : {Branch::Plus, Branch::Minus}) collect(run_report(s, suite_so3_sample(s, {c, b})));
    out.add(Check::at_most("calibration ratio relative stddev, both families", relative_stddev(ratios), 1e-6));
    const FlatC3 flat;
    double unit = 0.0;
    for (const auto& rep : {run_report(flat, hl_flat_so3(1.0, 10, 20, -2.0, 2.0)),
                            run_report(flat, hl_flat_torus({0.0, 1.0, 1.0}, 4, 4, 10, -2.0, 2.0))})
        for (const SampleRow& r : rep.rows)
            if (!r.degenerate) unit = std::max(unit, std::abs(r.calibration - 1.0));
    out.add(Check::at_most("flat calibration ratio = 1", unit, 1e-12));
    return out;
}

inline SuiteResult flat_suite() {
    SuiteResult out{"flat", 0.0, {}};
    const FlatC3 flat;
    double lag = 0.0, spec = 0.0, eq = 0.0, drift = 0.0;
    for (double c : {0.0, 1.0, -0.5}) {
        const FlatSample smp = hl_flat_so3(c, 10, 20, -2.0, 2.0);
        const VerificationReport rep = run_report(flat, smp);
        lag = std::max(lag, rep.lagrangian.max);
        spec = std::max(spec, rep.special.max);
        for (std::size_t i = 0; i < smp.size(); ++i) {
            const double s = smp.parameters[i][0];
            const Complex l = hl_lambda(c, s);
            drift = std::max(drift, std::abs((l * l * l).imag() - c));
        }
    }
    for (const HLTorusFlat& c : {HLTorusFlat{0.0, 0.0, 0.0}, HLTorusFlat{0.0, 1.0, 1.0}, HLTorusFlat{0.3, 0.2, -0.4}}) {
        const FlatSample smp = hl_flat_torus(c, 4, 4, 10, -2.0, 2.0);
        const VerificationReport rep = run_report(flat, smp);
        lag = std::max(lag, rep.lagrangian.max);
        spec = std::max(spec, rep.special.max);
        for (const Vec3c& z : smp.points)
            for (double r : hl_torus_residual(z, c)) eq = std::max(eq, std::abs(r));
    }
    out.add(Check::at_most("Lagrangian residual", lag, 1e-9));
    out.add(Check::at_most("special residual", spec, 1e-9));
    out.add(Check::at_most("torus example equations", eq, 1e-10));
    out.add(Check::at_most("Im(lambda^3) drift", drift, 1e-12));
    return out;
}

// ---------------------------------------------------------------------------
// Asymptotics

struct ConeScanRow {
    double r = 0.0;
    double residual = 0.0;
    double reference = 0.0;  ///< |c|/r^2 for SO(3) leaves, 0 otherwise
};

inline std::vector<ConeScanRow> t2_cone_scan(const ResolvedConifold& s, const T2Leaf& c, Branch b,
                                             const std::vector<double>& radii) {
    std::vector<ConeScanRow> rows;
    for (double r : radii) rows.push_back({r, cone_residual(ConeFamily::T2, t2_leaf_point(s, c, r * r, b)), 0.0});
    return rows;
}

/// Point of the SO(3) leaf at radius r (|Y| = r), moved off the base orbit
/// point by a fixed rotation.
inline ResolvedPoint so3_leaf_point(const SO3Leaf& leaf, double r) {
    const double ac = std::abs(leaf.c);
    if (r * r < ac) throw Infeasible("so3 leaf: radius below sqrt|c|");
    const double s = ac == 0.0 ? r : 0.5 * std::acosh(r * r / ac);
    const ResolvedPoint base = ResolvedPoint::from_plus(0.0, so3_branch_point(leaf.c, leaf.branch, s), 0.0);
    return apply(conjugate_action(so3_rotation_to(Eigen::Vector3d(0.48, -0.6, 0.64))), base);
}

inline std::vector<ConeScanRow> so3_cone_scan(const SO3Leaf& leaf, const std::vector<double>& radii) {
    std::vector<ConeScanRow> rows;
    for (double r : radii)
        rows.push_back({r, cone_residual(ConeFamily::SO3, so3_leaf_point(leaf, r)), std::abs(leaf.c) / (r * r)});
    return rows;
}

inline int decrease_violations(const std::vector<ConeScanRow>& rows) {
    int bad = 0;
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (!(rows[k].residual < rows[k - 1].residual)) ++bad;
    return bad;
}

inline SuiteResult asymptotics_suite(double a, const T2Leaf& t2 = {0.3, 0.1, 0.2}, const SO3Leaf& so3 = {1.0, Branch::Plus}) {
    SuiteResult out{"asymptotics", a, {}};
    const ResolvedConifold s(a);
    const std::vector<double> radii{10.0, 100.0, 1000.0};
    int bad = 0;
    for (Branch b : {Branch::Plus, Branch::Minus}) bad += decrease_violations(t2_cone_scan(s, t2, b, radii));
    out.add(Check::at_most("T2 cone residual non-decreasing steps", bad, 0.0));
    const auto rows = so3_cone_scan(so3, radii);
    out.add(Check::at_most("SO3 cone residual non-decreasing steps", decrease_violations(rows), 0.0));
    double factor = 0.0;
    for (const ConeScanRow& r : rows) factor = std::max(factor, std::abs(std::log2(r.residual / r.reference)));
    out.add(Check::at_most("SO3 decay vs |c|/r^2, |log2 ratio|", factor, 1.0));
    const double rsq = 1e3;
    out.add(Check::at_most("|F'/r^{-2/3} - 1| at r^2 = 1e3", std::abs(f_prime(rsq, a) * std::cbrt(rsq) - 1.0), 1e-2));
    return out;
}

// ---------------------------------------------------------------------------
// Negative controls

inline SuiteResult negative_suite(double a, std::uint64_t seed, double eps = 1e-3) {
    SuiteResult out{"negative", a, {}};
    const ResolvedConifold s(a);
    const ResolvedSample smp = suite_t2_sample(s, {0.3, 0.1, 0.2});
    const VerificationReport bad = run_report(s, perturb_sample(smp, eps, seed));
    out.add(Check::at_least("perturbed sample Lagrangian residual", bad.lagrangian.max, 1e-3));
    out.add(Check::at_least("perturbed sample rejected (0/1)", bad.passed ? 0.0 : 1.0, 1.0));
    const VerificationReport phase = run_report(s, rotate_phase(smp, std::numbers::pi / 6.0));
    out.add(Check::at_least("wrong-phase special residual", phase.special.max, 1e-3));
    out.add(Check::at_least("wrong-phase sample rejected (0/1)", phase.passed ? 0.0 : 1.0, 1.0));
    ResolvedFrame broken = smp.frames[1];
    broken.v[2] = kI * broken.v[0];
    out.add(Check::at_least("frame with v3 = J v1, Lagrangian residual", lagrangian_residual(s, broken), 1e-3));
    return out;
}

}  // namespace conifold_slag
