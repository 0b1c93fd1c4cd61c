#pragma once

// The special Lagrangian families: the T^2-invariant leaves
//
//   mu_1 = c1,  mu_2 = c2,  Im(XY) = c3,
//
// the SO(3) orbits through (0, Y, 0, 0) with Re(Y^2) = c, the two flat
// Harvey-Lawson examples in C^3 used as an independent oracle, and the
// residuals of the asymptotic cones.
//
// T^2 leaves are sampled in the gauge where the phases of U and Y vanish
// (or X and V on the far chart). The torus-invariant data of a point are
// A = |U|^2, B = |Y|^2, L = |l+|^2 and q = U Y l+ = -XY, and for a fixed r^2
// the three equations determine them in closed form:
//
//   L = (gamma/2 + c1 + c2) / (gamma/2 + 4a^2 - c1 - c2),
//   A + B = r^2/(1+L),   A - B = 2(c1 - c2) / (F'(1+L)),
//   |q|^2 = A B L,       Im q = -c3.
//
// The two signs of Re q are the two branches; they meet where A B L = c3^2.
// These closed forms seed Newton on the actual moment maps.

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "conifold_slag/moment_maps.hpp"

namespace conifold_slag {

enum class Branch { Plus, Minus };

inline const char* to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

struct T2Leaf {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

struct SO3Leaf {
    double c = 1.0;
    Branch branch = Branch::Plus;
};

struct HLSO3Flat {
    double c = 0.0;
};

/// |z1|^2 - |z2|^2 = c2, |z1|^2 - |z3|^2 = c3, Im(z1 z2 z3) = c1.
struct HLTorusFlat {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

struct LeafSpec {
    std::variant<T2Leaf, SO3Leaf, HLSO3Flat, HLTorusFlat> family;
    double a = 1.0;
};

/// Points with leaf frames on a structured grid; sample (i, j, k) is stored
/// at (i * grid[1] + j) * grid[2] + k.
template <class Point>
struct LeafSample {
    std::vector<Point> points;
    std::vector<TangentFrame<Point>> frames;
    std::vector<std::array<double, 3>> parameters;
    std::array<int, 3> grid{0, 0, 0};
    std::vector<bool> degenerate;  ///< collapsed orbits known in advance (bolt circle, vertex)

    std::size_t size() const { return points.size(); }

    void resize(std::size_t n) {
        points.resize(n);
        frames.resize(n);
        parameters.resize(n);
        degenerate.assign(n, false);
    }
};

using ResolvedSample = LeafSample<ResolvedPoint>;
using FlatSample = LeafSample<Vec3c>;

struct SampleGrid {
    int n1 = 8;
    int n2 = 8;
    int n3 = 12;
    double t_min = -3.0;
    double t_max = 3.0;
};

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw DomainError("sample grid dimensions must be positive");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
    return out;
}

inline std::vector<double> angles(int n) {
    if (n < 1) throw DomainError("sample grid dimensions must be positive");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * k / n;
    return out;
}

/// Rows scaled to unit length before the singular ratio, so that equations
/// of different degree are weighed alike.
inline double row_normalized_ratio(MatX m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double n = m.row(i).norm();
        if (n == 0.0) return 0.0;
        m.row(i) /= n;
    }
    return singular_ratio(m);
}

/// Newton onto the curve eq(x) = 0 (3 equations, 4 unknowns) with the
/// coordinate along which the curve moves fastest pinned at its seed value.
template <class Eq>
VecX polish_on_curve(Eq&& eq, const VecX& seed, double tol) {
    const MatX jac = fd::jacobian(eq, seed);
    if (row_normalized_ratio(jac) < 1e-10) throw SingularJacobian("leaf equations degenerate at the seed");
    const VecX k = kernel_direction(jac);
    Eigen::Index pin = 0;
    k.cwiseAbs().maxCoeff(&pin);
    const double value = seed[pin];
    auto full = [&](const VecX& x) {
        VecX out(4);
        out.head(3) = eq(x);
        out[3] = x[pin] - value;
        return out;
    };
    NewtonOptions opt;
    opt.tolerance = tol;
    return newton_solve(full, seed, opt).x;
}

/// Unit tangent of the curve eq(x) = 0.
template <class Eq>
VecX curve_tangent(Eq&& eq, const VecX& x) {
    return kernel_direction(fd::jacobian(eq, x));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// T^2 leaves

/// (mu_1, mu_2, Im XY).
inline std::array<double, 3> t2_invariants(const ResolvedConifold& s, const ResolvedPoint& p) {
    const MomentValue mu = t2_moment(s, p);
    const XyuvPoint& w = p.xyuv();
    return {mu.components[0], mu.components[1], (w.X * w.Y).imag()};
}

inline std::array<double, 3> t2_leaf_residual(const ResolvedConifold& s, const ResolvedPoint& p, const T2Leaf& c) {
    const auto v = t2_invariants(s, p);
    return {v[0] - c.c1, v[1] - c.c2, v[2] - c.c3};
}

/// Gauge-fixed unknowns: (|U|, |Y|, Re l+, Im l+) in H+ or (|X|, |V|, Re l-,
/// Im l-) in H-. The radii may be continued through zero.
struct T2Gauge {
    Patch patch = Patch::HPlus;
    VecX x = VecX::Zero(4);

    ResolvedPoint point() const {
        return ResolvedPoint::from_local(patch, Vec3c(x[0], x[1], Complex(x[2], x[3])));
    }
};

inline auto t2_gauge_equations(const ResolvedConifold& s, const T2Leaf& c, Patch patch) {
    return [s, c, patch](const VecX& x) {
        const auto r = t2_leaf_residual(s, T2Gauge{patch, x}.point(), c);
        return VecX(Eigen::Vector3d(r[0], r[1], r[2]));
    };
}

/// Solver tolerance on the leaf equations, relative to the scale r^2 of Im XY.
inline double t2_tolerance(double rsq) { return 1e-12 * std::max(1.0, rsq); }

struct Slice {
    enum class Kind { Coordinate, RadiusSq };
    Kind kind = Kind::Coordinate;
    int index = 1;
    double value = 0.0;

    static Slice coordinate(int i, double v) { return {Kind::Coordinate, i, v}; }
    static Slice radius_sq(double v) { return {Kind::RadiusSq, 0, v}; }
};

/// Newton for the three leaf equations plus one slice condition.
inline T2Gauge t2_leaf_solve_gauge(const ResolvedConifold& s, const T2Leaf& c, const Slice& slice,
                                   const T2Gauge& seed) {
    if (slice.kind == Slice::Kind::Coordinate && (slice.index < 0 || slice.index > 3))
        throw DomainError("t2_leaf_solve: slice coordinate index out of range");
    const auto eq = t2_gauge_equations(s, c, seed.patch);
    const double scale = slice.kind == Slice::Kind::RadiusSq ? std::max(1.0, slice.value) : 1.0;
    auto full = [&](const VecX& x) {
        VecX out(4);
        out.head(3) = eq(x);
        out[3] = slice.kind == Slice::Kind::Coordinate ? x[slice.index] - slice.value
                                                        : (T2Gauge{seed.patch, x}.point().radius_sq() - slice.value) / scale;
        return out;
    };
    const double rsq = std::max(seed.point().radius_sq(), slice.kind == Slice::Kind::RadiusSq ? slice.value : 0.0);
    NewtonOptions opt;
    opt.tolerance = t2_tolerance(rsq);
    return {seed.patch, newton_solve(full, seed.x, opt).x};
}

inline ResolvedPoint t2_leaf_solve(const ResolvedConifold& s, const T2Leaf& c, const Slice& slice,
                                   const T2Gauge& seed) {
    return t2_leaf_solve_gauge(s, c, slice, seed).point();
}

/// Closed-form torus-orbit representative at radius r^2 on the given branch,
/// or nothing when the level set misses that sphere.
inline std::optional<T2Gauge> t2_reduction(const ResolvedConifold& s, const T2Leaf& c, double rsq, Branch branch) {
    const double sign = branch == Branch::Plus ? 1.0 : -1.0;
    const double a2 = s.a * s.a;
    if (rsq < 0.0) return std::nullopt;
    if (rsq == 0.0) {
        // The bolt: only reachable with c1 = c2 in [0, 2a^2] and c3 = 0.
        if (s.a == 0.0 || c.c3 != 0.0 || std::abs(c.c1 - c.c2) > 1e-14 * std::max(1.0, a2)) return std::nullopt;
        const double h = c.c1 / (2.0 * a2);
        if (h < 0.0 || h > 1.0) return std::nullopt;
        T2Gauge g;
        if (h <= 0.5) {
            g.x[2] = sign * std::sqrt(h / (1.0 - h));
        } else {
            g.patch = Patch::HMinus;
            g.x[2] = sign * std::sqrt((1.0 - h) / h);
        }
        return g;
    }
    const GammaResult gr = solve_gamma(rsq, s.a);
    const double fp = gr.gamma / rsq;
    const double n = 0.5 * gr.gamma + c.c1 + c.c2;
    const double d = 0.5 * gr.gamma + 4.0 * a2 - c.c1 - c.c2;
    if (n < 0.0 || d < 0.0 || n + d <= 0.0) return std::nullopt;
    T2Gauge g;
    // Stay in H+ unless l+ is very large.
    g.patch = n <= 1e4 * d ? Patch::HPlus : Patch::HMinus;
    const double near = g.patch == Patch::HPlus ? d / (n + d) : n / (n + d);  // 1/(1+L) in the working chart
    const double lsq = g.patch == Patch::HPlus ? n / d : d / n;
    const double sum = rsq * near;
    const double diff = 2.0 * (c.c1 - c.c2) * near / fp;
    const double slack = 1e-13 * sum;
    double first = 0.5 * (sum + diff), second = 0.5 * (sum - diff);
    if (first < -slack || second < -slack) return std::nullopt;
    first = std::max(first, 0.0);
    second = std::max(second, 0.0);
    const double qsq = first * second * lsq;
    const double c3sq = c.c3 * c.c3;
    if (qsq < c3sq * (1.0 - 1e-12) - 1e-300) return std::nullopt;
    const double r1 = std::sqrt(first), r2 = std::sqrt(second);
    g.x[0] = r1;
    g.x[1] = r2;
    if (r1 * r2 > 0.0) {
        const Complex q(sign * std::sqrt(std::max(qsq - c3sq, 0.0)), -c.c3);
        const Complex l = q / (r1 * r2);
        g.x[2] = l.real();
        g.x[3] = l.imag();
    } else {
        g.x[2] = sign * std::sqrt(lsq);
    }
    return g;
}

/// Smallest r^2 on the unbounded component of the leaf (0 when it reaches the
/// bolt or the vertex). Throws Infeasible when no large sphere meets it.
inline double t2_min_radius_sq(const ResolvedConifold& s, const T2Leaf& c) {
    auto feasible = [&](double rsq) { return t2_reduction(s, c, rsq, Branch::Plus).has_value(); };
    const double scale = 1.0 + std::abs(c.c1) + std::abs(c.c2) + std::abs(c.c3) + s.a * s.a;
    double hi = 1e6 * scale * scale;
    if (!feasible(hi)) throw Infeasible("t2 leaf: constants not attained at large radius");
    double lo = hi;
    while (true) {
        lo = hi / 4.0;
        if (lo < 1e-14) {
            if (s.a == 0.0 || feasible(0.0)) return 0.0;
            lo = 0.0;
            break;
        }
        if (!feasible(lo)) break;
        hi = lo;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid)) hi = mid; else lo = mid;
    }
    return hi;
}

/// Representative gauge point at radius r^2: closed-form seed polished by
/// Newton.
inline T2Gauge t2_leaf_gauge_point(const ResolvedConifold& s, const T2Leaf& c, double rsq, Branch branch) {
    auto seed = t2_reduction(s, c, rsq, branch);
    if (!seed) seed = t2_reduction(s, c, rsq * (1.0 + 1e-12), branch);
    if (!seed) throw Infeasible("t2 leaf: radius not attained");
    const auto eq = t2_gauge_equations(s, c, seed->patch);
    // On the bolt, or where the gauge itself degenerates (a radius crossing
    // zero with Im l = 0), the closed form is exact and Newton is singular.
    if (rsq == 0.0 || detail::row_normalized_ratio(fd::jacobian(eq, seed->x)) < 1e-10) return *seed;
    return {seed->patch, detail::polish_on_curve(eq, seed->x, t2_tolerance(rsq))};
}

inline ResolvedPoint t2_leaf_point(const ResolvedConifold& s, const T2Leaf& c, double rsq, Branch branch) {
    return t2_leaf_gauge_point(s, c, rsq, branch).point();
}

inline GroupElement torus_element(double theta1, double theta2) {
    const auto gens = torus_generators();
    return conjugate_action(plane_exponential(gens[0].real, theta1) * plane_exponential(gens[1].real, theta2));
}

/// Leaf frame at a point: the two torus fields and a transverse direction.
inline ResolvedFrame t2_frame(const ResolvedPoint& p, const Vec3c& transverse) {
    const auto gens = torus_generators();
    ResolvedFrame f;
    f.base = p;
    f.v[0] = generator_components(gens[0].matrix, p);
    f.v[1] = generator_components(gens[1].matrix, p);
    f.v[2] = transverse;
    return f;
}

/// Backbone over t with r^2 = r^2_min + t^2 (t >= 0 the plus branch), then the
/// torus sweep over (theta1, theta2). Parameters are (theta1, theta2, t).
inline ResolvedSample t2_leaf_sample(const ResolvedConifold& s, const T2Leaf& c, int n_theta1, int n_theta2, int n_t,
                                     double t_min, double t_max) {
    const auto th1 = detail::angles(n_theta1);
    const auto th2 = detail::angles(n_theta2);
    const auto ts = detail::linspace(t_min, t_max, n_t);
    const double rmin = t2_min_radius_sq(s, c);

    struct Node {
        ResolvedPoint p;
        Vec3c transverse = Vec3c::Zero();
        bool degenerate = false;
    };
    std::vector<Node> backbone(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double t = ts[k];
        const double rsq = rmin + t * t;
        if (rsq == 0.0 && s.a == 0.0) throw DegenerateOrbit("t2 leaf passes through the cone vertex at t = 0");
        const Branch branch = t >= 0.0 ? Branch::Plus : Branch::Minus;
        T2Gauge g;
        try {
            g = t2_leaf_gauge_point(s, c, rsq, branch);
        } catch (const SingularJacobian&) {
            throw ContinuationStall("t2 leaf: degenerate Jacobian along the backbone");
        } catch (const NoConvergence&) {
            throw ContinuationStall("t2 leaf: Newton failed along the backbone");
        }
        Node& node = backbone[k];
        node.p = g.point();
        const auto eq = t2_gauge_equations(s, c, g.patch);
        if (rsq == 0.0 || detail::row_normalized_ratio(fd::jacobian(eq, g.x)) < 1e-10) {
            node.degenerate = true;  // the bolt circle or a gauge singularity
            continue;
        }
        VecX dir = detail::curve_tangent(eq, g.x);
        // Orient along increasing t: r^2 grows with |t| on either branch.
        const double h = 1e-6;
        const double drsq = T2Gauge{g.patch, g.x + h * dir}.point().radius_sq() -
                            T2Gauge{g.patch, g.x - h * dir}.point().radius_sq();
        if ((t != 0.0 && drsq * t < 0.0) || (t == 0.0 && dir[0] + dir[1] + dir[2] + dir[3] < 0.0)) dir = -dir;
        node.transverse = Vec3c(dir[0], dir[1], Complex(dir[2], dir[3]));
    }

    ResolvedSample out;
    out.grid = {n_theta1, n_theta2, n_t};
    out.resize(th1.size() * th2.size() * ts.size());
    parallel_for(th1.size() * th2.size(), [&](std::size_t ij) {
        const std::size_t i = ij / th2.size(), j = ij % th2.size();
        const GroupElement g = torus_element(th1[i], th2[j]);
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const std::size_t idx = ij * ts.size() + k;
            const Node& node = backbone[k];
            const ResolvedTangent moved = pushforward(g, ResolvedTangent{node.p, node.transverse});
            out.points[idx] = moved.base;
            out.frames[idx] = t2_frame(moved.base, moved.components);
            out.parameters[idx] = {th1[i], th2[j], ts[k]};
            out.degenerate[idx] = node.degenerate;
        }
    });
    return out;
}

inline ResolvedSample t2_leaf_sample(const LeafSpec& spec, const SampleGrid& grid = {}) {
    const auto* leaf = std::get_if<T2Leaf>(&spec.family);
    if (!leaf) throw DomainError("t2_leaf_sample: spec is not a T2 leaf");
    return t2_leaf_sample(ResolvedConifold(spec.a), *leaf, grid.n1, grid.n2, grid.n3, grid.t_min, grid.t_max);
}

/// Smallest singular ratio of the row-normalized differential of
/// (mu_1, mu_2, Im XY) in real chart coordinates; rank 3 when clearly > 0.
inline double foliation_rank_ratio(const ResolvedConifold& s, const ResolvedPoint& p) {
    auto f = [&](const VecX& x) {
        Vec3c c;
        for (int k = 0; k < 3; ++k) c[k] = Complex(x[2 * k], x[2 * k + 1]);
        const auto v = t2_invariants(s, ResolvedPoint::from_local(p.patch(), c));
        return VecX(Eigen::Vector3d(v[0], v[1], v[2]));
    };
    VecX x(6);
    for (int k = 0; k < 3; ++k) {
        x[2 * k] = p.local()[k].real();
        x[2 * k + 1] = p.local()[k].imag();
    }
    return detail::row_normalized_ratio(fd::jacobian(f, x));
}

inline bool foliation_generic(const ResolvedConifold& s, const ResolvedPoint& p, double threshold = 1e-8) {
    return foliation_rank_ratio(s, p) > threshold;
}

// ---------------------------------------------------------------------------
// SO(3) family

/// Y(s) on the hyperbola Re(Y^2) = c: u > |v| (plus) or u < -|v| (minus) for
/// c > 0, v > |u| or v < -|u| for c < 0, and the lines u = +-v for c = 0.
inline Complex so3_branch_point(double c, Branch b, double s) {
    const double sign = b == Branch::Plus ? 1.0 : -1.0;
    if (c > 0.0) return std::sqrt(c) * Complex(sign * std::cosh(s), std::sinh(s));
    if (c < 0.0) return std::sqrt(-c) * Complex(std::sinh(s), sign * std::cosh(s));
    return s * Complex(1.0, sign) / std::sqrt(2.0);
}

inline Complex so3_branch_velocity(double c, Branch b, double s) {
    const double sign = b == Branch::Plus ? 1.0 : -1.0;
    if (c > 0.0) return std::sqrt(c) * Complex(sign * std::sinh(s), std::cosh(s));
    if (c < 0.0) return std::sqrt(-c) * Complex(std::cosh(s), sign * std::sinh(s));
    return Complex(1.0, sign) / std::sqrt(2.0);
}

/// Quasi-uniform unit vectors on S^2.
inline std::vector<Eigen::Vector3d> fibonacci_sphere(int n) {
    if (n < 1) throw DomainError("fibonacci_sphere: need at least one point");
    std::vector<Eigen::Vector3d> out;
    out.reserve(static_cast<std::size_t>(n));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        out.emplace_back(r * std::cos(golden * k), r * std::sin(golden * k), z);
    }
    return out;
}

/// diag(1, R) in SO(4) with R e1 = n, by an exact axis-angle rotation.
inline Mat4 so3_rotation_to(const Eigen::Vector3d& n) {
    const Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();
    const Eigen::Vector3d axis = e1.cross(n);
    Eigen::Matrix3d r;
    if (axis.norm() < 1e-15) {
        r = n.x() > 0.0 ? Eigen::Matrix3d::Identity()
                        : Eigen::AngleAxisd(std::numbers::pi, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    } else {
        r = Eigen::AngleAxisd(std::atan2(axis.norm(), e1.dot(n)), axis.normalized()).toRotationMatrix();
    }
    Mat4 g = Mat4::Identity();
    g.block<3, 3>(1, 1) = r;
    return g;
}

/// Orbit frame at (0, Y, 0, 0): the A~2 and A~3 fields and the curve velocity.
inline ResolvedFrame so3_base_frame(Complex y, Complex dy) {
    if (y == Complex(0.0)) throw DegenerateOrbit("so3 leaf: Y = 0 is the cone vertex / a fixed point");
    const ResolvedPoint p = ResolvedPoint::from_plus(0.0, y, 0.0);
    const auto gens = so3_generators();
    ResolvedFrame f;
    f.base = p;
    f.v[0] = generator_components(gens[1].matrix, p);
    f.v[1] = generator_components(gens[2].matrix, p);
    f.v[2] = Vec3c(0.0, dy, 0.0);
    return f;
}

/// Parameters are (s, polar angle, azimuth) of the orbit direction n.
inline ResolvedSample so3_leaf_sample(const ResolvedConifold&, const SO3Leaf& leaf, int n_s, int n_sphere,
                                      double s_min, double s_max) {
    const auto ss = detail::linspace(s_min, s_max, n_s);
    const auto dirs = fibonacci_sphere(n_sphere);
    std::vector<ResolvedFrame> base(ss.size());
    for (std::size_t k = 0; k < ss.size(); ++k)
        base[k] = so3_base_frame(so3_branch_point(leaf.c, leaf.branch, ss[k]),
                                 so3_branch_velocity(leaf.c, leaf.branch, ss[k]));
    ResolvedSample out;
    out.grid = {n_sphere, 1, n_s};
    out.resize(dirs.size() * ss.size());
    parallel_for(dirs.size(), [&](std::size_t i) {
        const Eigen::Vector3d& n = dirs[i];
        const GroupElement g = conjugate_action(so3_rotation_to(n));
        const double polar = std::acos(std::clamp(n.z(), -1.0, 1.0));
        const double azimuth = std::atan2(n.y(), n.x());
        for (std::size_t k = 0; k < ss.size(); ++k) {
            const std::size_t idx = i * ss.size() + k;
            out.frames[idx] = pushforward(g, base[k]);
            out.points[idx] = out.frames[idx].base;
            out.parameters[idx] = {ss[k], polar, azimuth};
        }
    });
    return out;
}

inline ResolvedSample so3_leaf_sample(const LeafSpec& spec, const SampleGrid& grid = {}) {
    const auto* leaf = std::get_if<SO3Leaf>(&spec.family);
    if (!leaf) throw DomainError("so3_leaf_sample: spec is not an SO(3) leaf");
    return so3_leaf_sample(ResolvedConifold(spec.a), *leaf, grid.n3, grid.n1 * grid.n2, grid.t_min, grid.t_max);
}

/// Re(Y^2) of the orbit through (0, Y, 0, 0), i.e. Re(2 z0^2): SO(3) fixes z0.
inline double so3_invariant(const ResolvedPoint& p) {
    const ZPoint z = to_z(p.xyuv());
    return (2.0 * z.z[0] * z.z[0]).real();
}

// ---------------------------------------------------------------------------
// Flat Harvey-Lawson examples in C^3

namespace detail {

/// Orthonormal (t1, t2) with det(t1, t2, u) = 1.
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> sphere_tangents(const Eigen::Vector3d& u) {
    const Eigen::Vector3d ref = std::abs(u.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d t1 = (ref - ref.dot(u) * u).normalized();
    return {t1, u.cross(t1)};
}

}  // namespace detail

/// lambda(s) with Im(lambda^3) = c: real for c = 0, otherwise
/// rho e^{i theta} with theta in (0, pi/3) (c > 0) or (-pi/3, 0) (c < 0).
inline Complex hl_lambda(double c, double s) {
    if (c == 0.0) return s;
    const double theta = (c > 0.0 ? 1.0 : -1.0) * std::numbers::pi / 6.0 + std::numbers::pi / 6.0 * std::tanh(s);
    const double rho = std::cbrt(c / std::sin(3.0 * theta));
    return std::polar(rho, theta);
}

inline Complex hl_lambda_velocity(double c, double s) {
    if (c == 0.0) return 1.0;
    const double theta = (c > 0.0 ? 1.0 : -1.0) * std::numbers::pi / 6.0 + std::numbers::pi / 6.0 * std::tanh(s);
    const double rho = std::cbrt(c / std::sin(3.0 * theta));
    const double dtheta = std::numbers::pi / 6.0 * (1.0 - std::tanh(s) * std::tanh(s));
    const double drho = -rho * std::cos(3.0 * theta) / std::sin(3.0 * theta);
    return std::polar(1.0, theta) * Complex(drho, rho) * dtheta;
}

/// Points lambda u, u on a Fibonacci sphere; parameters (s, polar, azimuth).
inline FlatSample hl_flat_so3(double c, int n_s, int n_sphere, double s_min, double s_max) {
    const auto ss = detail::linspace(s_min, s_max, n_s);
    const auto dirs = fibonacci_sphere(n_sphere);
    FlatSample out;
    out.grid = {n_sphere, 1, n_s};
    out.resize(dirs.size() * ss.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        const Eigen::Vector3d& u = dirs[i];
        const auto [t1, t2] = detail::sphere_tangents(u);
        for (std::size_t k = 0; k < ss.size(); ++k) {
            const std::size_t idx = i * ss.size() + k;
            const Complex l = hl_lambda(c, ss[k]);
            const Complex dl = hl_lambda_velocity(c, ss[k]);
            const Vec3c p = l * u.cast<Complex>();
            out.points[idx] = p;
            out.frames[idx].base = p;
            out.frames[idx].v = {l * t1.cast<Complex>(), l * t2.cast<Complex>(), dl * u.cast<Complex>()};
            out.parameters[idx] = {ss[k], std::acos(std::clamp(u.z(), -1.0, 1.0)), std::atan2(u.y(), u.x())};
            out.degenerate[idx] = l == Complex(0.0);
        }
    }
    return out;
}

inline std::array<double, 3> hl_torus_residual(const Vec3c& z, const HLTorusFlat& c) {
    return {(z[0] * z[1] * z[2]).imag() - c.c1, std::norm(z[0]) - std::norm(z[1]) - c.c2,
            std::norm(z[0]) - std::norm(z[2]) - c.c3};
}

namespace detail {

/// Gauge z2, z3 real: x = (Re z1, Im z1, z2, z3).
inline Vec3c hl_torus_point(const VecX& x) { return Vec3c(Complex(x[0], x[1]), x[2], x[3]); }

inline auto hl_torus_equations(const HLTorusFlat& c) {
    return [c](const VecX& x) {
        const auto r = hl_torus_residual(hl_torus_point(x), c);
        return VecX(Eigen::Vector3d(r[0], r[1], r[2]));
    };
}

/// Orbit representative with |z1|^2 = a1: |z2|^2 = a1 - c2, |z3|^2 = a1 - c3
/// and q = z1 z2 z3 with Im q = c1, |q|^2 = a1 |z2|^2 |z3|^2.
inline std::optional<VecX> hl_torus_reduction(const HLTorusFlat& c, double a1, Branch b) {
    const double a2 = a1 - c.c2, a3 = a1 - c.c3;
    const double slack = 1e-14 * std::max(1.0, a1);
    if (a1 < -slack || a2 < -slack || a3 < -slack) return std::nullopt;
    const double qsq = std::max(a1, 0.0) * std::max(a2, 0.0) * std::max(a3, 0.0);
    if (qsq < c.c1 * c.c1 * (1.0 - 1e-12)) return std::nullopt;
    const double sign = b == Branch::Plus ? 1.0 : -1.0;
    VecX x(4);
    x[2] = std::sqrt(std::max(a2, 0.0));
    x[3] = std::sqrt(std::max(a3, 0.0));
    if (x[2] * x[3] > 0.0) {
        const Complex z1 = Complex(sign * std::sqrt(std::max(qsq - c.c1 * c.c1, 0.0)), c.c1) / (x[2] * x[3]);
        x[0] = z1.real();
        x[1] = z1.imag();
    } else {
        x[0] = sign * std::sqrt(std::max(a1, 0.0));
        x[1] = 0.0;
    }
    return x;
}

inline double hl_torus_min_a1(const HLTorusFlat& c) {
    const double lo0 = std::max({0.0, c.c2, c.c3});
    auto f = [&](double a1) { return a1 * (a1 - c.c2) * (a1 - c.c3) - c.c1 * c.c1; };
    if (f(lo0) >= 0.0) return lo0;
    double lo = lo0, hi = lo0 + 1.0;
    while (f(hi) < 0.0) hi = lo0 + 2.0 * (hi - lo0);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= 0.0) hi = mid; else lo = mid;
    }
    return hi;
}

}  // namespace detail

/// Backbone |z1|^2 = a1_min + t^2 (t >= 0 the branch Re(z1 z2 z3) >= 0), swept
/// by the torus (z1, z2, z3) -> (e^{i(t1+t2)} z1, e^{-i t1} z2, e^{-i t2} z3).
inline FlatSample hl_flat_torus(const HLTorusFlat& c, int n_theta1, int n_theta2, int n_t, double t_min, double t_max) {
    const auto th1 = detail::angles(n_theta1);
    const auto th2 = detail::angles(n_theta2);
    const auto ts = detail::linspace(t_min, t_max, n_t);
    const double amin = detail::hl_torus_min_a1(c);
    const auto eq = detail::hl_torus_equations(c);

    FlatSample out;
    out.grid = {n_theta1, n_theta2, n_t};
    out.resize(th1.size() * th2.size() * ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double t = ts[k];
        const double a1 = amin + t * t;
        auto seed = detail::hl_torus_reduction(c, a1, t >= 0.0 ? Branch::Plus : Branch::Minus);
        if (!seed) throw NoConvergence("hl_flat_torus: no seed at |z1|^2 = " + std::to_string(a1));
        VecX x = *seed;
        Vec3c dz = Vec3c::Zero();
        bool degenerate = detail::row_normalized_ratio(fd::jacobian(eq, x)) < 1e-10;
        if (!degenerate) {
            x = detail::polish_on_curve(eq, x, 1e-13 * std::max(1.0, a1 * std::sqrt(std::max(a1, 0.0))));
            VecX dir = detail::curve_tangent(eq, x);
            if ((t != 0.0 && (x[0] * dir[0] + x[1] * dir[1]) * t < 0.0) || (t == 0.0 && dir.sum() < 0.0)) dir = -dir;
            dz = Vec3c(Complex(dir[0], dir[1]), dir[2], dir[3]);
        }
        const Vec3c z = detail::hl_torus_point(x);
        for (std::size_t i = 0; i < th1.size(); ++i) {
            for (std::size_t j = 0; j < th2.size(); ++j) {
                const Vec3c phase(std::polar(1.0, th1[i] + th2[j]), std::polar(1.0, -th1[i]), std::polar(1.0, -th2[j]));
                const Vec3c p = phase.cwiseProduct(z);
                const std::size_t idx = (i * th2.size() + j) * ts.size() + k;
                out.points[idx] = p;
                out.frames[idx].base = p;
                out.frames[idx].v = {Vec3c(kI * p[0], -kI * p[1], 0.0), Vec3c(kI * p[0], 0.0, -kI * p[2]),
                                     phase.cwiseProduct(dz)};
                out.parameters[idx] = {th1[i], th2[j], t};
                out.degenerate[idx] = degenerate;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Asymptotic cones

enum class ConeFamily { T2, SO3 };

inline const char* to_string(ConeFamily f) { return f == ConeFamily::T2 ? "t2" : "so3"; }

/// Cone equations in z: Im(z0 z1-bar) = Im(z2 z3-bar) = Im(z0^2 + z1^2) = 0
/// for the torus cone; Re(z0^2) = 0 and Re(z_k z0-bar) = 0 (k = 1..3) for the
/// SO(3) cone. Each residual is quadratic, so divided by r^2.
inline double cone_residual(ConeFamily family, const ZPoint& p) {
    const Vec4c& z = p.z;
    const double rsq = z.squaredNorm();
    if (rsq == 0.0) return 0.0;
    if (family == ConeFamily::T2) {
        const double e1 = 2.0 * (z[0] * std::conj(z[1])).imag();
        const double e2 = 2.0 * (z[2] * std::conj(z[3])).imag();
        const double e3 = 0.5 * (z[0] * z[0] + z[1] * z[1]).imag();
        return std::max({std::abs(e1), std::abs(e2), std::abs(e3)}) / rsq;
    }
    double worst = std::abs(2.0 * (z[0] * z[0]).real());
    for (int k = 1; k < 4; ++k) worst = std::max(worst, 2.0 * std::abs((z[k] * std::conj(z[0])).real()));
    return worst / rsq;
}

/// |X|^2 - |Y|^2, |V|^2 - |U|^2 and Im(XY) over r^2 for the torus cone (cross
/// checked against the z form); the z form for SO(3).
inline double cone_residual(ConeFamily family, const ResolvedPoint& p) {
    const ZPoint z = to_z(p.xyuv());
    if (family == ConeFamily::SO3) return cone_residual(family, z);
    const XyuvPoint& w = p.xyuv();
    const double rsq = w.radius_sq();
    if (rsq == 0.0) return 0.0;
    const double e1 = std::norm(w.X) - std::norm(w.Y);
    const double e2 = std::norm(w.V) - std::norm(w.U);
    const double e3 = (w.X * w.Y).imag();
    const double direct = std::max({std::abs(e1), std::abs(e2), std::abs(e3)}) / rsq;
    const double zform = cone_residual(family, z);
    if (std::abs(direct - zform) > 1e-12 * std::max(1.0, direct))
        throw GeometryError("cone_residual: coordinate forms disagree");
    return direct;
}

}  // namespace conifold_slag
