#pragma once

// Residuals certifying that sampled frames span special Lagrangian tangent
// spaces, and their aggregation into reports.
//
// All residuals are scale invariant: omega is divided by g-norms, Im Omega by
// |Omega|, and the calibration ratio is homogeneous of degree zero.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "conifold_slag/slag_families.hpp"

namespace conifold_slag {

/// Smallest singular value of the real 6x3 component matrix with unit columns.
template <class P>
double frame_rank_measure(const TangentFrame<P>& f) {
    Eigen::Matrix<double, 6, 3> m;
    for (int i = 0; i < 3; ++i) {
        const Vec3c& v = f.v[static_cast<std::size_t>(i)];
        const double n = v.norm();
        if (n == 0.0) return 0.0;
        for (int k = 0; k < 3; ++k) {
            m(2 * k, i) = v[k].real() / n;
            m(2 * k + 1, i) = v[k].imag() / n;
        }
    }
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 3>> svd(m);
    return svd.singularValues()[2];
}

inline constexpr double kRankThreshold = 1e-8;

template <class P>
void require_rank(const TangentFrame<P>& f) {
    if (!(frame_rank_measure(f) > kRankThreshold)) throw RankDeficient("frame has rank < 3");
}

template <class S, class P>
double g_norm(const S& s, const P& p, const Vec3c& v) {
    return std::sqrt(std::max(hermitian_eval(s, p, v, v).real(), 0.0));
}

template <class S, class P>
double lagrangian_residual(const S& s, const TangentFrame<P>& f) {
    require_rank(f);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const auto vi = f.vector(i), vj = f.vector(j);
            const double w = kahler_form_eval(s, f.base, vi, vj);
            worst = std::max(worst, std::abs(w) / (g_norm(s, f.base, vi.components) * g_norm(s, f.base, vj.components)));
        }
    }
    return worst;
}

/// Omega on the frame rescaled to unit g-norms.
template <class S, class P>
Complex normalized_volume(const S& s, const TangentFrame<P>& f) {
    TangentFrame<P> unit = f;
    for (auto& v : unit.v) {
        const double n = g_norm(s, f.base, v);
        if (n == 0.0) throw ZeroVolumeForm("frame vector of zero length");
        v /= n;
    }
    const Complex om = holomorphic_volume_eval(s, unit);
    if (std::abs(om) < 1e-14) throw ZeroVolumeForm("Omega vanishes on the frame");
    return om;
}

template <class S, class P>
double special_residual(const S& s, const TangentFrame<P>& f) {
    const Complex om = normalized_volume(s, f);
    return std::abs(om.imag()) / std::abs(om);
}

/// Phase of Omega on the frame, in (-pi, pi].
template <class S, class P>
double frame_phase(const S& s, const TangentFrame<P>& f) {
    return std::arg(normalized_volume(s, f));
}

/// sqrt(det Gram) / |Omega(frame)|.
template <class S, class P>
double calibration_ratio(const S& s, const TangentFrame<P>& f) {
    Eigen::Matrix3d gram;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            gram(i, j) = metric_eval(s, f.base, f.vector(i), f.vector(j));
    const Complex om = holomorphic_volume_eval(s, f);
    if (std::abs(om) == 0.0) throw ZeroVolumeForm("Omega vanishes on the frame");
    return std::sqrt(std::max(gram.determinant(), 0.0)) / std::abs(om);
}

// ---------------------------------------------------------------------------
// Invariance

enum class InvariantForm { Metric, Kahler, HoloVol, AlphaRC, AlphaPM };

inline const char* to_string(InvariantForm f) {
    switch (f) {
        case InvariantForm::Metric: return "metric";
        case InvariantForm::Kahler: return "kahler";
        case InvariantForm::HoloVol: return "holomorphic_volume";
        case InvariantForm::AlphaRC: return "alpha_rc";
        case InvariantForm::AlphaPM: return "alpha_pm";
    }
    return "?";
}

/// |form(g* f at g p) - form(f at p)| normalized by g-norms (and by max(1, r)
/// for the one-forms), maximized over the frames.
inline double invariance_residual(const ResolvedConifold& s, InvariantForm form, const GroupElement& g,
                                  const std::vector<ResolvedFrame>& frames) {
    double worst = 0.0;
    for (const ResolvedFrame& f : frames) {
        ResolvedFrame h = pushforward(g, f);
        // alpha_pm is written in the chart of its base point; compare in one chart.
        if (form == InvariantForm::AlphaPM && h.base.patch() != f.base.patch() && h.base.lambda() != Complex(0.0))
            h = to_patch(h, f.base.patch());
        std::array<double, 3> n{};
        for (int i = 0; i < 3; ++i) n[static_cast<std::size_t>(i)] = g_norm(s, f.base, f.v[static_cast<std::size_t>(i)]);
        switch (form) {
            case InvariantForm::Metric:
            case InvariantForm::Kahler:
                for (int i = 0; i < 3; ++i) {
                    for (int j = i; j < 3; ++j) {
                        const Complex a = hermitian_eval(s, f.base, f.v[static_cast<std::size_t>(i)], f.v[static_cast<std::size_t>(j)]);
                        const Complex b = hermitian_eval(s, h.base, h.v[static_cast<std::size_t>(i)], h.v[static_cast<std::size_t>(j)]);
                        const double d = form == InvariantForm::Metric ? b.real() - a.real() : b.imag() - a.imag();
                        worst = std::max(worst, std::abs(d) / (n[static_cast<std::size_t>(i)] * n[static_cast<std::size_t>(j)]));
                    }
                }
                break;
            case InvariantForm::HoloVol:
                worst = std::max(worst, std::abs(holomorphic_volume_eval(s, h) - holomorphic_volume_eval(s, f)) /
                                            (n[0] * n[1] * n[2]));
                break;
            case InvariantForm::AlphaRC:
            case InvariantForm::AlphaPM: {
                const double scale = std::max(1.0, std::sqrt(f.base.radius_sq()));
                for (int i = 0; i < 3; ++i) {
                    const double a = form == InvariantForm::AlphaRC ? alpha_rc_eval(s, f.base, f.vector(i))
                                                                    : alpha_pm_eval(f.base, f.vector(i));
                    const double b = form == InvariantForm::AlphaRC ? alpha_rc_eval(s, h.base, h.vector(i))
                                                                    : alpha_pm_eval(h.base, h.vector(i));
                    worst = std::max(worst, std::abs(b - a) / (n[static_cast<std::size_t>(i)] * scale));
                }
                break;
            }
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Reports

struct Tolerances {
    double lagrangian = 1e-8;
    double special = 1e-8;
    double calibration_spread = 1e-6;  ///< relative stddev of the calibration ratio
    std::optional<double> cone;        ///< only checked when set
};

struct SampleRow {
    std::size_t index = 0;
    bool degenerate = false;
    double lagrangian = 0.0;
    double special = 0.0;
    double calibration = 0.0;
    double phase = 0.0;
    std::optional<double> cone;
};

struct ColumnSummary {
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

struct VerificationReport {
    std::vector<SampleRow> rows;
    ColumnSummary lagrangian, special, calibration, cone;
    double kappa = 0.0;               ///< median calibration ratio
    double calibration_spread = 0.0;  ///< relative stddev
    double phase = 0.0;               ///< median phase of Omega
    std::size_t degenerate = 0;
    Tolerances tolerances;
    bool passed = false;
};

namespace detail {

inline ColumnSummary summarize(const std::vector<double>& v) {
    ColumnSummary out;
    out.count = v.size();
    if (v.empty()) return out;
    out.max = *std::max_element(v.begin(), v.end());
    for (double x : v) out.mean += x;
    out.mean /= static_cast<double>(v.size());
    for (double x : v) out.stddev += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(out.stddev / static_cast<double>(v.size()));
    return out;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Evaluates every frame; degenerate frames (flagged by the sampler, rank
/// deficient or with vanishing Omega) are kept as rows but excluded from the
/// statistics. The cone residual is computed when a family is given.
template <class S, class P>
VerificationReport run_report(const S& s, const LeafSample<P>& sample, const Tolerances& tol = {},
                              std::optional<ConeFamily> cone = std::nullopt) {
    VerificationReport rep;
    rep.tolerances = tol;
    rep.rows.resize(sample.size());
    parallel_for(sample.size(), [&](std::size_t i) {
        SampleRow& row = rep.rows[i];
        row.index = i;
        row.degenerate = i < sample.degenerate.size() && sample.degenerate[i];
        if constexpr (std::is_same_v<P, ResolvedPoint>) {
            if (cone) row.cone = cone_residual(*cone, sample.points[i]);
        }
        if (row.degenerate) return;
        try {
            const auto& f = sample.frames[i];
            row.lagrangian = lagrangian_residual(s, f);
            row.special = special_residual(s, f);
            row.phase = frame_phase(s, f);
            row.calibration = calibration_ratio(s, f);
        } catch (const RankDeficient&) {
            row.degenerate = true;
        } catch (const ZeroVolumeForm&) {
            row.degenerate = true;
        }
    });
    std::vector<double> lag, spec, cal, con, phase;
    for (const SampleRow& row : rep.rows) {
        if (row.cone) con.push_back(*row.cone);
        if (row.degenerate) {
            ++rep.degenerate;
            continue;
        }
        lag.push_back(row.lagrangian);
        spec.push_back(row.special);
        cal.push_back(row.calibration);
        phase.push_back(row.phase);
    }
    rep.lagrangian = detail::summarize(lag);
    rep.special = detail::summarize(spec);
    rep.calibration = detail::summarize(cal);
    rep.cone = detail::summarize(con);
    rep.kappa = detail::median(cal);
    rep.phase = detail::median(phase);
    rep.calibration_spread = rep.calibration.mean > 0.0 ? rep.calibration.stddev / rep.calibration.mean : 0.0;
    rep.passed = !lag.empty() && rep.lagrangian.max <= tol.lagrangian && rep.special.max <= tol.special &&
                 rep.calibration_spread <= tol.calibration_spread &&
                 (!tol.cone || con.empty() || rep.cone.max <= *tol.cone);
    return rep;
}

// ---------------------------------------------------------------------------
// Negative controls

namespace detail {

inline Vec3c random_direction(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3c v;
    for (int k = 0; k < 3; ++k) v[k] = Complex(n(rng), n(rng));
    return v / v.norm();
}

inline ResolvedPoint moved(const ResolvedPoint& p, const Vec3c& d, double eps) {
    return displace(p, d, eps * std::max(1.0, p.local().norm()));
}

inline Vec3c moved(const Vec3c& p, const Vec3c& d, double eps) { return p + eps * std::max(1.0, p.norm()) * d; }

}  // namespace detail

/// Moves every base point off the leaf by a relative eps in a random chart
/// direction and tilts every frame vector by a relative eps.
template <class P>
LeafSample<P> perturb_sample(const LeafSample<P>& sample, double eps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LeafSample<P> out = sample;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const P q = detail::moved(sample.points[i], detail::random_direction(rng), eps);
        out.points[i] = q;
        out.frames[i].base = q;
        for (auto& v : out.frames[i].v) v += eps * v.norm() * detail::random_direction(rng);
    }
    return out;
}

/// Multiplies one holomorphic component of every frame vector by e^{i phase}.
template <class P>
LeafSample<P> rotate_phase(const LeafSample<P>& sample, double phase, int coordinate = 0) {
    LeafSample<P> out = sample;
    const Complex rot = std::polar(1.0, phase);
    for (auto& f : out.frames)
        for (auto& v : f.v) v[coordinate] *= rot;
    return out;
}

}  // namespace conifold_slag
