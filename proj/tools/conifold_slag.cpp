// conifold-slag: verification suites, leaf sampling and export, point
// evaluation and asymptotic scans.
//
// Exit codes: 0 success / all checks pass, 1 check failure or solver error,
// 2 configuration error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"

#include "conifold_slag/report_json.hpp"
#include "conifold_slag/suites.hpp"

namespace cs = conifold_slag;
using json = nlohmann::ordered_json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

// ---------------------------------------------------------------------------
// Parsing

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string strip(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
}

double parse_real(const std::string& tok) {
    const std::string t = strip(tok);
    if (t.empty()) throw ConfigError("empty number");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v)) throw ConfigError("malformed number '" + tok + "'");
    return v;
}

/// "a", "a+bi", "a-bi", "bi", "i", "-i" (j accepted for i).
cs::Complex parse_complex(const std::string& tok) {
    std::string t = strip(tok);
    if (t.empty()) throw ConfigError("empty complex number");
    if (t.back() != 'i' && t.back() != 'j') return {parse_real(t), 0.0};
    t.pop_back();
    // Split at the last sign that is not a leading sign or an exponent sign.
    std::size_t cut = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;) {
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            cut = k;
            break;
        }
    }
    auto imag_part = [&](const std::string& s) {
        if (s.empty() || s == "+") return 1.0;
        if (s == "-") return -1.0;
        return parse_real(s);
    };
    if (cut == std::string::npos) return {0.0, imag_part(t)};
    return {parse_real(t.substr(0, cut)), imag_part(t.substr(cut))};
}

std::vector<double> parse_reals(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) out.push_back(parse_real(tok));
    return out;
}

cs::Vec4c parse_point4(const std::string& s) {
    const auto toks = split(s, ',');
    if (toks.size() != 4) throw ConfigError("expected four comma-separated complex coordinates");
    cs::Vec4c v;
    for (int k = 0; k < 4; ++k) v[k] = parse_complex(toks[static_cast<std::size_t>(k)]);
    return v;
}

// ---------------------------------------------------------------------------
// Output

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Write-to-temp then rename, so a failed run never leaves a partial file.
void write_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, target);
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") std::cout << content;
    else write_atomic(out_path, content);
}

// ---------------------------------------------------------------------------
// Common configuration

struct Common {
    double a = 1.0;
    std::uint64_t seed = 42;
    std::string out;
    std::string format;
    std::string c;
    std::optional<double> c1, c2, c3;
    std::string branch = "plus";
    bool branch_given = false;
    std::string grid;
    std::string trange;
    std::optional<double> tol;
};

void validate_common(const Common& cfg) {
    if (!(cfg.a >= 0.0) || !std::isfinite(cfg.a)) throw ConfigError("--a must be a finite non-negative real");
    if (cfg.tol && !(*cfg.tol > 0.0)) throw ConfigError("--tol must be positive");
    if (cfg.branch != "plus" && cfg.branch != "minus" && cfg.branch != "both")
        throw ConfigError("--branch must be plus, minus or both");
}

cs::T2Leaf t2_constants(const Common& cfg) {
    cs::T2Leaf leaf;
    if (!cfg.c.empty()) {
        const auto v = parse_reals(cfg.c);
        if (v.size() != 3) throw ConfigError("--c for a torus leaf needs three values c1,c2,c3");
        leaf = {v[0], v[1], v[2]};
    }
    if (cfg.c1) leaf.c1 = *cfg.c1;
    if (cfg.c2) leaf.c2 = *cfg.c2;
    if (cfg.c3) leaf.c3 = *cfg.c3;
    return leaf;
}

bool has_constants(const Common& cfg) { return !cfg.c.empty() || cfg.c1 || cfg.c2 || cfg.c3; }

double scalar_constant(const Common& cfg, double fallback) {
    if (cfg.c.empty()) return cfg.c1.value_or(fallback);
    const auto v = parse_reals(cfg.c);
    if (v.size() != 1) throw ConfigError("--c for this family needs a single value");
    return v[0];
}

std::vector<cs::Branch> branches(const Common& cfg, bool allow_both) {
    if (cfg.branch == "plus") return {cs::Branch::Plus};
    if (cfg.branch == "minus") return {cs::Branch::Minus};
    if (cfg.branch == "both" && allow_both) return {cs::Branch::Plus, cs::Branch::Minus};
    throw ConfigError("--branch must be plus, minus" + std::string(allow_both ? " or both" : ""));
}

cs::SampleGrid sample_grid(const Common& cfg, cs::SampleGrid g) {
    if (!cfg.grid.empty()) {
        const auto v = parse_reals(cfg.grid);
        if (v.size() != 3) throw ConfigError("--grid needs n1,n2,n3");
        for (double x : v)
            if (!(x >= 1.0) || x != std::floor(x) || x > 1e6) throw ConfigError("--grid entries must be positive integers");
        g.n1 = static_cast<int>(v[0]);
        g.n2 = static_cast<int>(v[1]);
        g.n3 = static_cast<int>(v[2]);
    }
    if (!cfg.trange.empty()) {
        const auto v = parse_reals(cfg.trange);
        if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError("--trange needs lo,hi with lo < hi");
        g.t_min = v[0];
        g.t_max = v[1];
    }
    return g;
}

void add_common(CLI::App* cmd, Common& cfg, bool constants) {
    cmd->add_option("--a", cfg.a, "resolution parameter a >= 0")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--out", cfg.out, "output path (stdout when omitted)");
    if (constants) {
        cmd->add_option("--c", cfg.c, "leaf constants: c1,c2,c3 (torus) or c (SO(3), flat SO(3))");
        cmd->add_option("--c1", cfg.c1, "first leaf constant");
        cmd->add_option("--c2", cfg.c2, "second leaf constant");
        cmd->add_option("--c3", cfg.c3, "third leaf constant");
        cmd->add_option("--branch", cfg.branch, "plus | minus | both")->capture_default_str();
        cmd->add_option("--grid", cfg.grid, "sample grid n1,n2,n3");
        cmd->add_option("--trange", cfg.trange, "transverse parameter range lo,hi");
    }
}

json check_json(const cs::Check& c) {
    return {{"name", c.name},
            {"value", c.value},
            {"threshold", c.threshold},
            {"kind", c.kind == cs::Check::Kind::AtMost ? "at_most" : "at_least"},
            {"passed", c.passed}};
}

json suite_json(const cs::SuiteResult& r) {
    json j{{"suite", r.suite}, {"a", r.a}, {"passed", r.passed()}, {"checks", json::array()}};
    for (const auto& c : r.checks) j["checks"].push_back(check_json(c));
    return j;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyConfig {
    Common common;
    std::string suite = "all";
    std::optional<double> perturb;
    std::optional<double> phase;
};

int cmd_verify(const VerifyConfig& cfg) {
    const Common& c = cfg.common;
    validate_common(c);
    if (!c.format.empty() && c.format != "json") throw ConfigError("verify writes JSON reports only");
    if (cfg.perturb && !(*cfg.perturb > 0.0)) throw ConfigError("--perturb must be positive");
    static const std::vector<std::string> known{"all", "structure", "ricci", "invariance", "moments", "t2",
                                                "so3", "calibration", "flat", "asymptotics", "negative"};
    if (std::find(known.begin(), known.end(), cfg.suite) == known.end())
        throw ConfigError("unknown suite '" + cfg.suite + "'");
    auto want = [&](const char* name) { return cfg.suite == "all" || cfg.suite == name; };
    const bool leaf_report = (cfg.suite == "t2" || cfg.suite == "so3") && (has_constants(c) || cfg.perturb || cfg.phase);

    json doc{{"command", "verify"}, {"suite", cfg.suite}, {"a", c.a}, {"seed", c.seed}};
    doc["suites"] = json::array();
    doc["reports"] = json::array();
    bool passed = true;
    auto run_suite = [&](const cs::SuiteResult& r) {
        passed = passed && r.passed();
        doc["suites"].push_back(suite_json(r));
        for (const auto& chk : r.checks)
            std::cerr << (chk.passed ? "PASS " : "FAIL ") << r.suite << ": " << chk.name << " = " << fmt(chk.value)
                      << " (" << (chk.kind == cs::Check::Kind::AtMost ? "<= " : ">= ") << fmt(chk.threshold) << ")\n";
    };

    if (leaf_report) {
        const cs::ResolvedConifold s(c.a);
        cs::Tolerances tol;
        if (c.tol) tol.lagrangian = tol.special = *c.tol;
        cs::ReportContext ctx;
        ctx.a = c.a;
        ctx.seed = c.seed;
        std::vector<std::pair<cs::ResolvedSample, std::string>> samples;
        if (cfg.suite == "t2") {
            const cs::T2Leaf leaf = t2_constants(c);
            const cs::SampleGrid g = sample_grid(c, {4, 4, 10, -2.5, 2.5});
            samples.emplace_back(cs::t2_leaf_sample(s, leaf, g.n1, g.n2, g.n3, g.t_min, g.t_max), "t2");
            ctx.parameters = {{"c1", leaf.c1}, {"c2", leaf.c2}, {"c3", leaf.c3}};
        } else {
            const double value = scalar_constant(c, 1.0);
            const cs::SampleGrid g = sample_grid(c, {4, 6, 11, -2.0, 2.0});
            for (cs::Branch b : branches(c, true))
                samples.emplace_back(cs::so3_leaf_sample(s, {value, b}, g.n3, g.n1 * g.n2, g.t_min, g.t_max),
                                     std::string("so3-") + cs::to_string(b));
            ctx.parameters = {{"c", value}, {"branch", c.branch}};
        }
        for (auto& [smp, family] : samples) {
            cs::ResolvedSample used = smp;
            if (cfg.perturb) used = cs::perturb_sample(used, *cfg.perturb, c.seed);
            if (cfg.phase) used = cs::rotate_phase(used, *cfg.phase);
            const auto cone = family == "t2" ? cs::ConeFamily::T2 : cs::ConeFamily::SO3;
            const cs::VerificationReport rep = cs::run_report(s, used, tol, cone);
            ctx.family = family;
            json rj = cs::to_json(rep, ctx);
            if (cfg.perturb) rj["perturbation"] = *cfg.perturb;
            if (cfg.phase) rj["phase_rotation"] = *cfg.phase;
            doc["reports"].push_back(rj);
            passed = passed && rep.passed;
            std::cerr << (rep.passed ? "PASS " : "FAIL ") << family << " leaf: lagrangian max " << fmt(rep.lagrangian.max)
                      << ", special max " << fmt(rep.special.max) << ", kappa " << fmt(rep.kappa) << "\n";
        }
    } else {
        if (want("structure")) run_suite(cs::structure_suite(c.seed));
        if (want("ricci")) run_suite(cs::ricci_suite(c.a, c.seed));
        if (want("invariance")) run_suite(cs::invariance_suite(c.a, c.seed));
        if (want("moments")) run_suite(cs::moment_suite(c.a, c.seed));
        if (want("t2")) run_suite(cs::t2_suite(c.a, c.seed));
        if (want("so3")) run_suite(cs::so3_suite(c.a));
        if (want("calibration")) run_suite(cs::calibration_suite(c.a));
        if (want("flat")) run_suite(cs::flat_suite());
        if (want("asymptotics")) run_suite(cs::asymptotics_suite(c.a));
        if (want("negative")) run_suite(cs::negative_suite(c.a, c.seed));
    }
    doc["passed"] = passed;
    emit(c.out, doc.dump(2) + "\n");
    return passed ? kExitOk : kExitFail;
}

// ---------------------------------------------------------------------------
// leaf

struct LeafConfig {
    Common common;
    std::string family;
    std::string embed;
};

/// Real coordinates (ReX, ImX, ReY, ImY, ReU, ImU, ReV, ImV) of a point.
std::array<double, 8> real_xyuv(const cs::ResolvedPoint& p) {
    const cs::XyuvPoint& w = p.xyuv();
    return {w.X.real(), w.X.imag(), w.Y.real(), w.Y.imag(), w.U.real(), w.U.imag(), w.V.real(), w.V.imag()};
}

std::array<double, 3> embed_point(const std::string& mode, const cs::ResolvedPoint& p,
                                  const std::array<double, 3>& params) {
    if (mode == "chart") return params;
    if (mode == "yr") {
        const cs::Complex y = p.xyuv().Y;
        return {y.real(), y.imag(), std::log1p(p.radius_sq())};
    }
    const auto idx = parse_reals(mode.substr(5));
    const auto r = real_xyuv(p);
    return {r[static_cast<std::size_t>(idx[0])], r[static_cast<std::size_t>(idx[1])], r[static_cast<std::size_t>(idx[2])]};
}

std::array<double, 3> embed_point(const std::string& mode, const cs::Vec3c& z, const std::array<double, 3>& params) {
    if (mode == "chart") return params;
    if (mode == "yr") return {z[1].real(), z[1].imag(), std::log1p(z.squaredNorm())};
    const auto idx = parse_reals(mode.substr(5));
    const std::array<double, 6> r{z[0].real(), z[0].imag(), z[1].real(), z[1].imag(), z[2].real(), z[2].imag()};
    return {r[static_cast<std::size_t>(idx[0])], r[static_cast<std::size_t>(idx[1])], r[static_cast<std::size_t>(idx[2])]};
}

void validate_embed(const std::string& mode, int dims) {
    if (mode == "chart" || mode == "yr") return;
    if (mode.rfind("real:", 0) == 0) {
        const auto idx = parse_reals(mode.substr(5));
        if (idx.size() == 3 && std::all_of(idx.begin(), idx.end(), [&](double i) {
                return i >= 0 && i < dims && i == std::floor(i);
            }))
            return;
    }
    throw ConfigError("--embed must be chart, yr or real:i,j,k with indices into the real coordinates");
}

/// Quads over grid axes 0 and 2 in every axis-1 layer, split into triangles;
/// axis 0 wraps when it is an angle.
template <class P>
std::string obj_text(const cs::LeafSample<P>& smp, const std::string& embed, bool wrap, const std::string& title) {
    (void)title;  // OBJ output carries v/f records only
    std::ostringstream out;
    for (std::size_t i = 0; i < smp.size(); ++i) {
        const auto v = embed_point(embed, smp.points[i], smp.parameters[i]);
        out << "v " << fmt(v[0]) << ' ' << fmt(v[1]) << ' ' << fmt(v[2]) << '\n';
    }
    const int n0 = smp.grid[0], n1 = smp.grid[1], n2 = smp.grid[2];
    auto id = [&](int i, int j, int k) { return (static_cast<long>(i) * n1 + j) * n2 + k + 1; };
    const int i_end = wrap ? n0 : n0 - 1;
    for (int j = 0; j < n1; ++j) {
        for (int i = 0; i < i_end; ++i) {
            const int ii = (i + 1) % n0;
            if (ii == i) continue;
            for (int k = 0; k + 1 < n2; ++k) {
                out << "f " << id(i, j, k) << ' ' << id(ii, j, k) << ' ' << id(ii, j, k + 1) << '\n';
                out << "f " << id(i, j, k) << ' ' << id(ii, j, k + 1) << ' ' << id(i, j, k + 1) << '\n';
            }
        }
    }
    return out.str();
}

std::string resolved_csv(const cs::ResolvedSample& smp, const std::string& comment,
                         const std::function<std::array<double, 3>(const cs::ResolvedPoint&)>& residuals) {
    std::ostringstream out;
    out << "# " << comment << "\n";
    out << "ReX,ImX,ReY,ImY,ReU,ImU,ReV,ImV,Relambda_plus,Imlambda_plus,rsq,param1,param2,param3,res1,res2,res3,"
           "degenerate\n";
    for (std::size_t i = 0; i < smp.size(); ++i) {
        const cs::ResolvedPoint& p = smp.points[i];
        for (double x : real_xyuv(p)) out << fmt(x) << ',';
        const cs::CP1Point& l = p.cp1();
        if (l.l1 == cs::Complex(0.0)) out << "nan,nan,";
        else out << fmt(l.lambda_plus().real()) << ',' << fmt(l.lambda_plus().imag()) << ',';
        out << fmt(p.radius_sq()) << ',';
        for (double x : smp.parameters[i]) out << fmt(x) << ',';
        for (double x : residuals(p)) out << fmt(x) << ',';
        out << (smp.degenerate[i] ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string flat_csv(const cs::FlatSample& smp, const std::string& comment,
                     const std::function<std::array<double, 3>(std::size_t)>& residuals) {
    std::ostringstream out;
    out << "# " << comment << "\n";
    out << "Rez1,Imz1,Rez2,Imz2,Rez3,Imz3,param1,param2,param3,res1,res2,res3,degenerate\n";
    for (std::size_t i = 0; i < smp.size(); ++i) {
        for (int k = 0; k < 3; ++k) out << fmt(smp.points[i][k].real()) << ',' << fmt(smp.points[i][k].imag()) << ',';
        for (double x : smp.parameters[i]) out << fmt(x) << ',';
        for (double x : residuals(i)) out << fmt(x) << ',';
        out << (smp.degenerate[i] ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
    if (path.empty() || path == "-") return path;
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + "_" + suffix + p.extension().string())).string();
}

int cmd_leaf(const LeafConfig& cfg) {
    const Common& c = cfg.common;
    validate_common(c);
    const std::string format = c.format.empty() ? "csv" : c.format;
    if (format != "csv" && format != "obj") throw ConfigError("leaf --format must be csv or obj");
    const bool flat = cfg.family == "hl-so3" || cfg.family == "hl-torus";
    const std::string embed = cfg.embed.empty() ? (cfg.family == "so3" ? "yr" : "chart") : cfg.embed;
    validate_embed(embed, flat ? 6 : 8);
    const bool csv = format == "csv";

    if (cfg.family == "t2") {
        const cs::T2Leaf leaf = t2_constants(c);
        const cs::SampleGrid g = sample_grid(c, {});
        const cs::ResolvedConifold s(c.a);
        const cs::ResolvedSample smp = cs::t2_leaf_sample(s, leaf, g.n1, g.n2, g.n3, g.t_min, g.t_max);
        std::ostringstream title;
        title << "t2 leaf a=" << fmt(c.a) << " c=" << fmt(leaf.c1) << "," << fmt(leaf.c2) << "," << fmt(leaf.c3);
        const std::string text =
            csv ? resolved_csv(smp,
                               title.str() + "; params (theta1, theta2, t) with r^2 = r^2_min + t^2; residuals "
                                             "(mu1 - c1, mu2 - c2, Im XY - c3)",
                               [&](const cs::ResolvedPoint& p) { return cs::t2_leaf_residual(s, p, leaf); })
                : obj_text(smp, embed, true, title.str() + "; embedding " + embed);
        emit(c.out, text);
        std::cerr << "wrote " << smp.size() << " samples\n";
        return kExitOk;
    }
    if (cfg.family == "so3") {
        const double value = scalar_constant(c, 1.0);
        // At c = 0 the two branches are the two cone components; emit both unless one is asked for.
        const auto bs = value == 0.0 && !c.branch_given ? std::vector<cs::Branch>{cs::Branch::Plus, cs::Branch::Minus}
                                                        : branches(c, true);
        const cs::SampleGrid g = sample_grid(c, {4, 6, 12, -2.0, 2.0});
        const cs::ResolvedConifold s(c.a);
        for (cs::Branch b : bs) {
            const cs::ResolvedSample smp = cs::so3_leaf_sample(s, {value, b}, g.n3, g.n1 * g.n2, g.t_min, g.t_max);
            std::ostringstream title;
            title << "so3 leaf a=" << fmt(c.a) << " c=" << fmt(value) << " branch=" << cs::to_string(b);
            const std::string text =
                csv ? resolved_csv(smp,
                                   title.str() + "; params (s, polar, azimuth); residuals (Re(Y^2) - c, |mu_SO3|, "
                                                 "cone residual)",
                                   [&](const cs::ResolvedPoint& p) {
                                       return std::array<double, 3>{cs::so3_invariant(p) - value,
                                                                    cs::so3_moment(s, p).norm(),
                                                                    cs::cone_residual(cs::ConeFamily::SO3, p)};
                                   })
                    : obj_text(smp, embed, false, title.str() + "; embedding " + embed);
            emit(bs.size() > 1 ? with_suffix(c.out, cs::to_string(b)) : c.out, text);
            std::cerr << "wrote " << smp.size() << " samples (" << cs::to_string(b) << ")\n";
        }
        return kExitOk;
    }
    if (cfg.family == "hl-so3") {
        const double value = scalar_constant(c, 0.0);
        const cs::SampleGrid g = sample_grid(c, {4, 6, 12, -2.0, 2.0});
        const cs::FlatSample smp = cs::hl_flat_so3(value, g.n3, g.n1 * g.n2, g.t_min, g.t_max);
        const std::string title = "flat SO(3) example c=" + fmt(value);
        const std::string text =
            csv ? flat_csv(smp, title + "; params (s, polar, azimuth); residuals (Im(lambda^3) - c, 0, 0)",
                           [&](std::size_t i) {
                               const cs::Complex l = cs::hl_lambda(value, smp.parameters[i][0]);
                               return std::array<double, 3>{(l * l * l).imag() - value, 0.0, 0.0};
                           })
                : obj_text(smp, embed, false, title + "; embedding " + embed);
        emit(c.out, text);
        return kExitOk;
    }
    if (cfg.family == "hl-torus") {
        const cs::T2Leaf v = t2_constants(c);
        const cs::HLTorusFlat leaf{v.c1, v.c2, v.c3};
        const cs::SampleGrid g = sample_grid(c, {});
        const cs::FlatSample smp = cs::hl_flat_torus(leaf, g.n1, g.n2, g.n3, g.t_min, g.t_max);
        const std::string title = "flat torus example c=" + fmt(leaf.c1) + "," + fmt(leaf.c2) + "," + fmt(leaf.c3);
        const std::string text =
            csv ? flat_csv(smp,
                           title + "; params (theta1, theta2, t); residuals (Im(z1 z2 z3) - c1, |z1|^2 - |z2|^2 - c2, "
                                   "|z1|^2 - |z3|^2 - c3)",
                           [&](std::size_t i) { return cs::hl_torus_residual(smp.points[i], leaf); })
                : obj_text(smp, embed, true, title + "; embedding " + embed);
        emit(c.out, text);
        return kExitOk;
    }
    throw ConfigError("unknown leaf family '" + cfg.family + "' (t2, so3, hl-so3, hl-torus)");
}

// ---------------------------------------------------------------------------
// eval

struct EvalConfig {
    Common common;
    std::string xyuv;
    std::string z;
};

json complex_json(cs::Complex v) { return json::array({v.real(), v.imag()}); }

int cmd_eval(const EvalConfig& cfg) {
    const Common& c = cfg.common;
    validate_common(c);
    if (cfg.xyuv.empty() == cfg.z.empty()) throw ConfigError("give exactly one of --xyuv or --z");
    cs::XyuvPoint w;
    if (!cfg.xyuv.empty()) w = cs::XyuvPoint::from_vector(parse_point4(cfg.xyuv));
    else w = cs::to_xyuv(cs::ZPoint{parse_point4(cfg.z)});
    const cs::ZPoint z = cs::to_z(w);
    const double rsq = w.radius_sq();

    json doc;
    doc["a"] = c.a;
    doc["xyuv"] = json::array({complex_json(w.X), complex_json(w.Y), complex_json(w.U), complex_json(w.V)});
    doc["z"] = json::array();
    for (int k = 0; k < 4; ++k) doc["z"].push_back(complex_json(z.z[k]));
    doc["rsq"] = rsq;
    doc["quadric_residual"] = std::abs(w.quadric());
    // Off the variety only the coordinate data is meaningful; report it and fail.
    const bool on_variety = std::abs(w.quadric()) <= cs::kVarietyTolerance * rsq;
    doc["on_variety"] = on_variety;
    if (!on_variety) {
        emit(c.out, doc.dump(2) + "\n");
        std::cerr << "error: point is off the conifold (|XY - UV| = " << fmt(std::abs(w.quadric())) << ")\n";
        return kExitFail;
    }
    const cs::ResolvedPoint p = cs::lift_to_resolved(w);
    const cs::ResolvedConifold s(c.a);
    const cs::GammaResult gr = cs::solve_gamma(rsq, c.a);
    doc["gamma"] = gr.gamma;
    doc["F_prime"] = cs::f_prime(rsq, c.a);
    doc["F_double_prime"] = cs::f_double_prime(rsq, c.a);
    doc["mu_t2"] = cs::t2_moment(s, p).components;
    doc["mu_so3"] = cs::so3_moment(s, p).components;
    doc["monge_ampere_ratio"] = rsq > 0.0 ? json(cs::monge_ampere_ratio(s, p)) : json(nullptr);
    doc["patch"] = cs::to_string(p.patch());
    doc["local"] = json::array({complex_json(p.local()[0]), complex_json(p.local()[1]), complex_json(p.local()[2])});
    doc["cp1"] = json::array({complex_json(p.cp1().l1), complex_json(p.cp1().l2)});
    emit(c.out, doc.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// cone

struct ConeConfig {
    Common common;
    std::string family;
    std::string radii = "10,100,1000";
};

int cmd_cone(const ConeConfig& cfg) {
    const Common& c = cfg.common;
    validate_common(c);
    if (!c.format.empty() && c.format != "csv") throw ConfigError("cone writes CSV only");
    const auto radii = parse_reals(cfg.radii);
    for (double r : radii)
        if (!(r > 0.0)) throw ConfigError("--radii must be positive");
    std::vector<cs::ConeScanRow> rows;
    std::string title;
    if (cfg.family == "t2") {
        const cs::T2Leaf leaf = t2_constants(c);
        const cs::Branch b = branches(c, false).front();
        rows = cs::t2_cone_scan(cs::ResolvedConifold(c.a), leaf, b, radii);
        title = "t2 leaf a=" + fmt(c.a) + " c=" + fmt(leaf.c1) + "," + fmt(leaf.c2) + "," + fmt(leaf.c3) +
                " branch=" + cs::to_string(b);
    } else if (cfg.family == "so3") {
        const double value = scalar_constant(c, 1.0);
        const cs::Branch b = branches(c, false).front();
        rows = cs::so3_cone_scan({value, b}, radii);
        title = "so3 leaf c=" + fmt(value) + " branch=" + cs::to_string(b) + " (reference |c|/r^2)";
    } else {
        throw ConfigError("unknown cone family '" + cfg.family + "' (t2, so3)");
    }
    std::ostringstream out;
    out << "# cone residual along the " << title << "\n";
    out << "r,rsq,cone_residual,reference,decreasing\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const bool dec = k > 0 && rows[k].residual < rows[k - 1].residual;
        out << fmt(rows[k].r) << ',' << fmt(rows[k].r * rows[k].r) << ',' << fmt(rows[k].residual) << ','
            << fmt(rows[k].reference) << ',' << (k == 0 ? "" : (dec ? "1" : "0")) << '\n';
    }
    emit(c.out, out.str());
    const bool exact = std::all_of(rows.begin(), rows.end(), [](const cs::ConeScanRow& r) { return r.residual < 1e-12; });
    std::cerr << "monotone decay: " << (exact ? "exact cone" : cs::decrease_violations(rows) == 0 ? "yes" : "no") << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Special Lagrangian leaves of the resolved conifold: verification, sampling, export"};
    app.require_subcommand(1);

    VerifyConfig verify;
    auto* v = app.add_subcommand("verify", "run verification suites and write a JSON report");
    add_common(v, verify.common, true);
    v->add_option("--suite", verify.suite,
                  "all|structure|ricci|invariance|moments|t2|so3|calibration|flat|asymptotics|negative")
        ->capture_default_str();
    v->add_option("--tol", verify.common.tol, "Lagrangian/special tolerance for leaf reports");
    v->add_option("--format", verify.common.format, "json");
    v->add_option("--perturb", verify.perturb, "move samples off the leaf by this relative amount");
    v->add_option("--phase", verify.phase, "rotate one holomorphic component of every frame by this angle");

    LeafConfig leaf;
    auto* l = app.add_subcommand("leaf", "sample a leaf and export CSV or OBJ");
    l->add_option("family", leaf.family, "t2 | so3 | hl-so3 | hl-torus")->required();
    add_common(l, leaf.common, true);
    l->add_option("--format", leaf.common.format, "csv | obj");
    l->add_option("--embed", leaf.embed, "OBJ embedding: chart | yr | real:i,j,k");

    EvalConfig eval;
    auto* e = app.add_subcommand("eval", "evaluate the structure at a point");
    add_common(e, eval.common, false);
    e->add_option("--xyuv", eval.xyuv, "X,Y,U,V (complex tokens such as 1, 2-0.5i, i)");
    e->add_option("--z", eval.z, "z0,z1,z2,z3");

    ConeConfig cone;
    auto* k = app.add_subcommand("cone", "cone residual along a leaf at growing radius (CSV)");
    k->add_option("family", cone.family, "t2 | so3")->required();
    add_common(k, cone.common, true);
    k->add_option("--radii", cone.radii, "comma-separated radii r")->capture_default_str();
    k->add_option("--format", cone.common.format, "csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kExitConfig;
    }

    leaf.common.branch_given = l->count("--branch") > 0;

    try {
        if (v->parsed()) return cmd_verify(verify);
        if (l->parsed()) return cmd_leaf(leaf);
        if (e->parsed()) return cmd_eval(eval);
        if (k->parsed()) return cmd_cone(cone);
    } catch (const ConfigError& ex) {
        std::cerr << "configuration error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitFail;
    }
    return kExitConfig;
}
