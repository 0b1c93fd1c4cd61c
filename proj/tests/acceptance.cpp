// Acceptance gates: one PASS/FAIL line per criterion. Criteria whose outcome
// depends on the resolution parameter are reported separately for the cone
// (a = 0) and the resolved conifold (a = 1).

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "conifold_slag/suites.hpp"

using namespace conifold_slag;

namespace {

constexpr std::uint64_t kSeed = 42;
constexpr double kTimeBudget = 60.0;  // seconds per suite

struct Gate {
    std::string id;
    std::string title;
    std::function<std::vector<SuiteResult>()> run;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string describe(const std::vector<SuiteResult>& results, bool failures_only) {
    std::ostringstream out;
    bool first = true;
    for (const SuiteResult& r : results) {
        for (const Check& c : r.checks) {
            if (failures_only && c.passed) continue;
            out << (first ? "" : "; ") << r.suite;
            if (r.suite != "structure" && r.suite != "flat") out << "(a=" << r.a << ")";
            out << " " << c.name << " = " << fmt(c.value)
                << (c.kind == Check::Kind::AtMost ? " <= " : " >= ") << fmt(c.threshold);
            first = false;
        }
    }
    return out.str();
}

int cli_exit(const std::string& args) {
    const std::string cmd = std::string(CONIFOLD_SLAG_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

SuiteResult cli_negative_controls() {
    SuiteResult out{"cli", 1.0, {}};
    const int perturbed = cli_exit("verify --suite t2 --c 0.3,0.1,0.2 --a 1 --perturb 1e-3");
    const int phased = cli_exit("verify --suite t2 --c 0.3,0.1,0.2 --a 1 --phase 0.5235987755982988");
    out.add(Check::at_least("exit code with --perturb 1e-3", perturbed, 1.0));
    out.add(Check::at_least("exit code with --phase pi/6", phased, 1.0));
    return out;
}

}  // namespace

int main() {
    const std::vector<Gate> gates{
        {"1", "structure identities, radial profile", [] { return std::vector{structure_suite(kSeed)}; }},
        {"2", "Ricci-flat certificate, a in {0, 0.5, 1, 2}",
         [] {
             return std::vector{ricci_suite(0.0, kSeed), ricci_suite(0.5, kSeed), ricci_suite(1.0, kSeed),
                                ricci_suite(2.0, kSeed)};
         }},
        {"3", "SO(4) invariance and patch overlap",
         [] { return std::vector{invariance_suite(0.0, kSeed), invariance_suite(1.0, kSeed)}; }},
        {"4 (a=0)", "moment maps", [] { return std::vector{moment_suite(0.0, kSeed)}; }},
        {"4 (a=1)", "moment maps", [] { return std::vector{moment_suite(1.0, kSeed)}; }},
        {"5", "T^2 family", [] { return std::vector{t2_suite(0.0, kSeed), t2_suite(1.0, kSeed)}; }},
        {"6 (a=0)", "SO(3) family, c in {0.5, 1, 2}", [] { return std::vector{so3_suite(0.0)}; }},
        {"6 (a=1)", "SO(3) family, c in {0.5, 1, 2}", [] { return std::vector{so3_suite(1.0)}; }},
        {"7 (a=0)", "calibration constancy", [] { return std::vector{calibration_suite(0.0)}; }},
        {"7 (a=1)", "calibration constancy", [] { return std::vector{calibration_suite(1.0)}; }},
        {"8", "flat C^3 oracle", [] { return std::vector{flat_suite()}; }},
        {"9", "asymptotic cones and profile", [] { return std::vector{asymptotics_suite(1.0)}; }},
        {"10", "negative controls",
         [] { return std::vector{negative_suite(0.0, kSeed), negative_suite(1.0, kSeed), cli_negative_controls()}; }},
    };

    int failed = 0;
    for (const Gate& g : gates) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<SuiteResult> results;
        std::string error;
        try {
            results = g.run();
        } catch (const std::exception& ex) {
            error = ex.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool ok = error.empty() && secs < kTimeBudget;
        for (const SuiteResult& r : results) ok = ok && r.passed();
        std::string detail = !error.empty() ? "error: " + error : describe(results, !ok);
        if (secs >= kTimeBudget) detail += "; exceeded time budget";
        std::printf("%s criterion %s: %s [%.2fs] -- %s\n", ok ? "PASS" : "FAIL", g.id.c_str(), g.title.c_str(), secs,
                    detail.c_str());
        failed += ok ? 0 : 1;
    }
    std::printf("%d of %zu acceptance lines failed\n", failed, gates.size());
    return failed == 0 ? 0 : 1;
}
