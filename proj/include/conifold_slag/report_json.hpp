#pragma once

// JSON form of verification reports (nlohmann/json).

#include <cstdint>
#include <string>

#include "json.hpp"

#include "conifold_slag/verify_engine.hpp"

namespace conifold_slag {

inline nlohmann::ordered_json to_json(const ColumnSummary& c) {
    return {{"max", c.max}, {"mean", c.mean}, {"stddev", c.stddev}, {"count", c.count}};
}

inline nlohmann::ordered_json to_json(const Tolerances& t) {
    nlohmann::ordered_json j{{"lagrangian", t.lagrangian},
                             {"special", t.special},
                             {"calibration_spread", t.calibration_spread}};
    j["cone"] = t.cone ? nlohmann::ordered_json(*t.cone) : nlohmann::ordered_json(nullptr);
    return j;
}

inline nlohmann::ordered_json to_json(const SampleRow& r) {
    nlohmann::ordered_json j{{"index", r.index},
                             {"degenerate", r.degenerate},
                             {"lagrangian", r.lagrangian},
                             {"special", r.special},
                             {"calibration", r.calibration},
                             {"phase", r.phase}};
    j["cone"] = r.cone ? nlohmann::ordered_json(*r.cone) : nlohmann::ordered_json(nullptr);
    return j;
}

/// Context carried alongside a report: what was sampled and how.
struct ReportContext {
    std::string structure = "resolved_conifold";
    double a = 0.0;
    std::string family;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::uint64_t seed = 0;
};

inline nlohmann::ordered_json to_json(const VerificationReport& rep, const ReportContext& ctx, bool with_rows = true) {
    nlohmann::ordered_json j;
    j["structure"] = {{"name", ctx.structure}, {"a", ctx.a}};
    j["family"] = ctx.family;
    j["parameters"] = ctx.parameters;
    j["seed"] = ctx.seed;
    j["tolerances"] = to_json(rep.tolerances);
    j["summary"] = {{"lagrangian", to_json(rep.lagrangian)},
                    {"special", to_json(rep.special)},
                    {"calibration", to_json(rep.calibration)},
                    {"cone", to_json(rep.cone)},
                    {"kappa", rep.kappa},
                    {"calibration_spread", rep.calibration_spread},
                    {"phase", rep.phase},
                    {"degenerate", rep.degenerate}};
    j["passed"] = rep.passed;
    if (with_rows) {
        j["rows"] = nlohmann::ordered_json::array();
        for (const SampleRow& r : rep.rows) j["rows"].push_back(to_json(r));
    }
    return j;
}

}  // namespace conifold_slag
