#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "conifold_slag/suites.hpp"
#include "conifold_slag/verify_engine.hpp"

using namespace conifold_slag;

namespace {

const double kKappa = std::sqrt(2.0 / 3.0);  // sqrt(det h) with det h = 2/3

TangentFrame<Vec3c> real_frame() {
    const Vec3c p(0.3, -1.0, 2.0);
    return {p, {Vec3c::Unit(0), Vec3c::Unit(1), Vec3c::Unit(2)}};
}

ResolvedSample generic_t2_sample(double a) {
    return t2_leaf_sample(ResolvedConifold(a), {0.3, 0.1, 0.2}, 4, 4, 6, -2.0, 2.0);
}

}  // namespace

TEST(FrameChecks, RealPlaneIsSpecialLagrangian) {
    const FlatC3 s;
    const auto f = real_frame();
    EXPECT_EQ(lagrangian_residual(s, f), 0.0);
    EXPECT_EQ(special_residual(s, f), 0.0);
    EXPECT_EQ(frame_phase(s, f), 0.0);
    EXPECT_NEAR(calibration_ratio(s, f), 1.0, 1e-15);
}

TEST(FrameChecks, ComplexLineIsNotLagrangian) {
    const FlatC3 s;
    auto f = real_frame();
    f.v[2] = kI * f.v[0];
    EXPECT_NEAR(lagrangian_residual(s, f), 1.0, 1e-15);
}

TEST(FrameChecks, PhaseRotationShowsInSpecialResidual) {
    const FlatC3 s;
    auto f = real_frame();
    for (auto& v : f.v) v[0] *= std::polar(1.0, std::numbers::pi / 6.0);
    EXPECT_NEAR(special_residual(s, f), 0.5, 1e-15);
}

TEST(FrameChecks, ParallelFrameIsRankDeficient) {
    const FlatC3 s;
    auto f = real_frame();
    f.v[2] = 2.0 * f.v[1];
    EXPECT_LT(frame_rank_measure(f), kRankThreshold);
    EXPECT_THROW(special_residual(s, f), ZeroVolumeForm);
}

TEST(FrameChecks, T2LeafFramesAreSpecialLagrangian) {
    for (double a : {0.0, 1.0}) {
        const ResolvedConifold s(a);
        const ResolvedSample smp = generic_t2_sample(a);
        for (const ResolvedFrame& f : smp.frames) {
            EXPECT_LT(lagrangian_residual(s, f), 1e-8);
            EXPECT_LT(special_residual(s, f), 1e-8);
            EXPECT_NEAR(calibration_ratio(s, f), kKappa, 1e-8);
        }
    }
}

TEST(FrameChecks, BrokenT2FrameIsCaught) {
    const ResolvedConifold s(1.0);
    ResolvedFrame f = generic_t2_sample(1.0).frames[5];
    f.v[2] = kI * f.v[0];
    EXPECT_GT(lagrangian_residual(s, f), 0.5);
}

TEST(Invariance, IdentityIsExact) {
    std::mt19937_64 rng(1);
    const ResolvedConifold s(1.0);
    std::vector<ResolvedFrame> frames;
    for (int k = 0; k < 10; ++k) frames.push_back(random_frame(rng, random_resolved_point(rng, 1e-2)));
    const GroupElement id = conjugate_action(Mat4::Identity());
    for (InvariantForm form : {InvariantForm::Metric, InvariantForm::Kahler, InvariantForm::HoloVol,
                               InvariantForm::AlphaRC, InvariantForm::AlphaPM})
        EXPECT_LT(invariance_residual(s, form, id, frames), 1e-15) << to_string(form);
}

TEST(Invariance, RandomSo4Elements) {
    std::mt19937_64 rng(2);
    for (double a : {0.0, 1.0}) {
        const ResolvedConifold s(a);
        std::vector<ResolvedFrame> frames;
        for (int k = 0; k < 20; ++k) frames.push_back(random_frame(rng, random_resolved_point(rng, 1e-2)));
        for (int k = 0; k < 20; ++k) {
            const GroupElement g = conjugate_action(random_so4(rng));
            for (InvariantForm form :
                 {InvariantForm::Metric, InvariantForm::Kahler, InvariantForm::HoloVol, InvariantForm::AlphaRC})
                EXPECT_LT(invariance_residual(s, form, g, frames), 1e-9) << to_string(form);
        }
    }
}

// alpha_pm is a connection form on the bolt sphere: torus invariant only.
TEST(Invariance, AlphaPmTorusOnly) {
    std::mt19937_64 rng(3);
    const ResolvedConifold s(1.0);
    std::vector<ResolvedFrame> frames;
    for (int k = 0; k < 20; ++k) frames.push_back(random_frame(rng, random_resolved_point(rng, 1e-2)));
    EXPECT_LT(invariance_residual(s, InvariantForm::AlphaPM, torus_element(0.7, -1.9), frames), 1e-12);
    EXPECT_GT(invariance_residual(s, InvariantForm::AlphaPM, conjugate_action(random_so4(rng)), frames), 1e-3);
}

TEST(Report, GenericLeafPasses) {
    const ResolvedConifold s(1.0);
    const VerificationReport rep = run_report(s, generic_t2_sample(1.0), {}, ConeFamily::T2);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.rows.size(), 96u);
    EXPECT_EQ(rep.degenerate, 0u);
    EXPECT_EQ(rep.lagrangian.count, 96u);
    EXPECT_NEAR(rep.kappa, kKappa, 1e-9);
    EXPECT_LT(rep.calibration_spread, 1e-6);
    EXPECT_TRUE(rep.rows[0].cone.has_value());
    EXPECT_NEAR(std::abs(std::cos(rep.phase)), 1.0, 1e-8);
}

TEST(Report, DegenerateRowsExcluded) {
    const ResolvedConifold s(1.0);
    ResolvedSample smp = generic_t2_sample(1.0);
    smp.frames[3].v[2] = smp.frames[3].v[1];
    smp.degenerate[7] = true;
    const VerificationReport rep = run_report(s, smp);
    EXPECT_EQ(rep.degenerate, 2u);
    EXPECT_TRUE(rep.rows[3].degenerate);
    EXPECT_TRUE(rep.passed);
}

TEST(Report, EmptySampleFails) {
    EXPECT_FALSE(run_report(FlatC3{}, FlatSample{}).passed);
}

TEST(Report, ConeToleranceApplies) {
    const ResolvedConifold s(1.0);
    Tolerances tol;
    tol.cone = 1e-6;
    EXPECT_FALSE(run_report(s, generic_t2_sample(1.0), tol, ConeFamily::T2).passed);
}

TEST(NegativeControls, PerturbationIsRejected) {
    const ResolvedConifold s(1.0);
    const ResolvedSample smp = generic_t2_sample(1.0);
    const VerificationReport rep = run_report(s, perturb_sample(smp, 1e-3, 42));
    EXPECT_FALSE(rep.passed);
    EXPECT_GT(std::max(rep.lagrangian.max, rep.special.max), 1e-3);
}

TEST(NegativeControls, PerturbationIsSeeded) {
    const ResolvedSample smp = generic_t2_sample(1.0);
    const ResolvedSample a = perturb_sample(smp, 1e-3, 9), b = perturb_sample(smp, 1e-3, 9);
    const ResolvedSample c = perturb_sample(smp, 1e-3, 10);
    EXPECT_EQ(a.frames[4].v[1], b.frames[4].v[1]);
    EXPECT_NE(a.frames[4].v[1], c.frames[4].v[1]);
}

TEST(NegativeControls, WrongPhaseIsRejected) {
    const ResolvedConifold s(0.0);
    const VerificationReport rep = run_report(s, rotate_phase(generic_t2_sample(0.0), std::numbers::pi / 6.0));
    EXPECT_FALSE(rep.passed);
    EXPECT_GT(rep.special.max, 1e-3);
}

TEST(Parallelism, ThreadCountDoesNotChangeResults) {
    const ResolvedConifold s(1.0);
    const ResolvedSample smp = generic_t2_sample(1.0);
    ::setenv("CONIFOLD_SLAG_THREADS", "1", 1);
    const VerificationReport one = run_report(s, smp);
    ::setenv("CONIFOLD_SLAG_THREADS", "4", 1);
    const VerificationReport four = run_report(s, smp);
    ::unsetenv("CONIFOLD_SLAG_THREADS");
    for (std::size_t i = 0; i < smp.size(); ++i) {
        EXPECT_EQ(one.rows[i].lagrangian, four.rows[i].lagrangian);
        EXPECT_EQ(one.rows[i].calibration, four.rows[i].calibration);
    }
}
