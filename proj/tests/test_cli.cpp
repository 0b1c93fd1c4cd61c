#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("conifold_slag_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    Result run(const std::string& args, const std::string& env = "") const {
        const fs::path out = dir_ / "stdout.txt";
        const std::string cmd = env + " " + CONIFOLD_SLAG_CLI + " " + args + " > " + out.string() + " 2>/dev/null";
        const int status = std::system(cmd.c_str());
        Result r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        return r;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("verify --no-such-flag").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("verify --suite nope").code, 2);
    EXPECT_EQ(run("leaf t2 --grid 2,x,3").code, 2);
    EXPECT_EQ(run("leaf t2 --branch sideways").code, 2);
    EXPECT_EQ(run("eval --xyuv 1,2,3").code, 2);
    EXPECT_EQ(run("eval --xyuv 1,1,1,1 --z 1,0,0,0").code, 2);
}

TEST_F(Cli, EvalRadius) {
    const Result r = run("eval --xyuv 1,1,1,1 --a 1");
    ASSERT_EQ(r.code, 0);
    const json j = json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["rsq"].get<double>(), 4.0);
    EXPECT_NEAR(j["gamma"].get<double>(), 2 * std::sqrt(3.0) - 2, 1e-14);
    EXPECT_NEAR(j["monge_ampere_ratio"].get<double>(), 4.0 / 9.0, 1e-12);
    EXPECT_EQ(j["patch"], "H+");
}

TEST_F(Cli, EvalSo3BasePoint) {
    const json cone = json::parse(run("eval --xyuv 0,1,0,0 --a 0").out);
    for (double m : cone["mu_so3"].get<std::vector<double>>()) EXPECT_EQ(m, 0.0);
    // The bolt term of the equivariant map: (-a^2, 0, 0).
    const json resolved = json::parse(run("eval --xyuv 0,1,0,0 --a 1").out);
    EXPECT_NEAR(resolved["mu_so3"][0].get<double>(), -1.0, 1e-13);
}

TEST_F(Cli, EvalComplexTokens) {
    const Result r = run("eval --z 1,i,0,0 --a 0");
    ASSERT_EQ(r.code, 0);
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["xyuv"][0][0].get<double>(), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(run("eval --xyuv 1-2i,2.5e-1+i,-i,0 --a 1").code, 1);  // parses, off the quadric
}

TEST_F(Cli, EvalOffVarietyReportsCoordinates) {
    const Result r = run("eval --z 1,0,0,0 --a 0");
    EXPECT_EQ(r.code, 1);
    const json j = json::parse(r.out);
    EXPECT_FALSE(j["on_variety"].get<bool>());
    EXPECT_NEAR(j["xyuv"][0][0].get<double>(), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(j["xyuv"][1][0].get<double>(), std::sqrt(0.5), 1e-15);
    EXPECT_EQ(j["xyuv"][2][0].get<double>(), 0.0);
}

TEST_F(Cli, VerifyFlat) {
    const Result r = run("verify --suite flat --out " + path("flat.json").string());
    EXPECT_EQ(r.code, 0);
    const json j = json::parse(slurp(path("flat.json")));
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_EQ(j["suites"].size(), 1u);
    EXPECT_EQ(j["suites"][0]["suite"], "flat");
}

TEST_F(Cli, VerifyLeafReport) {
    const Result r = run("verify --suite t2 --c1 0.3 --c2 0.1 --c3 0.2 --a 1");
    EXPECT_EQ(r.code, 0);
    const json j = json::parse(r.out);
    ASSERT_EQ(j["reports"].size(), 1u);
    const json& rep = j["reports"][0];
    EXPECT_EQ(rep["family"], "t2");
    EXPECT_LT(rep["summary"]["lagrangian"]["max"].get<double>(), 1e-8);
    EXPECT_LT(rep["summary"]["special"]["max"].get<double>(), 1e-8);
    EXPECT_NEAR(rep["summary"]["kappa"].get<double>(), std::sqrt(2.0 / 3.0), 1e-9);
    EXPECT_EQ(rep["rows"].size(), 160u);
}

TEST_F(Cli, VerifyAllAtZeroA) {
    EXPECT_EQ(run("verify --suite all --a 0 --seed 42").code, 0);
}

// The SO(3) family is not Lagrangian for a > 0 (see README).
TEST_F(Cli, VerifyAllAtPositiveAReportsSo3Failure) {
    const Result r = run("verify --suite all --a 1.0 --seed 42");
    EXPECT_EQ(r.code, 1);
    const json j = json::parse(r.out);
    EXPECT_FALSE(j["passed"].get<bool>());
    for (const json& s : j["suites"])
        if (s["suite"] == "t2" || s["suite"] == "structure" || s["suite"] == "flat") EXPECT_TRUE(s["passed"].get<bool>());
}

TEST_F(Cli, NegativeControlsExitNonzero) {
    const Result p = run("verify --suite t2 --c 0.3,0.1,0.2 --a 1 --perturb 1e-3");
    EXPECT_EQ(p.code, 1);
    EXPECT_GT(json::parse(p.out)["reports"][0]["summary"]["lagrangian"]["max"].get<double>(), 1e-3);
    const Result w = run("verify --suite t2 --c 0.3,0.1,0.2 --a 1 --phase 0.5235987755982988");
    EXPECT_EQ(w.code, 1);
    EXPECT_NEAR(json::parse(w.out)["reports"][0]["summary"]["special"]["max"].get<double>(), 0.5, 1e-6);
}

TEST_F(Cli, LeafCsvIsDeterministic) {
    ASSERT_EQ(run("leaf t2 --c 0.3,0.1,0.2 --a 1 --grid 3,3,6 --out " + path("a.csv").string(),
                  "CONIFOLD_SLAG_THREADS=1").code,
              0);
    ASSERT_EQ(run("leaf t2 --c 0.3,0.1,0.2 --a 1 --grid 3,3,6 --out " + path("b.csv").string(),
                  "CONIFOLD_SLAG_THREADS=3").code,
              0);
    const std::string a = slurp(path("a.csv"));
    EXPECT_EQ(a, slurp(path("b.csv")));
    std::istringstream in(a);
    std::string comment, header, row;
    std::getline(in, comment);
    std::getline(in, header);
    EXPECT_EQ(comment[0], '#');
    EXPECT_EQ(header.rfind("ReX,ImX,ReY,ImY,ReU,ImU,ReV,ImV,Relambda_plus,Imlambda_plus,rsq,", 0), 0u);
    int rows = 0;
    while (std::getline(in, row)) ++rows;
    EXPECT_EQ(rows, 54);
}

TEST_F(Cli, LeafObjHasOnlyVerticesAndFaces) {
    ASSERT_EQ(run("leaf t2 --c 0,0,0 --a 0 --format obj --grid 4,2,4 --out " + path("cone.obj").string()).code, 0);
    std::istringstream in(slurp(path("cone.obj")));
    std::string line;
    int v = 0, f = 0;
    while (std::getline(in, line)) {
        ASSERT_TRUE(line.rfind("v ", 0) == 0 || line.rfind("f ", 0) == 0) << line;
        (line[0] == 'v' ? v : f)++;
    }
    EXPECT_EQ(v, 32);
    EXPECT_EQ(f, 2 * 4 * 2 * 3);  // axis 0 wraps
}

TEST_F(Cli, LeafSo3BothBranchesWritesTwoFiles) {
    ASSERT_EQ(run("leaf so3 --c 1 --branch both --a 1 --format obj --out " + path("so3.obj").string()).code, 0);
    EXPECT_TRUE(fs::exists(path("so3_plus.obj")));
    EXPECT_TRUE(fs::exists(path("so3_minus.obj")));
    EXPECT_FALSE(fs::exists(path("so3.obj")));
}

TEST_F(Cli, LeafSo3ConeHasTwoComponents) {
    ASSERT_EQ(run("leaf so3 --c 0 --a 0 --out " + path("cone.csv").string()).code, 0);
    EXPECT_TRUE(fs::exists(path("cone_plus.csv")));
    EXPECT_TRUE(fs::exists(path("cone_minus.csv")));
}

TEST_F(Cli, FailedLeafLeavesNoFile) {
    // An odd grid puts a node on the cone vertex.
    EXPECT_EQ(run("leaf t2 --c 0,0,0 --a 0 --grid 2,2,3 --out " + path("bad.csv").string()).code, 1);
    for (const auto& e : fs::directory_iterator(dir_)) EXPECT_EQ(e.path().filename().string().find("bad"), std::string::npos);
}

TEST_F(Cli, ConeScans) {
    const Result t2 = run("cone t2 --c 0.3,0.1,0.2 --a 1 --radii 10,100,1000");
    ASSERT_EQ(t2.code, 0);
    EXPECT_NE(t2.out.find("r,rsq,cone_residual,reference,decreasing"), std::string::npos);
    EXPECT_NE(t2.out.find("\n100,10000,"), std::string::npos);
    EXPECT_EQ(run("cone t2 --c 0,0,0 --a 0").code, 0);
    EXPECT_EQ(run("cone so3 --c 1 --radii 0,1").code, 2);
}
