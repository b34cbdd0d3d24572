#include "hsic/cli.hpp"
#include "hsic/error.hpp"
#include "hsic/report_json.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hsic;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("hsic_cli_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }

    std::string write(const std::string& name, const std::string& content) const {
        const fs::path p = path_ / name;
        std::ofstream(p) << content;
        return p.string();
    }

private:
    fs::path path_;
};

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "hsictest");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string random_csv(int n, int p, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    std::ostringstream s;
    s.precision(17);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) s << (j ? "," : "") << z(gen);
        s << '\n';
    }
    return s.str();
}

}  // namespace

TEST(LoadSample, VectorShape) {
    TempDir dir;
    const Sample s = cli::load_sample(dir.write("a.csv", "0,1\n1,0\n2,2\n"), SampleKind::vector, cli::GridSource::uniform);
    EXPECT_EQ(s.size(), 3);
    EXPECT_EQ(s.dim(), 2);
    EXPECT_EQ(s.kind(), SampleKind::vector);
}

TEST(LoadSample, FunctionalFirstRowGrid) {
    TempDir dir;
    const Sample s = cli::load_sample(dir.write("f.csv", "0,0.5,1\n1,1,1\n"), SampleKind::functional,
                                      cli::GridSource::first_row);
    EXPECT_EQ(s.size(), 1);
    EXPECT_EQ(s.dim(), 3);
    EXPECT_DOUBLE_EQ(s.grid()(1), 0.5);
    EXPECT_TRUE((s.data().array() == 1.0).all());
}

TEST(LoadSample, FunctionalUniformGrid) {
    TempDir dir;
    const Sample s = cli::load_sample(dir.write("f.csv", "1,2,3,4,5\n"), SampleKind::functional,
                                      cli::GridSource::uniform);
    EXPECT_DOUBLE_EQ(s.grid()(1), 0.25);
}

TEST(LoadSample, NonIncreasingGrid) {
    TempDir dir;
    EXPECT_THROW(cli::load_sample(dir.write("g.csv", "0,0.5,0.5\n1,1,1\n"), SampleKind::functional,
                                  cli::GridSource::first_row),
                 InputError);
}

TEST(LoadSample, HeaderAndBlankLines) {
    TempDir dir;
    const Sample s = cli::load_sample(dir.write("h.csv", "a,b\n\n1,2\n \n3,4\n"), SampleKind::vector,
                                      cli::GridSource::uniform, true);
    EXPECT_EQ(s.size(), 2);
    EXPECT_EQ(s.data()(1, 1), 4.0);
}

TEST(ParseCsv, ErrorsNameLineAndColumn) {
    std::istringstream ragged("1,2\n3\n");
    try {
        cli::parse_csv(ragged, "r.csv");
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("r.csv:2"), std::string::npos) << e.what();
    }
    std::istringstream word("1,2\n3,x\n");
    try {
        cli::parse_csv(word, "w.csv");
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("w.csv:2:2"), std::string::npos) << e.what();
    }
    std::istringstream empty("\n\n");
    EXPECT_THROW(cli::parse_csv(empty, "e.csv"), InputError);
}

TEST(Cli, SelfDependenceDetected) {
    TempDir dir;
    const std::string x = dir.write("x.csv", random_csv(12, 3, 1));
    const Outcome o = invoke({"test", "--x", x, "--y", x});
    ASSERT_EQ(o.code, cli::kExitOk) << o.err;
    const Json j = Json::parse(o.out);
    EXPECT_EQ(j["method"], "new");
    EXPECT_LT(j["p_value"].get<double>(), 0.05);
    EXPECT_TRUE(j["reject"].get<bool>());
    for (const char* key : {"n", "statistic", "hsic_estimate", "sigma2_x", "sigma2_y", "detail"})
        EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Cli, ExitCodes) {
    TempDir dir;
    const std::string x = dir.write("x.csv", random_csv(10, 2, 2));
    const std::string y = dir.write("y.csv", random_csv(11, 2, 3));
    const std::string flat = dir.write("c.csv", "1,1\n1,1\n1,1\n1,1\n");
    const std::string x4 = dir.write("x4.csv", random_csv(4, 2, 4));

    EXPECT_EQ(invoke({"test", "--x", x, "--y", y}).code, cli::kExitInput);
    EXPECT_EQ(invoke({"test", "--x", x, "--y", x, "--bogus"}).code, cli::kExitInput);
    EXPECT_EQ(invoke({"test", "--x", x, "--y", x, "--method", "fast"}).code, cli::kExitInput);
    EXPECT_EQ(invoke({"test", "--x", x, "--y", x, "--alpha", "1.5"}).code, cli::kExitInput);
    EXPECT_EQ(invoke({"test", "--x", x, "--y", x, "--width-x", "-2"}).code, cli::kExitInput);
    EXPECT_EQ(invoke({"test", "--x", dir.write("m.csv", "") , "--y", x}).code, cli::kExitInput);
    EXPECT_EQ(invoke({"test", "--x", x4, "--y", flat}).code, cli::kExitDegenerate);
    EXPECT_EQ(invoke({"simulate", "--spec", dir.write("bad.json", "{\"scenarios\": []}")}).code, cli::kExitInput);
    EXPECT_EQ(invoke({"simulate", "--spec", dir.write("bad2.json", "{not json")}).code, cli::kExitInput);
    EXPECT_EQ(invoke({}).code, cli::kExitInput);
    EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
}

TEST(Cli, HelpDocumentsFlags) {
    const Outcome o = invoke({"test", "--help"});
    EXPECT_EQ(o.code, 0);
    for (const char* flag : {"--x", "--y", "--method", "--kind", "--grid", "--width-x", "--width-y", "--perms",
                             "--seed", "--alpha", "--format", "--header", "--threads"})
        EXPECT_NE(o.out.find(flag), std::string::npos) << flag;
    const Outcome sim = invoke({"simulate", "--help"});
    for (const char* flag : {"--spec", "--runs", "--seed", "--threads", "--format"})
        EXPECT_NE(sim.out.find(flag), std::string::npos) << flag;
    EXPECT_NE(invoke({"--help"}).out.find("HSIC_MAX_THREADS"), std::string::npos);
}

TEST(Cli, FormatsAgree) {
    TempDir dir;
    const std::string x = dir.write("x.csv", random_csv(20, 2, 5));
    const std::string y = dir.write("y.csv", random_csv(20, 2, 6));
    const Outcome json = invoke({"test", "--x", x, "--y", y, "--method", "gamma"});
    const Outcome csv = invoke({"test", "--x", x, "--y", y, "--method", "gamma", "--format", "csv"});
    const Outcome text = invoke({"test", "--x", x, "--y", y, "--method", "gamma", "--format", "text"});
    ASSERT_EQ(json.code, 0);
    ASSERT_EQ(csv.code, 0);
    ASSERT_EQ(text.code, 0);
    char p6[40];
    std::snprintf(p6, sizeof p6, "%.6g", Json::parse(json.out)["p_value"].get<double>());
    EXPECT_NE(csv.out.find(p6), std::string::npos) << csv.out;
    EXPECT_NE(text.out.find(p6), std::string::npos) << text.out;
}

TEST(Cli, OutputIndependentOfThreads) {
    TempDir dir;
    const std::string x = dir.write("x.csv", random_csv(25, 3, 7));
    const std::string y = dir.write("y.csv", random_csv(25, 1, 8));
    const Outcome base = invoke({"test", "--x", x, "--y", y, "--method", "perm", "--seed", "9", "--threads", "1"});
    for (const char* t : {"2", "4", "0"}) {
        const Outcome o = invoke({"test", "--x", x, "--y", y, "--method", "perm", "--seed", "9", "--threads", t});
        EXPECT_EQ(o.out, base.out) << t;
    }

    const std::string spec = dir.write("s.json", R"({"runs": 6, "seed": 4, "methods": ["new", "perm"],
        "permutations": 19,
        "scenarios": [{"generator": "sim2_alt", "n": 12, "p": 5, "rho": 0.1, "delta": [0.6, 1.2]}]})");
    const Outcome s1 = invoke({"simulate", "--spec", spec, "--threads", "1"});
    const Outcome s3 = invoke({"simulate", "--spec", spec, "--threads", "3"});
    ASSERT_EQ(s1.code, 0) << s1.err;
    EXPECT_EQ(s1.out, s3.out);
}

TEST(Cli, SimulateOverridesAndCsv) {
    TempDir dir;
    const std::string spec = dir.write("s.json", R"({"runs": 50, "seed": 1,
        "scenarios": [{"generator": "sim2_null", "n": 10, "p": 3, "rho": 0.0},
                      {"generator": "sim2_null", "n": 10, "p": 3, "rho": 0.0}]})");
    const Outcome o = invoke({"simulate", "--spec", spec, "--runs", "1", "--format", "csv"});
    ASSERT_EQ(o.code, 0) << o.err;
    std::istringstream lines(o.out);
    std::string header, row1, row2, are;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row2);
    std::getline(lines, are);
    EXPECT_EQ(header, kStudyCsvHeader);
    EXPECT_EQ(row1, row2);
    EXPECT_TRUE(row1.ends_with(",1,0,0,0") || row1.ends_with(",1,1,0,1")) << row1;
    EXPECT_EQ(are.rfind("# ARE,", 0), 0u);
}

TEST(StudyReport, JsonRoundTrip) {
    StudyReport r;
    r.alpha = 0.1;
    r.master_seed = 18446744073709551557ULL;
    r.variate_version = 1;
    r.are = 12.345678901234567;
    r.rows.push_back({Sim2NullSpec{InnovationModel::t4_scaled, 30, 50, 0.9, 0}, Method::gamma, 100, 3, 0, 0.03});
    r.rows.push_back({Sim2AltSpec{50, 100, 0.1, 0.8, 0}, Method::permutation, 10, 7, 0, 0.7});
    r.rows.push_back({Sim3Spec{LinkFunction::u_cos_u, 15, 30, 501, InnovationModel::chisq1_scaled, 0},
                      Method::new_chi_sq, 3, 1, 1, 1.0 / 3.0});

    const Json first = to_json(r);
    const StudyReport back = study_report_from_json(Json::parse(first.dump()));
    EXPECT_EQ(to_json(back).dump(), first.dump());
    EXPECT_EQ(back.master_seed, r.master_seed);
    EXPECT_EQ(*back.are, *r.are);
    EXPECT_EQ(back.rows[2].empirical_rate, 1.0 / 3.0);
}

TEST(StudySpec, ExpandsListsInKeyOrder) {
    const Json j = Json::parse(R"({"scenarios": [
        {"generator": "sim2_alt", "n": 50, "p": [50, 100], "rho": 0.5, "delta": [0.6, 1.0]}],
        "methods": ["new", "gamma"]})");
    const StudyPlan plan = parse_study_spec(j);
    ASSERT_EQ(plan.entries.size(), 8u);
    // keys in alphabetical order, later keys fastest: delta, then p, then method
    const auto& e1 = std::get<Sim2AltSpec>(plan.entries[1].scenario);
    EXPECT_EQ(plan.entries[1].method, Method::gamma);
    EXPECT_EQ(e1.p, 50);
    const auto& e2 = std::get<Sim2AltSpec>(plan.entries[2].scenario);
    EXPECT_EQ(e2.p, 100);
    EXPECT_EQ(e2.delta, 0.6);
    EXPECT_EQ(std::get<Sim2AltSpec>(plan.entries[4].scenario).delta, 1.0);
}

TEST(StudySpec, Rejections) {
    EXPECT_THROW(parse_study_spec(Json::parse(R"({"scenarios": [{"generator": "sim9"}]})")), InputError);
    EXPECT_THROW(parse_study_spec(Json::parse(R"({"scenarios": [{"generator": "sim3", "m": 1, "n": 5, "k": 3, "q": 1}]})")),
                 InputError);
    EXPECT_THROW(parse_study_spec(Json::parse(R"({"runs": 0, "scenarios": [{"generator": "sim3", "m": 1, "n": 5, "k": 3}]})")),
                 InputError);
    EXPECT_THROW(parse_study_spec(Json::parse(R"({"extra": 1, "scenarios": [{"generator": "sim3", "m": 1, "n": 5, "k": 3}]})")),
                 InputError);
    EXPECT_THROW(parse_study_spec(Json::parse(R"({"scenarios": [{"generator": "sim3", "m": [], "n": 5, "k": 3}]})")),
                 InputError);
}

TEST(ResultJson, DetailPerMethod) {
    TestResult r;
    r.method = Method::new_chi_sq;
    r.statistic = 2.0;
    r.n = 4;
    r.detail = NewDetail{ChiSqMatch{0.5, 2.0, 8.0}, std::nullopt};
    const Json j = to_json(r);
    EXPECT_EQ(j["hsic_estimate"], 0.5);
    EXPECT_EQ(j["detail"]["fallback"], false);
    EXPECT_DOUBLE_EQ(j["detail"]["skewness"].get<double>(), 1.0);

    r.method = Method::permutation;
    r.detail = PermutationDetail{200, 3, 77};
    EXPECT_EQ(to_json(r)["detail"]["exceed_count"], 3);
}
