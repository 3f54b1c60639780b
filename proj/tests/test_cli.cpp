#include <gtest/gtest.h>

#include <sstream>

#include "mmcf/cli.hpp"
#include "mmcf/report.hpp"
#include "support.hpp"

using namespace mmcf;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "mmcf");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const std::vector<std::string> kOneEpoch = {"--vision-epochs", "1", "--tactile-epochs", "1", "--proprio-epochs", "1",
                                            "--mid-epochs",    "1", "--sensor-epochs",  "1"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST(Cli, HelpSucceeds) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    for (const char* sub : {"gen", "sync", "train", "eval", "compare", "inspect"}) {
        EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
    }
    EXPECT_EQ(run({"compare", "--help"}).code, 0);
}

TEST(Cli, UsageErrorsReturnOne) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"gen"}).code, 1);
    EXPECT_EQ(run({"gen", "--out", "x", "--image-size", "48"}).code, 1);
    EXPECT_EQ(run({"compare", "--out", "x", "--runs", "0"}).code, 1);
    EXPECT_EQ(run({"train", "--modality", "tactile", "--loss", "hinge"}).code, 1);
    const auto r = run({"eval", "--method", "tactile", "--jobs", "-3"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, RuntimeErrorsReturnTwo) {
    test::TempDir dir;
    EXPECT_EQ(run({"inspect", "--data", (dir / "missing").string()}).code, 2);
    EXPECT_EQ(run({"train", "--modality", "resnet", "--episodes-per-class", "2"}).code, 2);
    EXPECT_EQ(run({"eval", "--method", "bagging"}).code, 2);
}

TEST(Cli, GenSyncInspectTrainEval) {
    test::TempDir dir;
    const std::string data = (dir / "data").string();
    auto r = run({"gen", "--out", data, "--episodes-per-class", "3", "--image-size", "32", "--seed", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("wrote 21 episodes"), std::string::npos);

    r = run({"gen", "--out", data});
    EXPECT_EQ(r.code, 2);

    r = run({"sync", "--data", data});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "data" / "synced.csv"));

    r = run({"inspect", "--data", data});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("CanFull"), std::string::npos);
    EXPECT_NE(r.out.find("largest offset"), std::string::npos);

    const std::string model = (dir / "model").string();
    r = run({"train", "--data", data, "--modality", "tactile", "--epochs", "2", "--image-size", "32", "--out", model});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "model" / "weights.bin"));
    EXPECT_TRUE(std::filesystem::exists(dir / "model" / "model.json"));

    r = run(with({"train", "--data", data, "--modality", "mid_fusion", "--image-size", "32"}, kOneEpoch));
    ASSERT_EQ(r.code, 0) << r.err;

    const std::string report = (dir / "eval").string();
    r = run({"eval", "--data", data, "--method", "soft_voting", "--runs", "2", "--image-size", "32", "--out", report,
             "--vision-epochs", "1", "--tactile-epochs", "1", "--proprio-epochs", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_table1(dir / "eval" / "table1.csv");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].runs, 2u);
}

TEST(Cli, CompareInMemoryIsReproducible) {
    test::TempDir dir;
    const std::vector<std::string> base = with({"compare", "--episodes-per-class", "3", "--frame-size", "32",
                                                "--image-size", "32", "--runs", "2", "--seed", "5"},
                                               kOneEpoch);
    const auto a = run(with(base, {"--out", (dir / "a").string()}));
    ASSERT_EQ(a.code, 0) << a.err;
    const auto b = run(with(base, {"--out", (dir / "b").string(), "--jobs", "2"}));
    ASSERT_EQ(b.code, 0) << b.err;
    const auto files = test::list_files(dir / "a");
    EXPECT_EQ(files, test::list_files(dir / "b"));
    EXPECT_EQ(files.size(), 3u + 2 * 7 * 2);
    for (const auto& f : files) EXPECT_EQ(test::slurp(dir / "a" / f), test::slurp(dir / "b" / f)) << f;
}
