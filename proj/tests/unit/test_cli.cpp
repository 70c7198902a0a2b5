#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

#ifndef LEDGER_EMD_CLI
#error "LEDGER_EMD_CLI must name the ledger-emd executable"
#endif

namespace fs = std::filesystem;
using namespace ledger_emd;

namespace {

struct RunResult {
  int exit_code;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("ledger_emd_cli_" + std::string(info->name()) + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name), std::ios::binary) << content;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  RunResult run(const std::string& args) const {
    const std::string err = path("stderr.txt");
    const std::string cmd = std::string("\"") + LEDGER_EMD_CLI + "\" " + args + " > \"" + path("stdout.txt") +
                            "\" 2> \"" + err + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read("stderr.txt")};
  }

  void write_three_node_fixture() const {
    write("chart.json", R"({"nodes": [
      {"code": "r", "name": "Root", "parent": null, "side": "active"},
      {"code": "A", "name": "A", "parent": "r", "side": "active"},
      {"code": "B", "name": "B", "parent": "r", "side": "active"},
      {"code": "P", "name": "Equity", "parent": null, "side": "passive"}
    ]})");
    write("tb.csv",
          "company_id,account_code,value\n"
          "x,A,100\nx,P,-100\n"
          "y,B,250\ny,P,-250\n"
          "z,A,40\nz,P,-40\n");
  }

  fs::path dir_;
};

DistanceMatrix read_matrix(const std::string& text) {
  std::istringstream in(text);
  return read_distance_matrix(in);
}

}  // namespace

TEST_F(CliTest, DistancesOnHandFixture) {
  write_three_node_fixture();
  const auto r = run("distances --chart " + path("chart.json") + " --balances " + path("tb.csv") +
                     " --metric emd -o " + path("d.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto d = read_matrix(read("d.csv"));
  EXPECT_EQ(d.company_ids(), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_DOUBLE_EQ(d(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(d(0, 2), 0.0);
  EXPECT_TRUE(fs::exists(path("d.csv.manifest.json")));

  const auto manifest = nlohmann::json::parse(read("d.csv.manifest.json"));
  EXPECT_EQ(manifest["subcommand"], "distances");
  EXPECT_EQ(manifest["inputs"]["chart"]["file"], "chart.json");
  EXPECT_EQ(manifest["inputs"]["chart"]["sha256"].get<std::string>().size(), 64u);
}

TEST_F(CliTest, BaselineMetrics) {
  write_three_node_fixture();
  for (const std::string metric : {"ygdm", "sbsd"}) {
    const auto r = run("distances --chart " + path("chart.json") + " --balances " + path("tb.csv") + " --metric " +
                       metric + " -o " + path(metric + ".csv"));
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }
  EXPECT_DOUBLE_EQ(read_matrix(read("sbsd.csv"))(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(read_matrix(read("ygdm.csv"))(0, 1), 1.0);

  auto r = run("distances --chart " + path("chart.json") + " --balances " + path("tb.csv") +
               " --metric random -o " + path("rnd.csv"));
  EXPECT_EQ(r.exit_code, 1);
  r = run("distances --chart " + path("chart.json") + " --balances " + path("tb.csv") +
          " --metric random --seed 4 -o " + path("rnd.csv"));
  EXPECT_EQ(r.exit_code, 0) << r.err;
}

TEST_F(CliTest, ExplainWritesFlows) {
  write_three_node_fixture();
  auto r = run("explain --chart " + path("chart.json") + " --balances " + path("tb.csv") + " --pair x,y -o " +
               path("f.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto doc = nlohmann::json::parse(read("f.json"));
  EXPECT_DOUBLE_EQ(doc["distance"].get<double>(), 2.0);
  EXPECT_EQ(doc["subtrees"].size(), 4u);

  r = run("explain --chart " + path("chart.json") + " --balances " + path("tb.csv") + " --pair x,nobody -o " +
          path("f2.json"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("nobody"), std::string::npos) << r.err;
}

TEST_F(CliTest, UsageErrorsExitOne) {
  auto r = run("");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.err.rfind("ledger-emd: error[E_USAGE]: ", 0), 0u) << r.err;
  r = run("distances --chart only.json");
  EXPECT_EQ(r.exit_code, 1);
  r = run("frobnicate");
  EXPECT_EQ(r.exit_code, 1);
  r = run("synth --out-dir " + path("s"));  // missing --seed
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingInputNamesThePath) {
  write_three_node_fixture();
  const auto missing = path("absent.csv");
  const auto r = run("distances --chart " + path("chart.json") + " --balances " + missing + " --metric emd -o " + path("d.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
  EXPECT_EQ(r.err.rfind("ledger-emd: error[", 0), 0u);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_FALSE(fs::exists(path("d.csv")));
}

TEST_F(CliTest, InvalidInputsExitOne) {
  write_three_node_fixture();
  write("bad.csv", "company_id,account_code,value\nx,NOPE,1\n");
  auto r = run("distances --chart " + path("chart.json") + " --balances " + path("bad.csv") + " --metric emd -o " +
               path("d.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("NOPE"), std::string::npos) << r.err;

  write("broken.json", "{\"nodes\": [");
  r = run("distances --chart " + path("broken.json") + " --balances " + path("tb.csv") + " --metric emd -o " + path("d.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("broken.json"), std::string::npos) << r.err;

  // Perplexity must be below n - 1 = 2.
  r = run("distances --chart " + path("chart.json") + " --balances " + path("tb.csv") + " --metric emd -o " + path("d.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run("embed --distances " + path("d.csv") + " --seed 1 --perplexity 5 -o " + path("e.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("perplexity"), std::string::npos) << r.err;

  // LOF with k = 5 needs more than 5 companies.
  r = run("outliers --distances " + path("d.csv") + " -o " + path("lof.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("E_TOO_SMALL"), std::string::npos) << r.err;
}

TEST_F(CliTest, OutputErrorsExitOne) {
  write_three_node_fixture();
  // Writing below a regular file is an I/O error on the caller's side.
  const auto r = run("distances --chart " + path("chart.json") + " --balances " + path("tb.csv") + " --metric emd -o " +
                     path("tb.csv") + "/nested/d.csv");
  EXPECT_EQ(r.exit_code, 1) << r.err;
  EXPECT_EQ(r.err.rfind("ledger-emd: error[E_IO]: ", 0), 0u) << r.err;
}

TEST_F(CliTest, NumericalFailureExitsTwo) {
  auto r = run("synth --seed 1 --companies 20 --industries 2 --chart-depth 2 --out-dir " + path("data"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run("distances --chart " + path("data/chart.json") + " --balances " + path("data/balances.csv") + " --metric emd -o " +
          path("d.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  // A step size near the largest double overflows the layout.
  r = run("embed --distances " + path("d.csv") + " --perplexity 5 --learning-rate 1e300 --seed 1 -o " +
          path("e.csv"));
  EXPECT_EQ(r.exit_code, 2) << r.err;
  EXPECT_EQ(r.err.rfind("ledger-emd: error[E_DIVERGED]: ", 0), 0u) << r.err;
}

TEST_F(CliTest, SmallPipeline) {
  auto r = run("synth --seed 3 --companies 40 --industries 4 --chart-depth 2 -o-dir " + path("data"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const char* f : {"chart.json", "balances.csv", "nace.csv"}) {
    EXPECT_TRUE(fs::exists(path("data/") + f));
    EXPECT_TRUE(fs::exists(path("data/") + f + ".manifest.json"));
  }
  const std::string ledger = " --chart " + path("data/chart.json") + " --balances " + path("data/balances.csv");
  r = run("distances" + ledger + " --metric emd --threads 2 -o " + path("d.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run("evaluate" + ledger + " --nace " + path("data/nace.csv") + " --q 3 --k-max 5 --seed 1 -o " +
          path("eval.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(read("eval.csv").rfind("metric,k,mean_jaccard\n", 0), 0u);
  r = run("outliers --distances " + path("d.csv") + " --k 4 -o " + path("lof.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run("embed --distances " + path("d.csv") + " --perplexity 5 --iterations 300 --seed 2 -o " + path("e.csv") +
          " --svg " + path("map.svg") + " --circle-outliers " + path("lof.csv") + " --nace " +
          path("data/nace.csv") + " --highlight-nace 70.220");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(read("map.svg").rfind("<svg", 0), 0u);
  EXPECT_EQ(read("e.csv").rfind("company_id,x,y\n", 0), 0u);

  // --highlight-nace without --nace is a usage mistake.
  r = run("embed --distances " + path("d.csv") + " --perplexity 5 --seed 2 -o " + path("e2.csv") + " --svg " +
          path("m2.svg") + " --highlight-nace 70.220");
  EXPECT_EQ(r.exit_code, 1);
}

TEST_F(CliTest, ThreadCountDoesNotChangeOutput) {
  auto r = run("synth --seed 5 --companies 30 --industries 3 --chart-depth 2 --out-dir " + path("data"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string ledger = " --chart " + path("data/chart.json") + " --balances " + path("data/balances.csv");
  ASSERT_EQ(run("distances" + ledger + " --metric emd --threads 1 -o " + path("d1.csv")).exit_code, 0);
  ASSERT_EQ(run("distances" + ledger + " --metric emd --threads 4 -o " + path("d4.csv")).exit_code, 0);
  EXPECT_EQ(read("d1.csv"), read("d4.csv"));
}
