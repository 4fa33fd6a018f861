#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "cli/commands.hpp"
#include "cli/problem.hpp"
#include "dgame/error.hpp"

namespace dgame::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtures{DGAME_FIXTURE_DIR};

// Required members of each report, as JSON pointers with the expected kind.
enum class Kind { kNumber, kInteger, kBool, kString, kArray };

struct Field {
  const char* path;
  Kind kind;
};

const std::vector<Field> kMeta{{"/meta/version", Kind::kString},  {"/meta/problem", Kind::kString},
                               {"/meta/seed", Kind::kInteger},    {"/meta/tol", Kind::kNumber},
                               {"/meta/starts", Kind::kInteger},  {"/meta/eps_pd", Kind::kNumber},
                               {"/meta/exit_code", Kind::kInteger}};

const std::vector<Field> kPencil{{"/pencil/regular", Kind::kBool},
                                 {"/pencil/index", Kind::kInteger},
                                 {"/pencil/r", Kind::kInteger},
                                 {"/pencil/finite_spectrum", Kind::kArray}};

bool has_kind(const Json& v, Kind k) {
  switch (k) {
    case Kind::kNumber: return v.is_number();
    case Kind::kInteger: return v.is_number_integer();
    case Kind::kBool: return v.is_boolean();
    case Kind::kString: return v.is_string();
    case Kind::kArray: return v.is_array();
  }
  return false;
}

// simulate skips the pencil block.
void expect_schema(const Json& rep, const std::vector<Field>& fields, bool with_pencil) {
  for (const auto& group : {kMeta, with_pencil ? kPencil : std::vector<Field>{}, fields}) {
    for (const Field& f : group) {
      const Json::json_pointer ptr(f.path);
      ASSERT_TRUE(rep.contains(ptr)) << f.path;
      EXPECT_TRUE(has_kind(rep.at(ptr), f.kind)) << f.path << " = " << rep.at(ptr).dump();
    }
  }
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dgame_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& cmd, const fs::path& problem, Options opts = {}) {
    out_.str("");
    err_.str("");
    return run_command(cmd, problem, opts, out_, err_);
  }

  fs::path write(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << body;
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Cli, ReduceLaneKeeping) {
  Options o;
  o.out = (dir_ / "r.json").string();
  EXPECT_EQ(run("reduce", kFixtures / "lane_keeping.json", o), kExitOk);
  const Json rep = Json::parse(slurp(o.out));
  EXPECT_EQ(rep["pencil"]["index"], 1);
  EXPECT_EQ(rep["pencil"]["r"], 2);
  EXPECT_EQ(rep["meta"]["exit_code"], 0);
}

TEST_F(Cli, ImpulsivePencil) {
  EXPECT_EQ(run("reduce", kFixtures / "index2.json"), kExitAssumption);
  EXPECT_NE(err_.str().find("impulsive"), std::string::npos);
}

TEST_F(Cli, ForwardIsByteDeterministic) {
  Options a;
  a.out = (dir_ / "a.json").string();
  Options b = a;
  b.out = (dir_ / "b.json").string();
  ASSERT_EQ(run("forward", kFixtures / "lane_keeping.json", a), kExitOk);
  ASSERT_EQ(run("forward", kFixtures / "lane_keeping.json", b), kExitOk);
  EXPECT_EQ(slurp(a.out), slurp(b.out));
  const Json rep = Json::parse(slurp(a.out));
  EXPECT_EQ(rep["forward"].size(), 1u);
}

TEST_F(Cli, ForwardCostSets) {
  Options o;
  o.cost_set = "identified";
  EXPECT_EQ(run("forward", kFixtures / "lane_keeping.json", o), kExitOk);
  EXPECT_NE(out_.str().find("2 stabilizing equilibria"), std::string::npos) << out_.str();
  o.cost_set = "no_such_set";
  EXPECT_EQ(run("forward", kFixtures / "lane_keeping.json", o), kExitUsage);
}

TEST_F(Cli, ForwardWithoutEquilibrium) {
  // Scalar problem with Q = -1, R = 1, A = 0: the Riccati equation
  // -P^2 - 1 = 0 has no real root.
  const fs::path p = write("neg.json",
                           R"({"E": 1, "A": 0, "B": [[1]], "costs": {"Q": [-1], "R": [[1]]}})");
  EXPECT_EQ(run("forward", p), kExitNoEquilibrium);
}

TEST_F(Cli, InverseAndVerify) {
  Options o;
  o.out = (dir_ / "inv.json").string();
  EXPECT_EQ(run("inverse", kFixtures / "lane_keeping.json", o), kExitOk);
  const Json rep = Json::parse(slurp(o.out));
  EXPECT_EQ(rep["inverse"][0]["kernel_dim"], 6);
  EXPECT_TRUE(rep["inverse"][1]["feasible"].get<bool>());

  o.out.clear();
  o.theta_file = (kFixtures / "theta_ground_truth.json").string();
  EXPECT_EQ(run("verify", kFixtures / "lane_keeping.json", o), kExitOk);
  o.theta_file = (kFixtures / "theta_misspecified.json").string();
  EXPECT_EQ(run("verify", kFixtures / "lane_keeping.json", o), kExitEmptySet);
}

TEST_F(Cli, Misspecify) {
  Options o;
  o.out = (dir_ / "mis.json").string();
  o.theta_file = (kFixtures / "theta_misspecified.json").string();
  EXPECT_EQ(run("misspecify", kFixtures / "lane_keeping.json", o), kExitOk);
  const Json rep = Json::parse(slurp(o.out));
  const Json& players = rep["misspecify"]["players"];
  ASSERT_EQ(players.size(), 2u);
}

TEST_F(Cli, SimulateWritesCsv) {
  Options o;
  o.csv = (dir_ / "t.csv").string();
  EXPECT_EQ(run("simulate", kFixtures / "lane_keeping.json", o), kExitOk);
  std::ifstream in(o.csv);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x1,x2,x3,u1,u2");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 1001);

  Options z = o;
  z.x1 = {0.0, 0.0};
  z.csv = (dir_ / "z.csv").string();
  EXPECT_EQ(run("simulate", kFixtures / "lane_keeping.json", z), kExitOk);
  std::ifstream zin(z.csv);
  std::getline(zin, line);
  std::getline(zin, line);
  EXPECT_EQ(line, "0,0,0,0,0,0");
}

TEST_F(Cli, UnstableFeedback) {
  const fs::path p = write("open.json",
                           R"({"E": [[1,0,0],[0,1,0],[0,0,0]],
                               "A": [[0,20,0],[0,0,7.4],[0,0,-10]],
                               "B": [[0,0,1],[0,0,1]],
                               "F": [[0,0,0],[0,0,0]]})");
  EXPECT_EQ(run("simulate", p), kExitUnstable);
}

TEST_F(Cli, MalformedInput) {
  EXPECT_EQ(run("reduce", write("bad.json", "{\"E\": [[1]], ")), kExitUsage);
  EXPECT_EQ(run("reduce", write("dims.json", R"({"E": [[1,0],[0,1]], "A": 0, "B": [[1]]})")),
            kExitUsage);
  EXPECT_EQ(run("reduce", dir_ / "missing.json"), kExitUsage);
  EXPECT_EQ(run("bogus", kFixtures / "lane_keeping.json"), kExitUsage);
}

TEST(Problem, MatrixShapes) {
  EXPECT_EQ(parse_matrix(Json(2.5), "x").size(), 1);
  EXPECT_EQ(parse_matrix(Json::parse("[1, 2, 3]"), "x").rows(), 1);
  EXPECT_EQ(parse_column_matrix(Json::parse("[1, 2, 3]"), "x").cols(), 1);
  EXPECT_THROW(parse_matrix(Json::parse("[[1, 2], [3]]"), "x"), Error);
}

TEST(Executable, FlagsAroundSubcommand) {
  const std::string exe = DGAME_EXE;
  const std::string fx = (kFixtures / "lane_keeping.json").string();
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status(exe + " --seed 3 reduce " + fx), 0);
  EXPECT_EQ(status(exe + " reduce " + fx + " --seed 3"), 0);
  EXPECT_EQ(status(exe + " reduce"), 1);
  EXPECT_EQ(status(exe), 1);
  EXPECT_EQ(status(exe + " reduce " + (kFixtures / "index2.json").string()), 2);
}

TEST_F(Cli, ReportsFollowSchema) {
  const fs::path lk = kFixtures / "lane_keeping.json";
  const struct {
    const char* command;
    std::string theta;
    std::vector<Field> fields;
  } cases[] = {
      {"reduce", "", {{"/reduced/J", Kind::kArray}, {"/reduced/X", Kind::kArray},
                      {"/reduced/Y", Kind::kArray}, {"/reduced/B1", Kind::kArray},
                      {"/reduced/B2", Kind::kArray}}},
      {"forward", "", {{"/forward/0/f_bar", Kind::kArray}, {"/forward/0/p", Kind::kArray},
                       {"/forward/0/spectrum", Kind::kArray},
                       {"/forward/0/residuals/lyapunov", Kind::kArray},
                       {"/forward/0/residuals/stationarity", Kind::kNumber},
                       {"/forward_diagnostics/starts_tried", Kind::kInteger}}},
      {"inverse", "", {{"/observed/admissible", Kind::kBool}, {"/inverse/0/theta", Kind::kArray},
                       {"/inverse/0/residual", Kind::kNumber}, {"/inverse/0/pd_margin", Kind::kNumber},
                       {"/inverse/0/feasible", Kind::kBool}, {"/inverse/0/kernel_dim", Kind::kInteger},
                       {"/behaviors/count", Kind::kInteger}, {"/behaviors/matching", Kind::kInteger}}},
      {"verify", (kFixtures / "theta_ground_truth.json").string(),
       {{"/verify/member", Kind::kBool}, {"/verify/players", Kind::kArray}}},
      {"misspecify", (kFixtures / "theta_misspecified.json").string(),
       {{"/misspecify/players", Kind::kArray}, {"/misspecify/source", Kind::kString}}},
      {"simulate", "", {{"/simulate/F", Kind::kArray}, {"/simulate/x0", Kind::kArray},
                        {"/simulate/samples", Kind::kInteger}}},
  };
  for (const auto& c : cases) {
    SCOPED_TRACE(c.command);
    Options o;
    o.out = (dir_ / (std::string(c.command) + ".json")).string();
    o.theta_file = c.theta;
    EXPECT_EQ(run(c.command, lk, o), kExitOk);
    expect_schema(Json::parse(slurp(o.out)), c.fields, std::string(c.command) != "simulate");
  }
}

}  // namespace
}  // namespace dgame::cli
