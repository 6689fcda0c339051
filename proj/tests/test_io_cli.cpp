#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ncfree/cli.hpp"
#include "support.hpp"

using namespace ncfree;
using namespace testing_support;

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ncfree");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {rc, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("ncfree_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                                   "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

 private:
  fs::path path_;
};

TEST(Json, PolyRoundTrip) {
  std::mt19937 rng(50);
  for (int t = 0; t < 20; ++t) {
    const NCPoly p = random_poly(rng, 2, 3);
    const Json j = Json::parse(dump_json(to_json(p)));
    EXPECT_EQ(max_coeff_diff(poly_from_json(j, 2), p), 0.0);
    const TensorPoly s = random_tensor(rng, 2, 4, 6);
    EXPECT_EQ(max_coeff_diff(tensor_from_json(Json::parse(dump_json(to_json(s))), 2), s), 0.0);
  }
}

TEST(Json, IndicesAreOneBased) {
  const NCPoly p = NCPoly::monomial(2, make_word({0, 1}), 2.5);
  const Json j = to_json(p);
  EXPECT_EQ(j[0]["indices"], Json::parse("[1, 2]"));
  EXPECT_THROW(poly_from_json(Json::parse(R"([{"indices": [0], "re": 1}])"), 2), Error);
  EXPECT_THROW(poly_from_json(Json::parse(R"([{"indices": [3], "re": 1}])"), 2), Error);
  EXPECT_THROW(poly_from_json(Json::parse(R"({"indices": [1]})"), 2), Error);
}

TEST(Json, WriterIsDeterministicAndFaithful) {
  Json j;
  j["b"] = 0.1;
  j["a"] = 3.0;
  j["n"] = std::nan("");
  j["v"] = Json::array({1, 2, 3});
  const std::string s = dump_json(j);
  EXPECT_EQ(s, dump_json(j));
  EXPECT_LT(s.find("\"b\""), s.find("\"a\""));
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(s.find("3.0"), std::string::npos);
  EXPECT_NE(s.find("null"), std::string::npos);
  EXPECT_EQ(Json::parse(s)["b"].get<double>(), 0.1);
}

TEST(Config, DefaultsAndDerivedCounts) {
  RunConfig c = config_from_json(Json::object());
  EXPECT_EQ(c.num_vars, 1);
  c = config_from_json(Json::parse(R"({"lambdas": [2.0], "q": 0.1})"));
  EXPECT_EQ(c.num_vars, 2);
  EXPECT_EQ(c.num_trivial, 0);
  c = config_from_json(Json::parse(R"({"lambdas": [2.0], "num_vars": 3})"));
  EXPECT_EQ(c.num_trivial, 1);
  EXPECT_EQ(c.context().num_vars, 3);
  EXPECT_EQ(c.pipeline().transport.degree_cap, 8);
}

TEST(Config, Rejections) {
  auto code = [](const char* text) {
    try {
      config_from_json(Json::parse(text));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::NoConvergence;  // never raised by the parser
  };
  EXPECT_EQ(code(R"({"bogus": 1})"), ErrorCode::BadInput);
  EXPECT_EQ(code(R"({"q": 1.0})"), ErrorCode::BadInput);
  EXPECT_EQ(code(R"({"gamma": 0.5})"), ErrorCode::BadGamma);
  EXPECT_EQ(code(R"({"lambdas": [-1.0]})"), ErrorCode::NonPositiveLambda);
  EXPECT_EQ(code(R"({"lambdas": [2.0], "num_vars": 1})"), ErrorCode::BadInput);
  EXPECT_EQ(code(R"({"degree_cap": 2.5})"), ErrorCode::BadInput);
  EXPECT_EQ(code(R"({"R": 6.0})"), ErrorCode::BadInput);
  EXPECT_EQ(code("[1]"), ErrorCode::BadInput);
}

TEST(Cli, ExitCodeMapping) {
  EXPECT_EQ(cli::exit_code(ErrorCode::BadInput), 1);
  EXPECT_EQ(cli::exit_code(ErrorCode::HypothesisViolation), 2);
  EXPECT_EQ(cli::exit_code(ErrorCode::NoConvergence), 3);
  EXPECT_EQ(cli::shortest(0.1), "0.1");
  EXPECT_EQ(cli::parse_word("1,2,1", 2), make_word({0, 1, 0}));
  EXPECT_THROW(cli::parse_word("1,x", 2), Error);
}

TEST(Cli, Moments) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"q": 0.3})");
  auto r = run_cli({"moments", "--config", cfg, "--word", "1,1,1,1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "2.3\n");
  r = run_cli({"moments", "--config", cfg, "--degree", "4"});
  EXPECT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["moments"].size(), 5u);
  EXPECT_EQ(run_cli({"moments", "--config", cfg, "--word", "2"}).code, 1);
  EXPECT_EQ(run_cli({"moments", "--config", cfg}).code, 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"moments", "--config", "/nonexistent/c.json", "--word", "1"}).code, 1);
  EXPECT_EQ(run_cli({"solve-transport"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, VerifySd) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"lambdas": [2.0]})");
  auto r = run_cli({"verify-sd", "--config", cfg, "--potential", "v0", "--degree", "3", "--quiet"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(Json::parse(r.out)["pass"].get<bool>());
  EXPECT_TRUE(r.err.empty());
  const auto bad = dir.write("v.json", R"([{"indices": [1, 1], "re": 0.3}, {"indices": [2, 2], "re": 0.3}])");
  EXPECT_EQ(run_cli({"verify-sd", "--config", cfg, "--potential", bad, "--degree", "2", "--quiet"}).code, 3);
}

TEST(Cli, SolveAndInvert) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"degree_cap": 6})");
  const auto w = dir.write("w.json", R"([{"indices": [1, 1, 1, 1], "re": 0.0001}])");
  auto r = run_cli({"solve-transport", "--config", cfg, "--potential", w, "--quiet"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_TRUE(j["transport"]["converged"].get<bool>());
  EXPECT_LT(j["transport"]["sd_residual"].get<double>(), 1e-8);
  EXPECT_EQ(j["transport"]["note"], "exact modulo degree > d_max");

  const auto rep = dir.write("out.json", "");
  r = run_cli({"invert", "--config", cfg, "--potential", w, "--report", rep, "--quiet"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  j = read_json_file(rep);
  EXPECT_LT(j["inversion"]["residual"].get<double>(), 1e-8);

  const auto y = dir.write("y.json", R"([[{"indices": [1], "re": 1}, {"indices": [1, 1], "re": 0.01}]])");
  r = run_cli({"invert", "--config", cfg, "--potential", y, "--quiet"});
  EXPECT_EQ(r.code, 0);
  EXPECT_FALSE(Json::parse(r.out).contains("transport"));

  const auto big = dir.write("big.json", R"([{"indices": [1, 1, 1, 1], "re": 0.001}])");
  EXPECT_EQ(run_cli({"solve-transport", "--config", cfg, "--potential", big, "--quiet"}).code, 2);
  EXPECT_EQ(run_cli({"solve-transport", "--config", cfg, "--potential", "v0", "--quiet"}).code, 1);
}

TEST(Cli, QIsomorphismAtZeroIsTrivial) {
  TempDir dir;
  const auto cfg = dir.write("c.json", R"({"q": 0.0, "degree_cap": 4})");
  const auto a = run_cli({"q-isomorphism", "--config", cfg, "--quiet"});
  EXPECT_EQ(a.code, 0);
  const auto b = run_cli({"q-isomorphism", "--config", cfg, "--quiet"});
  EXPECT_EQ(a.out, b.out);
  const Json j = Json::parse(a.out);
  EXPECT_TRUE(j.contains("stages"));
}

TEST(Cli, Selftest) {
  const auto r = run_cli({"selftest"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
