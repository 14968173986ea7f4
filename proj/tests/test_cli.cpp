#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "equiosc/cli.hpp"
#include "equiosc/errors.hpp"
#include "equiosc/io.hpp"

using namespace equiosc;
using io::Json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "equiosc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

const char* kTentParabolaConfig = R"({
  "kernels": [
    {"family": "tent"}, {"family": "tent"},
    {"family": "weighted", "weight": 0.1, "base": {"family": "parabola"}},
    {"family": "weighted", "weight": 0.1, "base": {"family": "parabola"}}
  ],
  "sigma": "2,1,3"
})";

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("equiosc_test_" + name);
}

}  // namespace

TEST(Io, KernelRoundTrip) {
  const Json spec = Json::parse(R"({"family":"sum","terms":[
      {"family":"weighted","weight":2.5,"base":{"family":"log_sine"}},
      {"family":"riesz","p":1.5},
      {"family":"smoothed","base":{"family":"tent"},"level":8,"kind":"sqrt_cusp"},
      {"family":"table","t":[0,3.141592653589793,6.283185307179586],"v":[0,1,0]}]})");
  const Kernel k = io::kernel_from_json(spec);
  const Kernel back = io::kernel_from_json(io::kernel_to_json(k));
  EXPECT_EQ(k.canonical(), back.canonical());
  const double t = 1.3;
  const double expected = 2.5 * std::log(std::sin(t / 2)) - std::pow(2 * std::sin(t / 2), -1.5) +
                          std::min(0.0, std::sqrt(t) - 1.0 / 8) + t + t / kPi;
  EXPECT_NEAR(k.eval(t).value(), expected, 1e-12);
}

TEST(Io, KernelErrors) {
  EXPECT_THROW(io::kernel_from_json(Json::parse(R"({"family":"nope"})")), ValidationError);
  EXPECT_THROW(io::kernel_from_json(Json::parse(R"({"family":"riesz"})")), ValidationError);
  EXPECT_THROW(io::kernel_from_json(Json::parse(R"({"weight":2})")), ValidationError);
  EXPECT_THROW(io::kernel_from_json(Json::parse(R"({"family":"smoothed","base":{"family":"tent"},"level":1.5})")),
               ValidationError);
}

TEST(Io, TableCsv) {
  const auto path = temp_path("table.csv");
  {
    std::ofstream f(path);
    f << "t,K\n0,0\n3.141592653589793,2\n6.283185307179586,0\n";
  }
  const Kernel k = io::kernel_from_json(Json{{"family", "table"}, {"csv", path.filename().string()}}, path.parent_path());
  EXPECT_NEAR(k.eval(kPi / 2).value(), 1.0, 1e-12);
  {
    std::ofstream f(path);
    f << "0,0\n2,0.5\n3,3\n6.283185307179586,0\n";
  }
  EXPECT_THROW(io::load_table_csv(path), ValidationError);
  std::filesystem::remove(path);
}

TEST(Io, ExtRealAndLists) {
  EXPECT_EQ(io::ext_real(-INFINITY), Json("-inf"));
  EXPECT_EQ(io::ext_real(1.5), Json(1.5));
  EXPECT_EQ(io::parse_list("1, 2.5,3"), (std::vector<double>{1, 2.5, 3}));
  EXPECT_THROW(io::parse_list("1,a"), ValidationError);
  std::ostringstream os;
  io::write_csv(os, {"a", "b"}, {{0.1, 1.0 / 3.0}});
  EXPECT_EQ(os.str(), "a,b\n0.10000000000000001,0.33333333333333331\n");
}

TEST(Cli, EquioscillateTentParabola) {
  const Result r = run_cli({"equioscillate", "--no-timestamp"}, kTentParabolaConfig);
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_FALSE(j.contains("timestamp"));
  const auto nodes = j["report"]["nodes"].get<std::vector<double>>();
  EXPECT_NEAR(nodes[0], kPi, 1e-7);
  EXPECT_NEAR(nodes[1], kPi / 2, 1e-7);
  EXPECT_NEAR(nodes[2], 1.5 * kPi, 1e-7);
}

TEST(Cli, ConfigFromFile) {
  const auto path = temp_path("ex1.json");
  {
    std::ofstream f(path);
    f << kTentParabolaConfig;
  }
  const Result r = run_cli({"equioscillate", "--config", path.string(), "--sigma", "2,1,3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(Json::parse(r.out).contains("timestamp"));
  std::filesystem::remove(path);
}

TEST(Cli, DeterministicOutput) {
  const Result a = run_cli({"minimax", "--no-timestamp", "--sigma", "2,1,3"}, kTentParabolaConfig);
  const Result b = run_cli({"minimax", "--no-timestamp", "--sigma", "2,1,3"}, kTentParabolaConfig);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.code, 2);  // the infimum is approached at the simplex boundary
}

TEST(Cli, BojanovChebyshev) {
  const auto csv = temp_path("boj.csv");
  const Result r = run_cli({"bojanov", "--interval", "-1,1", "--exponents", "1,1", "--no-timestamp",
                            "--emit-samples", csv.string(), "--resolution", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(Json::parse(r.out)["polynomial"]["norm"].get<double>(), 0.5, 1e-10);
  std::ifstream f(csv);
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "x,abs_P");
  int rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 11);
  std::filesystem::remove(csv);
}

TEST(Cli, Gtp) {
  const Result r = run_cli({"gtp", "--exponents", "1,1,1", "--no-timestamp"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(Json::parse(r.out)["gtp"]["norm"].get<double>(), 0.25, 1e-10);
}

TEST(Cli, SampleRowCount) {
  const Result r = run_cli({"sample", "--nodes", "3.14159,1.5708,4.7124", "--resolution", "2000"}, kTentParabolaConfig);
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,F");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2000);
}

TEST(Cli, SampleToFile) {
  const auto csv = temp_path("sample.csv");
  const Result r = run_cli({"sample", "--nodes", "180,90,270", "--degrees", "--resolution", "10", "--emit-samples",
                            csv.string(), "--no-timestamp"},
                           kTentParabolaConfig);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["rows"], 10);
  std::filesystem::remove(csv);
}

TEST(Cli, EvalAndProfileWithDegrees) {
  const Result e = run_cli({"eval", "--nodes", "180,90,270", "--degrees", "--at", "0", "--no-timestamp"}, kTentParabolaConfig);
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NEAR(Json::parse(e.out)["values"][0]["F"].get<double>(), kPi + 0.15 * kPi * kPi, 1e-12);
  const Result p = run_cli({"profile", "--nodes", "180,90,270", "--degrees", "--no-timestamp"}, kTentParabolaConfig);
  ASSERT_EQ(p.code, 0) << p.err;
  const Json j = Json::parse(p.out);
  for (const auto& arc : j["profile"]["arcs"]) EXPECT_NEAR(arc["m"].get<double>(), kPi + 0.15 * kPi * kPi, 1e-9);
}

TEST(Cli, ProfileReportsMinusInfinity) {
  const Result r = run_cli({"profile", "--nodes", "2,2", "--sigma", "1,2", "--no-timestamp"},
                           R"({"kernel":{"family":"log_sine"},"n":2})");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["profile"]["m_under"], "-inf");
}

TEST(Cli, MinimaxAllSigma) {
  const Result r = run_cli({"minimax", "--all-sigma", "--no-timestamp"}, R"({"kernel":{"family":"log_sine"},"n":2})");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["global"]["table"].size(), 2u);
  EXPECT_NEAR(j["global"]["best"]["objective"].get<double>(), -2 * std::log(2.0), 1e-9);
}

TEST(Cli, Maximin) {
  const Result r = run_cli({"maximin", "--no-timestamp"}, R"({"kernel":{"family":"log_sine"},"n":2})");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(Json::parse(r.out)["report"]["objective"].get<double>(), -2 * std::log(2.0), 1e-8);
}

TEST(Cli, VerifyChecks) {
  const std::string fenton = R"({"kernels":[{"family":"weighted","weight":2,"base":{"family":"log_sine"}},
      {"family":"log_sine"},{"family":"log_sine"}]})";
  EXPECT_EQ(run_cli({"verify", "--check", "sandwich", "--samples", "30"}, fenton).code, 0);
  EXPECT_EQ(run_cli({"verify", "--check", "mmatrix"}, fenton).code, 0);
  EXPECT_EQ(run_cli({"verify", "--check", "grid-minimax", "--resolution", "30"}, fenton).code, 0);
  const Result conv = run_cli({"verify", "--check", "convergence", "--nodes", "1,3.5", "--no-timestamp"},
                              R"({"kernel":{"family":"tent"},"n":2})");
  ASSERT_EQ(conv.code, 0) << conv.err;
  EXPECT_EQ(Json::parse(conv.out)["result"]["rows"].size(), 4u);
  const Result bad = run_cli({"verify", "--check", "sandwich", "--nodes", "3.141592653589793,1.5707963267948966,"
                                                                   "4.71238898038469"},
                             kTentParabolaConfig);
  EXPECT_EQ(bad.code, 2);
}

TEST(Cli, Errors) {
  EXPECT_EQ(run_cli({"eval"}, "{").code, 1);
  EXPECT_EQ(run_cli({"equioscillate"}, R"({"kernels":[]})").code, 1);
  EXPECT_EQ(run_cli({"equioscillate"}, R"({"kernels":[{"family":"bogus"}]})").code, 1);
  EXPECT_EQ(run_cli({"minimax", "--sigma", "1,1"}, R"({"kernel":{"family":"log_sine"},"n":2})").code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"bojanov", "--interval", "1,-1", "--exponents", "1"}).code, 1);
  const Result r = run_cli({"profile"}, R"({"kernel":{"family":"log_sine"},"n":2})");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nodes are required"), std::string::npos);
}
