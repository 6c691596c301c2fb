#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "privleak/cli.hpp"

namespace privleak {
namespace {

const std::string kScalar = R"({"A": 0, "B": 1, "C": 1, "sigma_e": 1, "u": [1], "k_star": 0, "N": 2})";

std::string contents_of_lines(const std::string& text, std::size_t count) {
  std::istringstream in(text);
  std::string line, out;
  for (std::size_t i = 0; i < count && std::getline(in, line); ++i) out += line + "\n";
  return out;
}

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_text(const std::string& sub, const std::string& text) {
  std::ostringstream out, err;
  int code;
  try {
    code = cli::run(sub, parse_config_text(text), out, err);
  } catch (const Error& e) {
    code = -1;
    err << e.kind() << ": " << e.what();
  }
  return {code, out.str(), err.str()};
}

class TempFile {
 public:
  explicit TempFile(const std::string& text) {
    path_ = (std::filesystem::temp_directory_path() /
             ("privleak_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".json"))
                .string();
    std::ofstream(path_) << text;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

TEST(ParseConfig, Defaults) {
  const AnalysisConfig cfg = parse_config_text(R"({"A": [[0.5]], "B": [[1]], "C": [[1]], "sigma_e": [[1]]})");
  EXPECT_EQ(cfg.model.n(), 1u);
  EXPECT_EQ(cfg.x0, Vector{0.0});
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_FALSE(cfg.u.has_value());
  EXPECT_FALSE(cfg.program.has_value());
  EXPECT_EQ(cfg.norm, 1.0);
  EXPECT_EQ(cfg.tol.rank_rel, kDefaultTolerances.rank_rel);
}

TEST(ParseConfig, MalformedJsonReportsOffset) {
  try {
    parse_config_text("{\"A\": [[1]],\n \"B\": [1,}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("byte"), std::string::npos);
    EXPECT_NE(msg.find("line 2"), std::string::npos);
  }
}

TEST(ParseConfig, SigmaNotPositiveDefinite) {
  try {
    parse_config_text(R"({"A": [[0.5]], "B": [[1]], "C": [[1],[1]], "sigma_e": [[1,2],[2,1]]})");
    FAIL() << "expected ValueError";
  } catch (const ValueError& e) {
    EXPECT_NE(std::string(e.what()).find("sigma_e"), std::string::npos);
  }
}

TEST(ParseConfig, ShapeErrorNamesBothKeys) {
  try {
    parse_config_text(R"({"A": [[0,0,0],[0,0,0],[0,0,0]], "B": [[1,0],[0,1]], "C": [[1,0,0]], "sigma_e": 1})");
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("\"A\""), std::string::npos);
    EXPECT_NE(msg.find("\"B\""), std::string::npos);
  }
}

TEST(ParseConfig, RejectsBadValues) {
  EXPECT_THROW(parse_config_text(R"({"A": 0, "B": 1, "C": 1})"), ValueError);
  EXPECT_THROW(parse_config_text(R"({"A": 0, "B": 1, "C": 1, "sigma_e": 1, "bogus": 2})"), ValueError);
  EXPECT_THROW(parse_config_text(R"({"A": 0, "B": 1, "C": 1, "sigma_e": 1, "N": -1})"), ValueError);
  EXPECT_THROW(parse_config_text(R"({"A": [[1, "x"]], "B": 1, "C": 1, "sigma_e": 1})"), Error);
  EXPECT_THROW(parse_config_text(R"({"A": [[1, 2], [3]], "B": 1, "C": 1, "sigma_e": 1})"), ShapeError);
  // Program with q >= p.
  EXPECT_THROW(parse_config_text(R"({"A": 0.5, "B": 1, "C": 1, "sigma_e": 1, "Q": 1, "R": 1, "C1": 1, "r": [1]})"),
               ValueError);
  EXPECT_THROW(parse_config_text("[1, 2]"), ParseError);
}

TEST(ParseConfig, ToleranceOverrides) {
  const AnalysisConfig cfg =
      parse_config_text(R"({"A": 0, "B": 1, "C": 1, "sigma_e": 1, "tolerances": {"rank_rel": 1e-8}})");
  EXPECT_EQ(cfg.tol.rank_rel, 1e-8);
  EXPECT_THROW(parse_config_text(R"({"A": 0, "B": 1, "C": 1, "sigma_e": 1, "tolerances": {"nope": 1}})"), ValueError);
}

TEST(FormatNumber, Rules) {
  EXPECT_EQ(cli::format_number(kInfinity), "inf");
  EXPECT_EQ(cli::format_number(0.5), "0.5");
  EXPECT_EQ(cli::format_number(1.0), "1");
  EXPECT_EQ(cli::format_number(0.1 + 0.2), "0.3");
  EXPECT_EQ(cli::format_number(1.0 / 3.0), "0.333333333333");
}

TEST(Cli, BoundCsv) {
  const RunResult r = run_text("bound", kScalar);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "tau,exponent,candidate\n"
            "1,1,0.581976706869\n"
            "2,2,0.626070570999\n"
            "# tau_star=2,bound=0.626070570999\n");
}

TEST(Cli, BoundInfiniteForFullyPrivateInput) {
  const RunResult r = run_text("bound", R"({"A": 0.5, "B": [[1, -1]], "C": 1, "sigma_e": 1, "u": [1, 1],
                                             "k_star": 1, "N": 3})");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("1,0,inf\n"), std::string::npos);
  EXPECT_NE(r.out.find("bound=inf"), std::string::npos);
}

TEST(Cli, DirectionsSections) {
  const RunResult r = run_text("directions", R"({"A": 0.5, "B": [[1, -1]], "C": 1, "sigma_e": 1,
                                                  "k_star": 0, "N": 3})");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("# table=per_tau\n"), std::string::npos);
  EXPECT_NE(r.out.find("# table=u_star\n"), std::string::npos);
  EXPECT_NE(r.out.find("# table=fully_private_basis\n"), std::string::npos);
  EXPECT_NE(r.out.find("fully_private=true,null_dimension=1"), std::string::npos);
}

const std::string kOptimize = R"({"A": 0.5, "B": [[1, 1]], "C": 1, "sigma_e": 1, "k_star": 0, "N": 6,
                                  "Q": 1, "R": [[1, 0], [0, 2]], "C1": 1, "r": [1], "mu": 0.5})";

TEST(Cli, OptimizeSummary) {
  const RunResult r = run_text("optimize", kOptimize);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(",pass,pass\n"), std::string::npos);
  EXPECT_NE(r.out.find("x_star,0,1\n"), std::string::npos);
}

TEST(Cli, OptimizeCorruptedReportExits4) {
  const AnalysisConfig cfg = parse_config_text(kOptimize);
  TradeoffReport rep = tradeoff_report(cfg.model, *cfg.program, 0, 6);
  rep.epsilon = rep.mu * rep.delta + 1.0;
  std::ostringstream out;
  EXPECT_EQ(cli::emit_optimize(rep, out), cli::kCertificateViolation);
  EXPECT_NE(out.str().find(",pass,fail\n"), std::string::npos);
}

TEST(Cli, OptimizeWithBudget) {
  const RunResult r = run_text("optimize", R"({"A": 0.5, "B": [[1, 1]], "C": 1, "sigma_e": 1, "k_star": 0, "N": 6,
                                                "Q": 1, "R": [[1, 0], [0, 2]], "C1": 1, "r": [1],
                                                "epsilon_bar": 0.01})");
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, SimulateIsByteIdentical) {
  const std::string text = R"({"A": 0.9, "B": 1, "C": 1, "sigma_e": 5, "u": [1], "k_star": 10, "N": 40,
                               "trials": 200, "seed": 17})";
  const AnalysisConfig cfg = parse_config_text(text);
  std::ostringstream a, b, c, err;
  EXPECT_EQ(cli::run("simulate", cfg, a, err, 1), 0);
  EXPECT_EQ(cli::run("simulate", cfg, b, err, 1), 0);
  EXPECT_EQ(cli::run("simulate", cfg, c, err, 4), 0);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), c.str());
  EXPECT_EQ(contents_of_lines(a.str(), 1), "trial,k_hat,tie\n");
}

TEST(Cli, ZeroCheck) {
  const RunResult r = run_text("zero-check", R"({"A": [[0.5, 0.1], [0, 0.3]], "B": [[1, -1], [2, -2]],
      "C": [[1, 1]], "sigma_e": 1, "k_star": 0, "N": 5,
      "zero_direction": {"z0": [0.3, 0.1], "x": [0, 0], "u": [0.5, 0.5]}})");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(contents_of_lines(r.out, 2),
            "is_zero_direction,is_fully_private,residual_state,residual_output,residual_observability\n"
            "true,true,0,0,0\n");
  EXPECT_NE(r.out.find("# horizon_condition=satisfied"), std::string::npos);
}

TEST(Cli, ExitCodesAndSingleLineErrors) {
  // Missing scenario keys -> configuration error.
  RunResult r = run_text("bound", R"({"A": 0, "B": 1, "C": 1, "sigma_e": 1})");
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_EQ(r.err.rfind("error: ValueError: ", 0), 0u);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  // Empty tau range.
  r = run_text("bound", R"({"A": 0, "B": 1, "C": 1, "sigma_e": 1, "u": [1], "k_star": 3, "N": 3})");
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_EQ(r.err.rfind("error: EmptyTauRange: ", 0), 0u);

  // Infeasible program -> numerical failure.
  r = run_text("optimize", R"({"A": [[0.5, 0], [0, 0.2]], "B": [[1, 1], [0, 0]], "C": [[1, 1]], "sigma_e": 1,
                                "k_star": 0, "N": 4, "Q": [[1, 0], [0, 1]], "R": [[1, 0], [0, 1]],
                                "C1": [[0, 1]], "r": [1]})");
  EXPECT_EQ(r.code, cli::kNumericalError);
  EXPECT_EQ(r.err.rfind("error: Infeasible: ", 0), 0u);

  // Unstable plant in optimize.
  r = run_text("optimize", R"({"A": 1.5, "B": [[1, 1]], "C": 1, "sigma_e": 1, "k_star": 0, "N": 4,
                                "Q": 1, "R": [[1, 0], [0, 1]], "C1": 1, "r": [1]})");
  EXPECT_EQ(r.code, cli::kNumericalError);

  r = run_text("teleport", kScalar);
  EXPECT_EQ(r.code, cli::kConfigError);
}

TEST(Cli, RunFileMapsConfigErrors) {
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_file("bound", "/nonexistent/privleak.json", out, err), cli::kConfigError);
  EXPECT_EQ(err.str().rfind("error: ParseError: ", 0), 0u);

  const TempFile bad("{\"A\": [[1, 2], [2, 1]], \"B\": [[1], [1]], \"C\": [[1, 0]], \"sigma_e\": [[0]]}");
  std::ostringstream out2, err2;
  EXPECT_EQ(cli::run_file("bound", bad.path(), out2, err2), cli::kConfigError);
  EXPECT_EQ(err2.str().rfind("error: ValueError: ", 0), 0u);

  const TempFile good(kScalar);
  std::ostringstream out3, err3;
  EXPECT_EQ(cli::run_file("bound", good.path(), out3, err3), cli::kOk);
  EXPECT_NE(out3.str().find("# tau_star=2"), std::string::npos);
}

TEST(Cli, SampleConfigsRun) {
  const std::string dir = PRIVLEAK_CONFIG_DIR;
  for (const char* name : {"bound", "directions", "optimize", "simulate", "zero-check"}) {
    const std::string path = dir + "/" + std::string(name) + ".json";
    std::ostringstream out, err;
    EXPECT_EQ(cli::run_file(name, path, out, err), cli::kOk) << path << ": " << err.str();
  }
}

}  // namespace
}  // namespace privleak
