#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrw2d/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qrw2d");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qrw2d::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kB = R"({"family":"B","t":0.5})";
const std::string kS8 = R"({"family":"S","t":0.125})";
const std::string kScaled = R"({"family":"custom","coin":[[0.5,0,0,0],[0,0.5,0,0],[0,0,0.5,0],[0,0,0,0.5]]})";

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qrw2d_cli_" + name);
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  EXPECT_EQ(run({"simulate"}).code, 2);  // no model
  EXPECT_EQ(run({"simulate", "--model", R"({"family":"X"})"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", R"({"family":"B"})"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", "{not json"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", "/no/such/file.json"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", kB, "--tol", "bogus=1"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", kB, "--tol", "dedup"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", kB, "--format", "png"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", kB, "--scale", "cubic"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", kB, "--start", "1,0,0"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", kB, "--start", "1,1,0,0"}).code, 2);
  EXPECT_EQ(run({"simulate", "--model", kB, "--n", "-1"}).code, 2);
  EXPECT_EQ(run({"compare", "--model", kB}).code, 2);  // no directions
  EXPECT_EQ(run({"compare", "--model", kB, "--dir", "1,2"}).code, 2);
  EXPECT_EQ(run({"compare", "--model", kB, "--dir", "1,1,0"}).code, 2);
  const auto r = run({"simulate", "--model", kScaled, "--n", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("not unitary"), std::string::npos);
}

TEST(Cli, SimulateCsv) {
  const auto r = run({"simulate", "--model", kB, "--n", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "r,s,p\n-1,0,0.25\n0,-1,0.25\n0,1,0.25\n1,0,0.25\n");
}

TEST(Cli, SimulateZeroStepsIsOneBrightPixel) {
  const auto r = run({"simulate", "--model", kB, "--n", "0", "--format", "pgm"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, std::string("P5\n1 1\n65535\n\xff\xff", 15));
}

TEST(Cli, SimulateJsonTotals) {
  const auto r = run({"simulate", "--model", kS8, "--n", "30", "--format", "json", "--start", "0.6,0:0.8,0,0"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j.at("total_probability").get<double>(), 1.0, 1e-12);
  EXPECT_EQ(j.at("start")[1][1].get<double>(), 0.8);
}

TEST(Cli, OutputIsDeterministic) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"simulate", "--model", kB, "--n", "40", "--format", "pgm", "--scale", "log"},
        std::vector<std::string>{"shape", "--model", kS8, "--grid", "20"},
        std::vector<std::string>{"shape", "--model", kB, "--grid", "20", "--format", "pgm", "--size", "64"},
        std::vector<std::string>{"critical", "--model", kB, "--dir", "30,-10,100"}}) {
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(a.out.empty());
  }
}

TEST(Cli, ShapeCloudSize) {
  const auto r = run({"shape", "--model", kS8, "--grid", "10"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(count_lines(r.out), 401u);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "alpha,beta,sheet,gamma,v1,v2,K");
  while (std::getline(in, line)) {
    const auto f = qrw2d::cli::split(line, ',');
    ASSERT_EQ(f.size(), 7u);
    EXPECT_LE(std::abs(std::stod(f[4])), 1.0);
    EXPECT_LE(std::abs(std::stod(f[5])), 1.0);
  }
}

TEST(Cli, ShapeDensityIsDarkWhereDense) {
  const auto r = run({"shape", "--model", kS8, "--grid", "60", "--format", "pgm", "--size", "32", "--scale", "linear"});
  ASSERT_EQ(r.code, 0);
  const std::string header = "P5\n32 32\n65535\n";
  ASSERT_EQ(r.out.substr(0, header.size()), header);
  ASSERT_EQ(r.out.size(), header.size() + 2 * 32 * 32);
  int white = 0, black = 0;
  for (std::size_t k = header.size(); k < r.out.size(); k += 2) {
    const int v = (static_cast<unsigned char>(r.out[k]) << 8) | static_cast<unsigned char>(r.out[k + 1]);
    white += v == 65535;
    black += v == 0;
  }
  EXPECT_GT(white, 0);  // corners of the square are never reached
  EXPECT_GE(black, 1);  // the densest pixel
}

TEST(Cli, CompareRows) {
  const auto r = run({"compare", "--model", kS8, "--dir", "20,10,100", "--dir", "21,10,100", "--dir", "80,80,100",
                      "--dir", "0,96,100"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto& rows = j.at("runs")[0].at("results");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].at("status"), "Inside");
  EXPECT_TRUE(rows[0].at("relative_error").is_number());
  EXPECT_LT(rows[0].at("relative_error").get<double>(), 0.2);
  EXPECT_EQ(rows[1].at("exact_probability").get<double>(), 0.0);
  EXPECT_EQ(rows[1].at("predicted_probability").get<double>(), 0.0);
  for (int k : {2, 3}) {
    EXPECT_EQ(rows[k].at("status"), "Outside");
    EXPECT_LT(rows[k].at("exact_probability").get<double>(), 1e-12);
    EXPECT_EQ(rows[k].at("predicted_probability").get<double>(), 0.0);
  }
  EXPECT_EQ(j.at("runs")[0].at("summary").at("inside_compared"), 1);
}

TEST(Cli, CompareAllStarts) {
  const auto r = run({"compare", "--model", kB, "--dir", "30,-10,100", "--all-starts"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.at("runs").size(), 4u);
  for (int s = 0; s < 4; ++s) EXPECT_EQ(j.at("runs")[s].at("start")[s][0].get<double>(), 1.0);
}

TEST(Cli, CriticalReportsVelocities) {
  const auto r = run({"critical", "--model", kB, "--dir", "30,-10,100"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto& rep = j.at("reports")[0];
  EXPECT_EQ(rep.at("status"), "Inside");
  ASSERT_FALSE(rep.at("points").empty());
  for (const auto& p : rep.at("points")) {
    EXPECT_NEAR(p.at("velocity")[0].get<double>(), 0.3, 1e-10);
    EXPECT_NEAR(p.at("velocity")[1].get<double>(), -0.1, 1e-10);
  }
}

TEST(Cli, ConfigFileAndOverrides) {
  const auto cfg_path = temp_file("config.json");
  const auto out_path = temp_file("out.csv");
  {
    std::ofstream f(cfg_path);
    f << R"({"model": {"family": "B", "t": 0.5}, "n": 3, "format": "csv", "tol": {"dedup": 1e-7}})";
  }
  auto r = run({"simulate", "--config", cfg_path.string(), "--out", out_path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), run({"simulate", "--model", kB, "--n", "3"}).out);

  r = run({"simulate", "--config", cfg_path.string(), "--n", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(count_lines(r.out), 5u);

  {
    std::ofstream f(cfg_path);
    f << R"({"model": {"family": "B", "t": 0.5}, "steps": 3})";
  }
  EXPECT_EQ(run({"simulate", "--config", cfg_path.string()}).code, 2);
  std::filesystem::remove(cfg_path);
  std::filesystem::remove(out_path);
}

TEST(Cli, CheckPassesOnBuiltins) {
  for (const std::string& m : {std::string(R"({"family":"S","t":0.5})"), kB}) {
    const auto r = run({"check", "--model", m});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_TRUE(j.at("passed").get<bool>());
    bool saw_singular = false;
    for (const auto& c : j.at("checks")) {
      EXPECT_NE(c.at("outcome"), "fail") << c.at("name");
      saw_singular = saw_singular || (c.at("name") == "singular_points" && c.at("outcome") == "pass");
    }
    EXPECT_EQ(saw_singular, m == kB);
  }
}

TEST(Cli, CheckFailsOnNonUnitaryCoin) {
  const auto r = run({"check", "--model", kScaled});
  EXPECT_EQ(r.code, 3);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j.at("passed").get<bool>());
  bool torality_failed = false;
  for (const auto& c : j.at("checks"))
    torality_failed = torality_failed || (c.at("name") == "torality" && c.at("outcome") == "fail");
  EXPECT_TRUE(torality_failed);
  EXPECT_NE(r.err.find("torality"), std::string::npos);
}
