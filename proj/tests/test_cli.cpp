#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "thermoevo/cli.hpp"

using namespace thermoevo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("thermoevo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& text, const std::string& name = "config.json") {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  int invoke(RunMode mode, const std::string& config, std::string& out, std::string& err, const std::string& out_dir = {}, bool all = false) {
    std::ostringstream o, e;
    const int code = run(CliOptions{mode, config, all, out_dir}, o, e);
    out = o.str();
    err = e.str();
    return code;
  }

  fs::path dir_;
};

const char* ls_model = R"("model": {"family": "LordShulman",
  "coefficients": {"rho0": 1, "C": 1, "Gamma": 0.5, "nu": 1, "kappa": 1, "a0": 1}})";

std::string sim_config(const std::string& extra = "") {
  return std::string("{") + ls_model + R"(,
  "grid": {"L": 1.0, "n_cells": 16},
  "time": {"t_max": 8.0, "dt": 0.0078125, "rho": 2.0, "scheme": "Trapezoidal"},
  "forcing": [{"kind": "gaussian_pulse", "center": 2.0, "width": 0.2, "block": "h", "spatial_profile": "bump"}])" +
         extra + "}";
}

}  // namespace

TEST_F(CliTest, PatternsAllMatchesGolden) {
  std::string out, err;
  EXPECT_EQ(invoke(RunMode::Patterns, "", out, err, "", true), 0);
  EXPECT_EQ(out, slurp(fs::path(THERMOEVO_TEST_DATA) / "golden" / "patterns_all.txt"));
}

TEST_F(CliTest, PatternsForOneModel) {
  std::string out, err;
  EXPECT_EQ(invoke(RunMode::Patterns, write_config(std::string("{") + ls_model + "}"), out, err), 0);
  EXPECT_EQ(out, pattern_report(assemble_material_law(catalog_example(ModelFamily::LordShulman))));
}

TEST_F(CliTest, CheckSatisfied) {
  std::string out, err;
  EXPECT_EQ(invoke(RunMode::Check, write_config(std::string("{") + ls_model + "}"), out, err), 0) << err;
  const auto j = Json::parse(out);
  EXPECT_EQ(j["verdict"], "satisfied");
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"verdict", "c_estimate", "rho_min", "classification", "witnesses", "checks_run"}));
}

TEST_F(CliTest, CheckViolatedExitsTwoWithWitness) {
  const std::string cfg = R"({"model": {"family": "DPL_I",
    "coefficients": {"rho0": 1, "C": 1, "Gamma": 0.5, "nu": 1, "kappa": 1, "n1": 1, "n2": -1}}})";
  std::string out, err;
  EXPECT_EQ(invoke(RunMode::Check, write_config(cfg), out, err), 2);
  const auto j = Json::parse(out);
  EXPECT_EQ(j["verdict"], "violated");
  EXPECT_FALSE(j["witnesses"].empty());
  EXPECT_EQ(j["rho_min"], "inf");
}

TEST_F(CliTest, InputErrorsExitOne) {
  std::string out, err;
  EXPECT_EQ(invoke(RunMode::Check, write_config(std::string("{") + ls_model + R"(, "colour": 1})"), out, err), 1);
  EXPECT_NE(err.find("unknown key 'colour'"), std::string::npos);
  EXPECT_EQ(invoke(RunMode::Check, write_config(R"({"model": {"family": "LordShulman", "coefficients": {"rho0": 1}, "extra": 2}})"), out, err), 1);
  EXPECT_EQ(invoke(RunMode::Check, write_config("{ not json"), out, err), 1);
  EXPECT_EQ(invoke(RunMode::Check, (dir_ / "missing.json").string(), out, err), 1);
  EXPECT_EQ(invoke(RunMode::Simulate, write_config(std::string("{") + ls_model + "}"), out, err), 1);
  EXPECT_EQ(invoke(RunMode::Check, write_config(std::string("{\"mode\": \"verify\",") + ls_model + "}"), out, err), 1);
  EXPECT_EQ(invoke(RunMode::Simulate, write_config(sim_config(R"(, "tolerances": {"oracle_error": 1, "speed": 2})")), out, err,
                   (dir_ / "o").string()),
            1);
}

TEST_F(CliTest, SimulateWritesDeterministicOutputs) {
  const std::string cfg = write_config(sim_config());
  std::string out, err;
  ASSERT_EQ(invoke(RunMode::Simulate, cfg, out, err, (dir_ / "a").string()), 0) << err;
  ASSERT_EQ(invoke(RunMode::Simulate, cfg, out, err, (dir_ / "b").string()), 0) << err;
  for (const char* f : {"v.csv", "sigma.csv", "theta_big.csv", "q.csv", "u.csv", "epsilon.csv", "theta.csv", "eta.csv", "energy.csv",
                        "manifest.json"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  const std::string v = slurp(dir_ / "a" / "v.csv");
  EXPECT_EQ(v.substr(0, v.find('\n')), "t,x_0,x_1,x_2,x_3,x_4,x_5,x_6,x_7,x_8,x_9,x_10,x_11,x_12,x_13,x_14");
  const std::string s = slurp(dir_ / "a" / "sigma.csv");
  EXPECT_NE(s.substr(0, s.find('\n')).find("x_15"), std::string::npos);
  const auto man = Json::parse(slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(man["config"]["grid"]["n_cells"], 16);
  EXPECT_EQ(man["rho"], 2.0);
  EXPECT_GT(man["c_estimate"].get<double>(), 0.0);
}

TEST_F(CliTest, VerifyPassesAndFailsOnTolerance) {
  std::string out, err;
  ASSERT_EQ(invoke(RunMode::Verify, write_config(sim_config()), out, err, (dir_ / "ok").string()), 0) << err << out;
  auto j = Json::parse(out);
  EXPECT_EQ(j["causality"]["leakage"], 0.0);
  EXPECT_TRUE(j["bound"]["passed"].get<bool>());
  EXPECT_LE(j["comparison"]["overall"].get<double>(), 1e-2);
  EXPECT_EQ(invoke(RunMode::Verify, write_config(sim_config(R"(, "tolerances": {"oracle_error": 1e-12})")), out, err, (dir_ / "tight").string()), 3);
  j = Json::parse(out);
  EXPECT_FALSE(j["passed"].get<bool>());
}

TEST(Io, FormatAndRationalRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  const auto r = RationalMatrixFunction::scalar({1.0, 0.5}, {2.0, 0.0, 1.0});
  // stored with a unit constant denominator coefficient
  const auto j = rational_to_json(r);
  EXPECT_EQ(j.dump(), R"({"num":[[[0.5]],[[0.25]]],"den":[1.0,0.0,0.5]})");
  EXPECT_TRUE(rational_from_json(j) == r);
  EXPECT_TRUE(rational_from_json(Json::parse(R"({"num": [1, 0.5], "den": [2, 0, 1]})")) == r);
  EXPECT_THROW(rational_from_json(Json::parse(R"({"num": [1], "den": [1], "x": 0})")), InvalidInput);
}

TEST(Io, SignalCsv) {
  std::ostringstream os;
  write_signal_csv(os, WeightedSignal(0.0, 0.5, 1.0, Eigen::MatrixXd::Constant(2, 2, 0.25)));
  EXPECT_EQ(os.str(), "t,component_0,component_1\n0,0.25,0.25\n0.5,0.25,0.25\n");
}
