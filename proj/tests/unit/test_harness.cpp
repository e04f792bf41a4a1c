#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "backbone/config.hpp"
#include "backbone/errors.hpp"
#include "backbone/io.hpp"
#include "backbone/verify.hpp"

using namespace backbone;

#ifndef BACKBONE_TEST_DATA
#define BACKBONE_TEST_DATA "tests/data"
#endif

TEST(Config, ParsesMechanismFile) {
  const auto m = load_mechanism(std::string(BACKBONE_TEST_DATA) + "/mixed.json");
  EXPECT_DOUBLE_EQ(m.alpha(), 0.9);
  EXPECT_DOUBLE_EQ(m.beta(), 0.4);
  ASSERT_EQ(m.pi().atoms().size(), 1u);
  ASSERT_EQ(m.pi().gamma_components().size(), 1u);
  EXPECT_EQ(m.pi().gamma_components()[0].shape, 1);
  const auto back = parse_mechanism(mechanism_to_json(m).dump());
  EXPECT_EQ(back(0.7), m(0.7));
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(load_mechanism(std::string(BACKBONE_TEST_DATA) + "/corrupt.json"), ConfigError);
  EXPECT_THROW(load_mechanism("/nonexistent/mech.json"), ConfigError);
  EXPECT_THROW(parse_mechanism("{\"beta\": 1}"), ConfigError);
  EXPECT_THROW(parse_mechanism("{\"alpha\": 1, \"beta\": 0}"), ConfigError);
  EXPECT_THROW(parse_mechanism("{\"alpha\": 1, \"gamma\": [[1, 0.5, 1]]}"), ConfigError);
  EXPECT_THROW(parse_mechanism("{\"alpha\": 1, \"beta\": 1, \"delta\": 2}"), ConfigError);
  EXPECT_THROW(parse_mechanism("[1, 2]"), ConfigError);
}

TEST(Config, ExperimentValidation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.replicas = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.replicas = 1;
  c.mechanism_path = "/nonexistent.json";
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, ExperimentSeeds) {
  EXPECT_EQ(experiment_seed(1, "a"), experiment_seed(1, "a"));
  EXPECT_NE(experiment_seed(1, "a"), experiment_seed(1, "b"));
  EXPECT_NE(experiment_seed(1, "a"), experiment_seed(2, "a"));
  EXPECT_NE(experiment_seed(1, "a", 0), experiment_seed(1, "a", 1));
}

TEST(Io, FullPrecisionNumbers) {
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::format_double(v)), v);
  EXPECT_EQ(io::format_double(1.0), "1");
  EXPECT_EQ(io::format_double(std::nan("")), "nan");

  io::Json j = io::Json::object();
  j["x"] = v;
  j["bad"] = std::numeric_limits<double>::infinity();
  j["n"] = 3;
  EXPECT_EQ(io::dump_json(j, 0), "{\"x\":0.30000000000000004,\"bad\":null,\"n\":3}");
}

TEST(Io, TableRendering) {
  io::Table t({"name", "value", "count", "flag"});
  t.add_row({std::string("a,b"), 0.5, 3LL, true});
  EXPECT_EQ(t.to_csv(), "name,value,count,flag\n\"a,b\",0.5,3,1\n");
  EXPECT_EQ(io::dump_json(t.to_json(), 0), "[{\"name\":\"a,b\",\"value\":0.5,\"count\":3,\"flag\":true}]");
  EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
  EXPECT_THROW(io::parse_format("xml"), ConfigError);
}

TEST(Verify, SingleCriterionPasses) {
  VerifyConfig c;
  c.criteria = {1};
  const auto r = run_verify_suite(c);
  EXPECT_EQ(r.overall(), CheckStatus::Pass);
  EXPECT_EQ(r.criterion_status(1), CheckStatus::Pass);
  EXPECT_EQ(r.checks.size(), 5u);
}

TEST(Verify, CriticalSpeedReportsNoWaveAsExpected) {
  VerifyConfig c;
  c.criteria = {3};
  c.wave_speeds = {};
  c.no_wave_speeds = {std::sqrt(2.0)};
  const auto r = run_verify_suite(c);
  ASSERT_EQ(r.checks.size(), 1u);
  EXPECT_EQ(r.checks[0].status, CheckStatus::Pass);
  EXPECT_NE(r.checks[0].detail.find("no monotone wave"), std::string::npos);
}

TEST(Verify, CrashesBecomeFailures) {
  VerifyConfig c;
  c.criteria = {3};
  c.wave_speeds = {std::nan("")};
  c.no_wave_speeds = {};
  const auto r = run_verify_suite(c);
  EXPECT_EQ(r.overall(), CheckStatus::Fail);
  EXPECT_EQ(r.checks.back().name, "c03.error");
}

TEST(Verify, ReportIsDeterministicAcrossThreads) {
  VerifyConfig c;
  c.quick = true;
  c.criteria = {7, 8, 10};
  c.threads = 1;
  const auto a = run_verify_suite(c).to_json();
  c.threads = 3;
  c.concurrent_checks = 2;
  const auto b = run_verify_suite(c).to_json();
  EXPECT_EQ(a, b);
}

TEST(Verify, ReportFormats) {
  VerifyReport r;
  r.checks.push_back({2, "x", CheckStatus::Skip, 1.0, 2.0, 0.1, ""});
  EXPECT_EQ(r.overall(), CheckStatus::Pass);
  r.checks.push_back({2, "y", CheckStatus::Fail, 1.0, 2.0, 0.1, "d"});
  EXPECT_EQ(r.overall(), CheckStatus::Fail);
  EXPECT_EQ(r.criterion_status(2), CheckStatus::Fail);
  EXPECT_EQ(r.criterion_status(5), CheckStatus::Skip);
  EXPECT_NE(r.to_text().find("overall: fail"), std::string::npos);
  EXPECT_NE(r.to_json().find("\"overall\": \"fail\""), std::string::npos);
  EXPECT_EQ(r.to_table().rows(), 2u);
}
