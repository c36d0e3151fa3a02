#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "percept_ops.h"

namespace {

const std::string kFix = PERCEPT_TEST_FIXTURES;

std::string run(const char* cmd, const std::string& opts, pops_status expect = POPS_OK) {
  char* out = nullptr;
  const pops_status st = pops_run(cmd, opts.c_str(), &out);
  EXPECT_EQ(st, expect) << pops_last_error();
  std::string s = out ? out : "";
  pops_string_free(out);
  return s;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(pops_version(), "");
  EXPECT_STREQ(pops_status_name(POPS_OK), "ok");
  EXPECT_STREQ(pops_status_name(POPS_ERR_SCHEMA), "schema error");
}

TEST(CApi, ContextRoundTripAndAngles) {
  pops_context* ctx = nullptr;
  ASSERT_EQ(pops_context_default(POPS_CHART_CURVE, &ctx), POPS_OK);
  double deg = 0, back = 0;
  ASSERT_EQ(pops_value_to_va(ctx, POPS_AXIS_Y, 1.0, &deg), POPS_OK);
  EXPECT_GT(deg, 0.0);
  ASSERT_EQ(pops_va_to_value(ctx, POPS_AXIS_Y, deg, &back), POPS_OK);
  EXPECT_NEAR(back, 1.0, 1e-12);

  char* json = nullptr;
  ASSERT_EQ(pops_context_to_json(ctx, &json), POPS_OK);
  pops_context* copy = nullptr;
  ASSERT_EQ(pops_context_from_json(json, &copy), POPS_OK);
  pops_string_free(json);
  double deg2 = 0;
  ASSERT_EQ(pops_value_to_va(copy, POPS_AXIS_Y, 1.0, &deg2), POPS_OK);
  EXPECT_EQ(deg, deg2);
  pops_context_free(copy);
  pops_context_free(ctx);
}

TEST(CApi, ErrorsAreReported) {
  pops_context* ctx = nullptr;
  EXPECT_EQ(pops_context_from_json("{\"distance_cm\": -1}", &ctx), POPS_ERR_SCHEMA);
  EXPECT_EQ(ctx, nullptr);
  EXPECT_NE(std::strlen(pops_last_error()), 0u);
  EXPECT_EQ(pops_context_default(POPS_CHART_CURVE, nullptr), POPS_ERR_ARGUMENT);
  pops_sgt* d = nullptr;
  EXPECT_EQ(pops_sgt_create(0, 1, 0, 2.0, 0.5, &d), POPS_ERR_DOMAIN);
  EXPECT_NE(std::string(pops_last_error()).find("moment"), std::string::npos);
  EXPECT_EQ(pops_run("nonsense", "{}", nullptr), POPS_ERR_ARGUMENT);
  EXPECT_EQ(pops_run("va", "{\"value\": 1, \"bogus\": 2}", nullptr), POPS_ERR_ARGUMENT);
}

TEST(CApi, SgtHandle) {
  pops_sgt* d = nullptr;
  ASSERT_EQ(pops_sgt_create(-1.1, 0.7, -0.1, 4.6, 31.7, &d), POPS_OK);
  double mode = 0, c = 0, q = 0, f = 0;
  ASSERT_EQ(pops_sgt_mode(d, &mode), POPS_OK);
  EXPECT_EQ(mode, -1.1);
  ASSERT_EQ(pops_sgt_cdf(d, 0.3, &c), POPS_OK);
  ASSERT_EQ(pops_sgt_quantile(d, c, &q), POPS_OK);
  EXPECT_NEAR(q, 0.3, 1e-8);
  ASSERT_EQ(pops_sgt_pdf(d, mode, &f), POPS_OK);
  EXPECT_GT(f, 0.0);
  EXPECT_EQ(pops_sgt_quantile(d, 1.5, &q), POPS_ERR_DOMAIN);
  pops_sgt_free(d);
}

TEST(CApi, RunCommands) {
  auto va = run("va", "{\"value\": 1, \"axis\": \"y\", \"displacement\": true}");
  EXPECT_NE(va.find("\"degrees\""), std::string::npos);

  auto ok = run("validate", "{\"schema\": \"trials\", \"file\": \"" + kFix + "/trials_small.csv\"}");
  EXPECT_NE(ok.find("\"valid\":true"), std::string::npos) << ok;
  auto bad = run("validate", "{\"schema\": \"trials\", \"file\": \"" + kFix + "/trials_missing_distance.csv\"}");
  EXPECT_NE(bad.find("\"valid\":false"), std::string::npos);
  EXPECT_NE(bad.find("distance_cm"), std::string::npos);

  const std::string dir = std::string(P_tmpdir) + "/percept_capi_test";
  run("gen-stimuli", "{\"kind\": \"gbm\", \"n\": 1, \"seed\": 3, \"out\": \"" + dir + "-stimuli.json\"}");
  run("predict", "{\"params\": \"" + kFix + "/synthetic_truth.json\", \"stimuli\": \"" + dir +
                     "-stimuli.json\", \"all_strategies\": true, \"draws\": 100, \"out_dir\": \"" + dir + "\"}");
  FILE* f = std::fopen((dir + "/summary.csv").c_str(), "r");
  ASSERT_NE(f, nullptr);
  int lines = 0;
  for (int ch; (ch = std::fgetc(f)) != EOF;) lines += ch == '\n';
  std::fclose(f);
  EXPECT_EQ(lines, 1 + 6 * 4);  // header + 6 strategies x 4 stimuli
  std::remove((dir + "-stimuli.json").c_str());
  std::remove((dir + "-stimuli.json.manifest.json").c_str());
  for (auto name : {"/summary.csv", "/predictions.csv", "/manifest.json"}) std::remove((dir + name).c_str());
  std::remove(dir.c_str());

  run("predict", "{\"params\": \"" + kFix + "/synthetic_truth.json\", \"stimuli\": \"" + kFix +
                     "/scatter_61_points.json\", \"strategies\": \"twice:mean\", \"out_dir\": \"" + dir + "\"}",
      POPS_ERR_SCHEMA);
}
