#include "splitq/config_parse.hpp"

#include <gtest/gtest.h>

#include <string>

using splitq::AgentKind;
using splitq::ConfigError;
using splitq::ExperimentConfig;

namespace {

const char* kMinimal =
    "[environment]\n"
    "m = 2\n"
    "n = 2\n"
    "k = 2\n"
    "seed = 1\n"
    "\n"
    "[learner]\n"
    "agent = split_q\n";

ConfigError::Kind kind_of(const std::string& text) {
  try {
    splitq::parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.kind();
  }
  throw std::logic_error("expected a ConfigError");
}

}  // namespace

TEST(ParseConfig, MinimalConfigFillsDocumentedDefaults) {
  const ExperimentConfig cfg = splitq::parse_config_text(kMinimal);
  EXPECT_EQ(cfg.env.m, 2u);
  EXPECT_EQ(cfg.env.seed, 1u);
  EXPECT_DOUBLE_EQ(cfg.env.reward_low, 0.0);
  EXPECT_DOUBLE_EQ(cfg.env.reward_high, 1.0);
  ASSERT_EQ(cfg.agents.size(), 1u);
  const splitq::AgentConfig& a = cfg.agents[0].config;
  EXPECT_EQ(cfg.agents[0].name, "learner");
  EXPECT_EQ(cfg.agents[0].kind, AgentKind::split_q);
  EXPECT_DOUBLE_EQ(a.alpha, 0.1);
  EXPECT_DOUBLE_EQ(a.gamma, 0.9);
  EXPECT_DOUBLE_EQ(a.epsilon, 0.1);
  EXPECT_EQ(a.epsilon_off_step, splitq::kNeverStep);
  EXPECT_DOUBLE_EQ(a.r_max, 1.0);  // environment reward_high
  EXPECT_DOUBLE_EQ(a.r_min, 0.0);
  EXPECT_DOUBLE_EQ(a.sigma_init, 0.5);
  EXPECT_DOUBLE_EQ(a.ewma_beta, 0.1);  // follows alpha
  EXPECT_EQ(a.sampler_mode, splitq::SamplerMode::paper_rejection);
  EXPECT_TRUE(a.unknown_enabled);
  EXPECT_EQ(cfg.steps, 1000u);
  EXPECT_EQ(cfg.trials, 100u);
  EXPECT_EQ(cfg.smoothing_window, 100u);
  EXPECT_EQ(cfg.output_path, "out");
}

TEST(ParseConfig, EwmaBetaFollowsExplicitAlpha) {
  const ExperimentConfig cfg = splitq::parse_config_text(
      "[a]\nagent = split_q\nalpha = 0.25\n");
  EXPECT_DOUBLE_EQ(cfg.agents[0].config.ewma_beta, 0.25);
}

TEST(ParseConfig, RewardBoundsFeedAgentDefaults) {
  const ExperimentConfig cfg = splitq::parse_config_text(
      "[environment]\nreward_low = -1\nreward_high = 3\n[a]\nagent = q_learning\n");
  EXPECT_DOUBLE_EQ(cfg.agents[0].config.r_max, 3.0);
  EXPECT_DOUBLE_EQ(cfg.agents[0].config.r_min, -1.0);
}

TEST(ParseConfig, OutOfRangeEpsilonNamesKeyAndBound) {
  try {
    splitq::parse_config_text("[a]\nagent = q_learning\nepsilon = 1.5\n");
    FAIL() << "expected out-of-range error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigError::Kind::out_of_range);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epsilon"), std::string::npos);
    EXPECT_NE(msg.find("1"), std::string::npos);
  }
}

TEST(ParseConfig, DistinctErrorKinds) {
  EXPECT_EQ(kind_of("[a]\nagent = split_q\nbogus = 1\n"), ConfigError::Kind::unknown_key);
  EXPECT_EQ(kind_of("[a]\nagent = split_q\nalpha = 0\n"), ConfigError::Kind::out_of_range);
  EXPECT_EQ(kind_of("[a]\nagent = wibble\n"), ConfigError::Kind::out_of_range);
  EXPECT_EQ(kind_of("[a]\nnothing here\n"), ConfigError::Kind::syntax);
  EXPECT_EQ(kind_of("alpha = 0.1\n"), ConfigError::Kind::syntax);
  EXPECT_EQ(kind_of("[a]\nagent = split_q\n[a]\n"), ConfigError::Kind::duplicate);
  EXPECT_EQ(kind_of("[a]\nalpha = 0.1\nalpha = 0.2\n"), ConfigError::Kind::duplicate);
  EXPECT_EQ(kind_of("[a]\nalpha = 0.1\n"), ConfigError::Kind::missing_key);  // no agent kind
  try {
    splitq::parse_config_file("/nonexistent/config.cfg");
    FAIL() << "expected missing-file error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigError::Kind::missing_file);
  }
}

TEST(ParseConfig, SyntaxErrorsCarryLineNumbers) {
  try {
    splitq::parse_config_text("[environment]\nm = 2\noops\n");
    FAIL() << "expected syntax error";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.kind(), ConfigError::Kind::syntax);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParseConfig, EpsilonOffStepAcceptsNeverAndNumbers) {
  const ExperimentConfig cfg = splitq::parse_config_text(
      "[a]\nagent = q_learning\nepsilon_off_step = 5000\n"
      "[b]\nagent = q_learning\nepsilon_off_step = never\n");
  EXPECT_EQ(cfg.agents[0].config.epsilon_off_step, 5000u);
  EXPECT_EQ(cfg.agents[1].config.epsilon_off_step, splitq::kNeverStep);
}

TEST(ParseConfig, CommentsAndBlankLinesIgnored) {
  const ExperimentConfig cfg = splitq::parse_config_text(
      "# top comment\n\n[environment]\n# inner\nm = 3\n\n[a]\nagent = split_q\n");
  EXPECT_EQ(cfg.env.m, 3u);
}

TEST(ResolvedConfig, EchoRoundTripsExactly) {
  ExperimentConfig cfg = splitq::parse_config_text(kMinimal);
  cfg.agents[0].config.alpha = 0.3;
  cfg.agents[0].config.ewma_beta = 0.07;
  cfg.agents[0].config.epsilon_off_step = 1234;
  cfg.agents[0].config.sampler_mode = splitq::SamplerMode::exact_dirichlet;
  cfg.agents[0].config.unknown_enabled = false;
  cfg.agents[0].config.stats_mode = splitq::StatMode::cumulative;
  cfg.agents[0].config.alpha_decay = splitq::AlphaDecay::inverse_count;
  cfg.agents[0].config.r_max = 2.125;
  cfg.env.reward_high = 2.125;
  cfg.env.reward_low = -0.5;
  cfg.agents[0].config.r_min = -0.5;
  cfg.steps = 777;
  cfg.trials = 3;
  cfg.master_seed = 999;
  cfg.smoothing_window = 10;
  cfg.output_path = "result_dir";

  const std::string echoed = splitq::write_resolved_config(cfg);
  const ExperimentConfig back = splitq::parse_config_text(echoed);
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(splitq::write_resolved_config(back), echoed);
}

TEST(ResolvedConfig, RoundTripSurvivesAwkwardReals) {
  ExperimentConfig cfg = splitq::parse_config_text(kMinimal);
  cfg.agents[0].config.alpha = 1.0 / 3.0;
  cfg.agents[0].config.gamma = 0.1234567890123456;
  cfg.env.reward_high = 1e-7;
  cfg.env.reward_low = -1e-7;
  cfg.agents[0].config.r_max = 1e-7;
  cfg.agents[0].config.r_min = -1e-7;
  const ExperimentConfig back = splitq::parse_config_text(splitq::write_resolved_config(cfg));
  EXPECT_EQ(back, cfg);
}
