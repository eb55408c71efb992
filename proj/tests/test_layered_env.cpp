#include "splitq/layered_env.hpp"

#include <gtest/gtest.h>

#include <set>

#include "splitq/mdp_io.hpp"

using splitq::LayeredConfig;
using splitq::Outcome;
using splitq::TabularMdp;

TEST(LayeredEnv, ReferenceShape) {
  LayeredConfig cfg;  // m=20 n=10 k=2
  const TabularMdp mdp = splitq::generate_layered(cfg);
  EXPECT_EQ(mdp.num_states(), 201u);  // 1 + 20*10
  EXPECT_EQ(mdp.num_actions(0), 10u);
  for (splitq::StateId s = 1; s < mdp.num_states(); ++s) {
    const std::uint32_t level = splitq::layered_level(cfg, s);
    EXPECT_EQ(mdp.num_actions(s), level == cfg.m ? 1u : 2u);
    if (level < cfg.m) {
      for (splitq::ActionId a = 0; a < mdp.num_actions(s); ++a) {
        EXPECT_EQ(mdp.outcomes(s, a).size(), 2u);
      }
    }
  }
  EXPECT_TRUE(splitq::validate(mdp).empty());
}

TEST(LayeredEnv, SameSeedIsByteIdentical) {
  LayeredConfig cfg;
  cfg.m = 4;
  cfg.n = 3;
  cfg.seed = 123456;
  EXPECT_EQ(splitq::write_mdp_text(splitq::generate_layered(cfg)),
            splitq::write_mdp_text(splitq::generate_layered(cfg)));
  LayeredConfig other = cfg;
  other.seed = 123457;
  EXPECT_NE(splitq::write_mdp_text(splitq::generate_layered(cfg)),
            splitq::write_mdp_text(splitq::generate_layered(other)));
}

TEST(LayeredEnv, DegenerateSingleLevel) {
  LayeredConfig cfg;
  cfg.m = 1;
  cfg.n = 2;
  cfg.k = 3;  // unused: there are no intermediate levels
  const TabularMdp mdp = splitq::generate_layered(cfg);
  EXPECT_EQ(mdp.num_states(), 3u);
  EXPECT_EQ(mdp.num_actions(0), 2u);
  for (splitq::StateId s = 1; s <= 2; ++s) {
    EXPECT_EQ(mdp.num_actions(s), 1u);
    ASSERT_EQ(mdp.outcomes(s, 0).size(), 1u);
    EXPECT_EQ(mdp.outcomes(s, 0)[0].next_state, 0u);
    EXPECT_DOUBLE_EQ(mdp.outcomes(s, 0)[0].probability, 1.0);
  }
  EXPECT_TRUE(splitq::validate(mdp).empty());
}

TEST(LayeredEnv, IntermediatePairsSumExactlyToOne) {
  LayeredConfig cfg;
  cfg.m = 6;
  cfg.n = 5;
  cfg.k = 3;
  cfg.seed = 9;
  const TabularMdp mdp = splitq::generate_layered(cfg);
  for (splitq::StateId s = 1; s < mdp.num_states(); ++s) {
    if (splitq::layered_level(cfg, s) == cfg.m) continue;
    for (splitq::ActionId a = 0; a < mdp.num_actions(s); ++a) {
      const auto& outs = mdp.outcomes(s, a);
      ASSERT_EQ(outs.size(), 2u);
      EXPECT_EQ(outs[0].probability + outs[1].probability, 1.0);  // exact by construction
      EXPECT_GT(outs[0].probability, 0.0);
      EXPECT_GT(outs[1].probability, 0.0);
      EXPECT_NE(outs[0].next_state, outs[1].next_state);
    }
  }
}

TEST(LayeredEnv, TargetsLieOnNextLevel) {
  LayeredConfig cfg;
  cfg.m = 5;
  cfg.n = 4;
  cfg.seed = 17;
  const TabularMdp mdp = splitq::generate_layered(cfg);
  for (splitq::StateId s = 0; s < mdp.num_states(); ++s) {
    const std::uint32_t level = splitq::layered_level(cfg, s);
    for (splitq::ActionId a = 0; a < mdp.num_actions(s); ++a) {
      for (const Outcome& o : mdp.outcomes(s, a)) {
        const std::uint32_t target_level = splitq::layered_level(cfg, o.next_state);
        EXPECT_EQ(target_level, level == cfg.m ? 0u : level + 1);
      }
    }
  }
}

// Every trajectory returns to the hub in exactly m + 1 - level steps.
TEST(LayeredEnv, CycleLengthIsExact) {
  LayeredConfig cfg;
  cfg.m = 4;
  cfg.n = 3;
  cfg.k = 2;
  cfg.seed = 31;
  const TabularMdp mdp = splitq::generate_layered(cfg);
  for (splitq::StateId start = 0; start < mdp.num_states(); ++start) {
    const std::uint32_t expected = cfg.m + 1 - splitq::layered_level(cfg, start);
    // breadth-first over all action/outcome branches
    std::set<splitq::StateId> frontier{start};
    for (std::uint32_t step = 0; step < expected; ++step) {
      std::set<splitq::StateId> next;
      for (splitq::StateId s : frontier)
        for (splitq::ActionId a = 0; a < mdp.num_actions(s); ++a)
          for (const Outcome& o : mdp.outcomes(s, a)) next.insert(o.next_state);
      frontier = std::move(next);
      if (step + 1 < expected) {
        EXPECT_EQ(frontier.count(0), 0u);
      }
    }
    EXPECT_EQ(frontier, std::set<splitq::StateId>{0});
  }
}

TEST(LayeredEnv, RewardsStayInConfiguredRange) {
  LayeredConfig cfg;
  cfg.m = 3;
  cfg.n = 4;
  cfg.reward_low = -2.0;
  cfg.reward_high = -1.0;
  cfg.seed = 77;
  const TabularMdp mdp = splitq::generate_layered(cfg);
  for (splitq::StateId s = 0; s < mdp.num_states(); ++s)
    for (splitq::ActionId a = 0; a < mdp.num_actions(s); ++a)
      for (const Outcome& o : mdp.outcomes(s, a)) {
        EXPECT_GE(o.reward, -2.0);
        EXPECT_LE(o.reward, -1.0);
      }
}

TEST(LayeredEnv, ConfigInvariantsEnforced) {
  LayeredConfig cfg;
  cfg.m = 0;
  EXPECT_THROW(splitq::generate_layered(cfg), std::invalid_argument);
  cfg.m = 1;
  cfg.n = 1;
  EXPECT_THROW(splitq::generate_layered(cfg), std::invalid_argument);
  cfg.n = 2;
  cfg.k = 0;
  EXPECT_THROW(splitq::generate_layered(cfg), std::invalid_argument);
  cfg.k = 1;
  cfg.reward_low = 2.0;
  cfg.reward_high = 1.0;
  EXPECT_THROW(splitq::generate_layered(cfg), std::invalid_argument);
}
