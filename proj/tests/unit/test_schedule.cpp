#include <chunkstore/chunkstore.hpp>
#include <gtest/gtest.h>

using namespace chunkstore;

namespace {

using Steps = std::vector<std::uint64_t>;

}  // namespace

TEST(Schedule, NextIntervalExamples) {
  // 20-token source, i_min 2, i_max 16.
  EXPECT_EQ(next_interval(1, 2, 16, 20), 2u);
  EXPECT_EQ(next_interval(3, 2, 16, 20), 4u);
  EXPECT_EQ(next_interval(7, 2, 16, 20), 13u);
  EXPECT_EQ(next_interval(20, 2, 16, 20), 16u);
  EXPECT_EQ(next_interval(36, 2, 16, 20), 16u);
}

TEST(Schedule, GeometricWorkedExample) {
  auto cfg = ScheduleConfig::geometric(2, 16);
  EXPECT_EQ(schedule_steps(cfg, 20, 60), (Steps{1, 3, 7, 20, 36, 52}));
}

TEST(Schedule, VaryingChunkSizes) {
  auto cfg = ScheduleConfig::geometric(2, 16);
  cfg.vary_chunk = true;
  std::vector<std::uint32_t> sizes;
  for (std::uint64_t t : schedule_steps(cfg, 20, 52)) {
    if (t == 52) break;
    sizes.push_back(chunk_size_at(cfg, 16, interval_after(cfg, t, 20)));
  }
  EXPECT_EQ(sizes, (std::vector<std::uint32_t>{2, 4, 13, 16, 16}));
  cfg.vary_chunk = false;
  EXPECT_EQ(chunk_size_at(cfg, 16, 2), 16u);
}

TEST(Schedule, VaryExceedsStored) {
  auto cfg = ScheduleConfig::geometric(2, 16);
  cfg.vary_chunk = true;
  try {
    chunk_size_at(cfg, 8, 13);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kVaryExceedsStored);
  }
}

TEST(Schedule, FixedIntervals) {
  EXPECT_EQ(schedule_steps(ScheduleConfig::fixed(6), 10, 20), (Steps{1, 7, 13, 19}));
  EXPECT_EQ(schedule_steps(ScheduleConfig::fixed(1), 10, 5), (Steps{1, 2, 3, 4, 5}));
  for (std::uint32_t i = 1; i <= 9; ++i) {
    for (std::uint64_t n = 1; n <= 40; ++n) {
      EXPECT_EQ(schedule_steps(ScheduleConfig::fixed(i), 10, n).size(), (n + i - 1) / i);
    }
  }
}

TEST(Schedule, DegenerateGeometricIsFixed) {
  for (std::uint32_t m : {1u, 3u, 8u}) {
    for (std::size_t len : {1u, 7u, 40u}) {
      EXPECT_EQ(schedule_steps(ScheduleConfig::geometric(m, m), len, 100),
                schedule_steps(ScheduleConfig::fixed(m), len, 100));
    }
  }
}

TEST(Schedule, IntervalsNeverShrink) {
  for (std::size_t len : {1u, 5u, 13u, 50u, 200u}) {
    auto cfg = ScheduleConfig::geometric(1, 32);
    auto steps = schedule_steps(cfg, len, 400);
    for (std::size_t i = 2; i < steps.size(); ++i) {
      EXPECT_GE(steps[i] - steps[i - 1], steps[i - 1] - steps[i - 2]);
      EXPECT_LE(steps[i] - steps[i - 1], 32u);
    }
    EXPECT_EQ(steps.front(), 1u);
  }
}

TEST(Schedule, StateWalkerMatchesSteps) {
  auto cfg = ScheduleConfig::geometric(2, 16);
  ScheduleState st(cfg, 20);
  Steps fired;
  for (std::uint64_t t = 1; t <= 60; ++t) {
    if (st.fires(t)) {
      fired.push_back(t);
      EXPECT_EQ(st.last_retrieval(), t);
      EXPECT_EQ(st.next_retrieval(), t + st.current_interval());
    }
  }
  EXPECT_EQ(fired, schedule_steps(cfg, 20, 60));
}

TEST(Schedule, ParseAndDescribe) {
  auto f = parse_schedule("fixed:6");
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->mode, ScheduleMode::kFixed);
  EXPECT_EQ(f->interval, 6u);
  EXPECT_EQ(f->describe(), "fixed(6)");
  auto g = parse_schedule("geometric:2:16");
  ASSERT_TRUE(g.has_value());
  EXPECT_EQ(g->i_min, 2u);
  EXPECT_EQ(g->i_max, 16u);
  EXPECT_EQ(g->describe(), "geometric(2,16)");
  for (const char* bad : {"fixed", "fixed:", "fixed:-1", "geometric:2", "geo:2:16", "fixed:6:1", ""}) {
    EXPECT_FALSE(parse_schedule(bad).has_value()) << bad;
  }
}

TEST(Schedule, ValidateRejectsBadConfigs) {
  auto zero = ScheduleConfig::fixed(0);
  EXPECT_THROW(zero.validate(), Error);
  auto inverted = ScheduleConfig::geometric(8, 4);
  EXPECT_THROW(inverted.validate(), Error);
  EXPECT_THROW(ScheduleState(inverted, 10), Error);
  EXPECT_NO_THROW(ScheduleConfig::geometric(4, 4).validate());
}
