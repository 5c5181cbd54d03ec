#include "hpcpred/config.hpp"
#include "hpcpred/error.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace hpcpred {
namespace {

TEST(Config, DefaultsValidate) {
    ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.wait.historySize, 4000u);
    EXPECT_DOUBLE_EQ(c.delayThreshold, 0.3);
    EXPECT_DOUBLE_EQ(c.rangeSet.mergeThreshold, 0.5);
    EXPECT_EQ(c.loadFunctions.topK, 25u);
}

TEST(Config, ReadsPairsWithComments) {
    std::istringstream in("# comment\ntrace = a.swf\n\n  qwait.eps=0.07  # trailing\n");
    const auto pairs = read_config_pairs(in);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].first, "trace");
    EXPECT_EQ(pairs[0].second, "a.swf");
    EXPECT_EQ(pairs[1].first, "qwait.eps");
    EXPECT_EQ(pairs[1].second, "0.07");
}

TEST(Config, SetsKnobsAndEnums) {
    ExperimentConfig c;
    c.set("qwait.eps", "0.08");
    c.set("qwait.mode", "distributions");
    c.set("sched.tie-order", "arrivals-first");
    c.set("mode", "simulate-delay");
    c.set("split.test", "10:20");
    c.set("tune.qwait.eps", "0.05,0.1");
    EXPECT_DOUBLE_EQ(c.wait.cluster.eps, 0.08);
    EXPECT_DOUBLE_EQ(c.numeric("qwait.eps"), 0.08);
    EXPECT_EQ(c.waitMode, qwait::StatisticMode::Distributions);
    EXPECT_EQ(c.tieOrder, sched::TieOrder::ArrivalsFirst);
    EXPECT_EQ(c.mode, Mode::SimulateDelay);
    ASSERT_TRUE(c.split);
    EXPECT_EQ(c.split->test.begin, 10u);
    EXPECT_EQ(c.split->test.end, 20u);
    EXPECT_EQ(c.tuneGrids.at("qwait.eps").size(), 2u);
    c.set("qwait.mode", "auto");
    EXPECT_FALSE(c.waitMode);
}

TEST(Config, RejectsOutOfRangeAndUnknown) {
    ExperimentConfig c;
    EXPECT_THROW(c.set("qwait.eps", "0.5"), ConfigError);
    EXPECT_THROW(c.set("qwait.history-size", "100"), ConfigError);
    EXPECT_THROW(c.set("qwait.nope", "1"), ConfigError);
    EXPECT_THROW(c.set("qwait.eps", "abc"), ConfigError);
    EXPECT_THROW(c.set("mode", "fly"), ConfigError);
    EXPECT_THROW(c.set("seed", "-1"), ConfigError);
    EXPECT_THROW(c.set("tune.qwait.nope", "1"), ConfigError);
    // Grid values are range-checked on validation.
    c.set("tune.qwait.eps", "0.05,0.9");
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, FileThenOverrides) {
    const auto path = std::filesystem::temp_directory_path() / "hpcpred_test_config.conf";
    {
        std::ofstream out(path);
        out << "qwait.eps = 0.06\nmanager.delay-threshold = 0.4\n";
    }
    const auto c = load_config(path.string(), {{"qwait.eps", "0.09"}});
    EXPECT_DOUBLE_EQ(c.wait.cluster.eps, 0.09);
    EXPECT_DOUBLE_EQ(c.delayThreshold, 0.4);
    std::filesystem::remove(path);
    EXPECT_THROW((void)load_config("/nonexistent/hpcpred.conf"), ConfigError);
}

TEST(Config, WriteReadsBack) {
    ExperimentConfig c;
    c.set("qwait.bins", "12");
    c.set("split.history", "0:5");
    c.set("tune.exec.compaction", "0.1,0.2");
    std::stringstream buf;
    c.write(buf);
    ExperimentConfig back;
    for (const auto& [k, v] : read_config_pairs(buf)) {
        back.set(k, v);
    }
    EXPECT_EQ(back.wait.bins, 12u);
    ASSERT_TRUE(back.split);
    EXPECT_EQ(back.split->history.end, 5u);
    EXPECT_EQ(back.tuneGrids, c.tuneGrids);
}

TEST(Config, WindowMustCoverInterval) {
    ExperimentConfig c;
    c.set("load.window", "100");
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, PolicyConfigCarriesKnobs) {
    ExperimentConfig c;
    c.set("qwait.mode", "distributions");
    c.set("manager.slack", "0.1");
    const auto p = c.policy_config(policy::Policy::Delay, 128);
    EXPECT_EQ(p.processors, 128);
    EXPECT_EQ(p.wait.mode, qwait::StatisticMode::Distributions);
    EXPECT_DOUBLE_EQ(p.futureSlack, 0.1);
}

} // namespace
} // namespace hpcpred
