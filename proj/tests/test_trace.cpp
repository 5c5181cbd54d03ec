#include "hpcpred/error.hpp"
#include "hpcpred/trace.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace hpcpred {
namespace {

// id submit wait run alloc cpu mem req reqtime reqmem status uid gid exe queue part dep think
constexpr const char* kFixture = R"(; Version: 2.2
; MaxProcs: 64
1 0 10 100 4 90.5 -1 4 200 -1 1 7 3 12 2 -1 -1 -1
2 5 0 50 -1 -1 -1 8 -1 -1 1 8 3 12 1 -1 -1 -1
3 5 20 0 2 -1 -1 2 60 -1 5 7 4 -1 2 -1 -1 -1
)";

Trace fixture() {
    std::istringstream in(kFixture);
    return parse_swf(in);
}

TEST(ParseSwf, MatchesHandParseOfFixture) {
    const auto t = fixture();
    ASSERT_EQ(t.jobs.size(), 3u);
    EXPECT_EQ(t.header.comments.size(), 2u);
    ASSERT_TRUE(t.header.maxProcs);
    EXPECT_EQ(*t.header.maxProcs, 64);

    const auto& a = t.jobs[0];
    EXPECT_EQ(a.jobId, 1);
    EXPECT_EQ(a.submitTime, 0);
    EXPECT_EQ(a.waitTime, 10);
    EXPECT_EQ(a.runTime, 100);
    EXPECT_EQ(a.reqSize, 4);
    EXPECT_EQ(a.ert, 200);
    EXPECT_TRUE(a.ertKnown);
    EXPECT_EQ(a.userId, 7);
    EXPECT_EQ(a.groupId, 3);
    EXPECT_EQ(a.queueId, 2);
    EXPECT_EQ(a.status, JobStatus::Completed);
    EXPECT_EQ(a.startTime(), 10);
    EXPECT_EQ(a.endTime(), 110);

    // Unknown ert falls back to the runtime and is flagged.
    const auto& b = t.jobs[1];
    EXPECT_EQ(b.reqSize, 8);
    EXPECT_FALSE(b.ertKnown);
    EXPECT_EQ(b.ert, 50);

    EXPECT_EQ(t.jobs[2].status, JobStatus::Cancelled);
}

TEST(ParseSwf, HeaderOnlyFileKeepsMetadata) {
    std::istringstream in("; MaxProcs: 128\n; Note: nothing here\n");
    const auto t = parse_swf(in);
    EXPECT_TRUE(t.jobs.empty());
    EXPECT_EQ(t.header.comments.size(), 2u);
    EXPECT_EQ(t.header.maxProcs.value_or(0), 128);
}

TEST(ParseSwf, MalformedLineReportsLineNumber) {
    std::istringstream in("; c\n1 0 10 100 4 -1 -1 4 200 -1 1 7 3 12 2 -1 -1 -1\n1 2 3\n");
    try {
        (void)parse_swf(in);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(ParseSwf, SortsStablyBySubmitTime) {
    std::istringstream in("2 50 0 1 1 -1 -1 1 1 -1 1 1 1 -1 1 -1 -1 -1\n"
                          "1 10 0 1 1 -1 -1 1 1 -1 1 1 1 -1 1 -1 -1 -1\n"
                          "3 10 0 1 1 -1 -1 1 1 -1 1 1 1 -1 1 -1 -1 -1\n");
    const auto t = parse_swf(in);
    ASSERT_EQ(t.jobs.size(), 3u);
    EXPECT_EQ(t.jobs[0].jobId, 1);
    EXPECT_EQ(t.jobs[1].jobId, 3);
    EXPECT_EQ(t.jobs[2].jobId, 2);
}

TEST(ParseSwf, RoundTripsRetainedFields) {
    std::mt19937_64 rng(3);
    Trace t;
    t.header.comments = {"; MaxProcs: 512"};
    for (int i = 0; i < 200; ++i) {
        JobRecord j;
        j.jobId = i + 1;
        j.submitTime = i * 17;
        j.waitTime = static_cast<Seconds>(rng() % 1000);
        j.runTime = static_cast<Seconds>(rng() % 5000);
        j.reqSize = static_cast<std::int64_t>(rng() % 512) + 1;
        j.ert = j.runTime + static_cast<Seconds>(rng() % 100);
        j.userId = static_cast<std::int64_t>(rng() % 30);
        j.groupId = static_cast<std::int64_t>(rng() % 4);
        j.queueId = static_cast<std::int64_t>(rng() % 3);
        t.jobs.push_back(j);
    }
    std::stringstream buf;
    write_swf(buf, t);
    const auto back = parse_swf(buf);
    EXPECT_EQ(back.jobs, t.jobs);
    EXPECT_EQ(back.header.maxProcs.value_or(0), 512);
}

TEST(FilterCompleted, KeepsCompletedSubsequence) {
    const auto t = fixture();
    const auto f = filter_completed(t.jobs);
    ASSERT_EQ(f.jobs.size(), 2u);
    EXPECT_EQ(f.jobs[0].jobId, 1);
    EXPECT_EQ(f.jobs[1].jobId, 2);
    ASSERT_EQ(f.rejections.size(), 1u);
    EXPECT_EQ(f.rejections[0].jobId, 3);
}

TEST(FilterCompleted, UnknownRequestSizeIsRejected) {
    JobRecord j;
    j.jobId = 9;
    j.reqSize = kUnknown;
    const std::vector<JobRecord> jobs{j};
    const auto f = filter_completed(jobs);
    EXPECT_TRUE(f.jobs.empty());
    ASSERT_EQ(f.rejections.size(), 1u);
    std::ostringstream out;
    write_rejections_csv(out, f.rejections);
    EXPECT_EQ(out.str().substr(0, 13), "jobId,reason\n");
}

TEST(FilterCompleted, AllCancelledGivesEmpty) {
    std::vector<JobRecord> jobs(3);
    for (auto& j : jobs) {
        j.status = JobStatus::Cancelled;
    }
    EXPECT_TRUE(filter_completed(jobs).jobs.empty());
}

TEST(SystemSize, HeaderOrOverride) {
    TraceHeader h;
    EXPECT_THROW((void)system_size(h, std::nullopt), ConfigError);
    EXPECT_EQ(system_size(h, 32), 32);
    h.maxProcs = 64;
    EXPECT_EQ(system_size(h, std::nullopt), 64);
    EXPECT_EQ(system_size(h, 16), 16);
}

TEST(Split, DefaultMatchesReferenceIndices) {
    const auto s = default_split(60000);
    EXPECT_EQ(s.history.begin, 10000u);
    EXPECT_EQ(s.history.end, 16000u);
    EXPECT_EQ(s.validation.begin, 16000u);
    EXPECT_EQ(s.validation.end, 20000u);
    EXPECT_EQ(s.test.begin, 20000u);
    EXPECT_EQ(s.test.end, 60000u);
}

TEST(Split, DefaultScalesForShortTraces) {
    const auto s = default_split(6000);
    EXPECT_EQ(s.history.begin, 1000u);
    EXPECT_EQ(s.validation.begin, 1600u);
    EXPECT_EQ(s.test.begin, 2000u);
    EXPECT_EQ(s.test.end, 6000u);
}

TEST(Split, SlicesWithoutSharing) {
    std::vector<JobRecord> jobs(100);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        jobs[i].jobId = static_cast<std::int64_t>(i);
    }
    TraceSplit ranges;
    ranges.history = {0, 50};
    ranges.test = {50, 100};
    const auto parts = split(jobs, ranges);
    EXPECT_EQ(parts.history.size(), 50u);
    EXPECT_TRUE(parts.validation.empty());
    EXPECT_EQ(parts.test.size(), 50u);
    EXPECT_EQ(parts.test.front().jobId, 50);

    TraceSplit all;
    all.test = {0, 100};
    EXPECT_EQ(split(jobs, all).test.size(), 100u);
}

TEST(Split, RejectsOutOfRangeAndOverlap) {
    std::vector<JobRecord> jobs(10);
    TraceSplit bad;
    bad.test = {5, 11};
    EXPECT_THROW((void)split(jobs, bad), InvalidArgument);
    TraceSplit overlap;
    overlap.history = {0, 6};
    overlap.test = {5, 10};
    EXPECT_THROW((void)split(jobs, overlap), InvalidArgument);
}

} // namespace
} // namespace hpcpred
