#pragma once

#include "hpcpred/exectime.hpp"
#include "hpcpred/trace.hpp"

#include <cstdint>
#include <vector>

/// Synthetic workloads with known structure, used by the tests and to build
/// the bundled example traces.
namespace hpcpred::synth {

struct LinearLoadParams {
    std::int64_t processors = 1000;
    double intercept = 100.0;
    double slope = 200.0;
    /// Slopes of the companion tuples that share the validation period.
    std::vector<double> companionSlopes{150.0, 250.0};
    /// Validation: back-to-back segments of constant background load.
    std::size_t segments = 40;
    Seconds segmentLength = 7200;
    /// Gap between consecutive tuple submissions; longer than any run.
    Seconds spacing = 400;
    /// Background load after the validation period.
    double steadyLoad = 0.5;
    /// Steady-load time before the first test job.
    Seconds warmup = 7 * 86400;
    std::size_t testJobs = 2000;
    std::uint64_t seed = 1;
};

struct LinearLoadWorkload {
    Trace trace;
    /// Validation covers the varying-load period, test the main tuple's jobs
    /// after the warm-up.
    TraceSplit split;
    exectime::TupleKey key;
    std::int64_t processors = 0;
};

/// Single-processor tuple jobs that never overlap each other, run on top of
/// one background job per segment holding load*P processors. Every tuple job
/// therefore sees exactly the background load and runs for
/// intercept + slope*load seconds (rounded).
LinearLoadWorkload linear_load_workload(const LinearLoadParams& params = {});

struct SizeWaitParams {
    std::size_t jobs = 1500;
    std::int64_t processors = 512;
    std::vector<std::int64_t> sizes{1, 2, 4, 8, 16, 32, 64};
    double meanInterarrival = 120.0;
    std::uint64_t seed = 7;
};

/// Recorded waits are g(reqSize) = 300 + 60*reqSize exactly.
double size_wait(std::int64_t reqSize);
Trace size_dependent_wait_trace(const SizeWaitParams& params = {});

struct MoldableParams {
    std::size_t jobs = 2000;
    std::int64_t processors = 128;
    std::size_t users = 16;
    /// Large request sizes; each user also submits at a quarter of its size.
    std::vector<std::int64_t> largeSizes{32, 64};
    /// Share of a user's jobs submitted at the large size.
    double largeShare = 0.7;
    /// Runtime at size s is work * s^(-speedupExponent).
    double speedupExponent = 0.3;
    double offeredLoad = 1.2;
    /// Peak-to-mean arrival-rate swing over a day; 0 gives a flat rate.
    double diurnalAmplitude = 0.0;
    std::uint64_t seed = 11;
};

/// Moldable users whose small requests run sublinearly longer than their
/// large ones. Arrivals are Poisson, scaled to the requested offered load
/// (optionally modulated over the day), and the recorded waits come from an
/// EASY simulation of the trace itself.
Trace moldable_trace(const MoldableParams& params = {});

/// 2,000 jobs at offered load 1.2 on 128 processors.
Trace heavy_load_trace(std::uint64_t seed = 11);
/// Busy days and quiet nights around an average offered load of 0.8.
Trace diurnal_trace(std::uint64_t seed = 23);

/// Independent random jobs for scheduler property tests: sizes up to P,
/// runtimes up to a few hours, estimates at or above most runtimes.
std::vector<JobRecord> random_jobs(std::size_t count, std::int64_t processors, std::uint64_t seed);

/// Replaces every job's recorded wait with its EASY start under the given
/// machine size (estimates are the jobs' ert).
void record_easy_waits(std::vector<JobRecord>& jobs, std::int64_t processors);

} // namespace hpcpred::synth
