#include "hpcpred/synth.hpp"

#include "hpcpred/error.hpp"
#include "hpcpred/sched.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace hpcpred::synth {

namespace {

constexpr Seconds kDay = 86400;

JobRecord make_job(std::int64_t id, Seconds submit, Seconds run, std::int64_t size, Seconds ert,
                   std::int64_t user) {
    JobRecord j;
    j.jobId = id;
    j.submitTime = submit;
    j.runTime = run;
    j.reqSize = size;
    j.ert = ert;
    j.userId = user;
    j.groupId = 1;
    j.queueId = 1;
    return j;
}

Trace with_header(std::vector<JobRecord> jobs, std::int64_t processors, const std::string& comment) {
    Trace t;
    t.header.maxProcs = processors;
    t.header.comments.push_back("; Note: " + comment);
    t.header.comments.push_back("; MaxProcs: " + std::to_string(processors));
    t.jobs = std::move(jobs);
    return t;
}

/// Cumulative arrival intensity of rate 1 + a*sin(2*pi*t/day), per unit rate.
double intensity(double t, double a) {
    const double w = 2.0 * std::numbers::pi / static_cast<double>(kDay);
    return t + a / w * (1.0 - std::cos(w * t));
}

/// Inverse of intensity(); it is increasing for a < 1.
double inverse_intensity(double target, double a) {
    double lo = std::max(0.0, target - 2.0 * a * static_cast<double>(kDay));
    double hi = target + 2.0 * a * static_cast<double>(kDay) + 1.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (intensity(mid, a) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

LinearLoadWorkload linear_load_workload(const LinearLoadParams& p) {
    if (p.segments == 0 || p.spacing <= 0 || p.segmentLength <= 2 * p.spacing) {
        throw InvalidArgument("linear-load workload needs segments longer than two submission gaps");
    }
    std::vector<double> slopes{p.slope};
    slopes.insert(slopes.end(), p.companionSlopes.begin(), p.companionSlopes.end());
    const double maxRun = p.intercept + *std::max_element(slopes.begin(), slopes.end());
    if (maxRun >= static_cast<double>(p.spacing)) {
        throw InvalidArgument("tuple runs would overlap at this spacing");
    }

    // Every load level 0.05..0.95 appears in turn, in shuffled order.
    std::mt19937_64 rng(p.seed);
    std::vector<double> levels;
    for (int k = 1; k <= 19; ++k) {
        levels.push_back(0.05 * k);
    }
    std::vector<double> loads;
    while (loads.size() < p.segments) {
        std::shuffle(levels.begin(), levels.end(), rng);
        loads.insert(loads.end(), levels.begin(), levels.end());
    }
    loads.resize(p.segments);

    constexpr std::int64_t backgroundUser = 1000;
    auto run_for = [&](double slope, double load) {
        return static_cast<Seconds>(std::llround(p.intercept + slope * load));
    };

    std::vector<JobRecord> jobs;
    std::int64_t id = 1;
    std::size_t turn = 0;
    Seconds t = 0;
    for (double load : loads) {
        const auto procs = static_cast<std::int64_t>(std::llround(load * static_cast<double>(p.processors)));
        jobs.push_back(make_job(id++, t, p.segmentLength, procs, p.segmentLength, backgroundUser));
        for (Seconds s = t + p.spacing / 2; s + p.spacing <= t + p.segmentLength; s += p.spacing) {
            const std::size_t tuple = turn++ % slopes.size();
            jobs.push_back(make_job(id++, s, run_for(slopes[tuple], load), 1, p.spacing,
                                    static_cast<std::int64_t>(tuple) + 1));
        }
        t += p.segmentLength;
    }

    LinearLoadWorkload w;
    w.split.validation = {0, jobs.size()};
    const Seconds steadyStart = t;
    const Seconds firstTest = steadyStart + p.warmup;
    const Seconds steadyLength = p.warmup + static_cast<Seconds>(p.testJobs + 1) * p.spacing;
    const auto steadyProcs = static_cast<std::int64_t>(std::llround(p.steadyLoad * static_cast<double>(p.processors)));
    jobs.push_back(make_job(id++, steadyStart, steadyLength, steadyProcs, steadyLength, backgroundUser));
    const std::size_t testBegin = jobs.size();
    for (std::size_t k = 0; k < p.testJobs; ++k) {
        const Seconds s = firstTest + static_cast<Seconds>(k) * p.spacing;
        jobs.push_back(make_job(id++, s, run_for(p.slope, p.steadyLoad), 1, p.spacing, 1));
    }
    w.split.test = {testBegin, jobs.size()};
    w.key = exectime::TupleKey::of(jobs[testBegin]);
    w.processors = p.processors;
    w.trace = with_header(std::move(jobs), p.processors, "linear-load synthetic workload");
    return w;
}

double size_wait(std::int64_t reqSize) {
    return 300.0 + 60.0 * static_cast<double>(reqSize);
}

Trace size_dependent_wait_trace(const SizeWaitParams& p) {
    if (p.sizes.empty()) {
        throw InvalidArgument("size-dependent wait trace needs at least one size");
    }
    std::mt19937_64 rng(p.seed);
    std::exponential_distribution<double> gap(1.0 / p.meanInterarrival);
    std::uniform_int_distribution<std::size_t> pick(0, p.sizes.size() - 1);
    std::uniform_int_distribution<Seconds> run(60, 3600);
    std::uniform_real_distribution<double> over(1.0, 3.0);
    std::uniform_int_distribution<std::int64_t> user(1, 20);
    std::vector<JobRecord> jobs;
    double t = 0.0;
    for (std::size_t i = 0; i < p.jobs; ++i) {
        t += gap(rng);
        const auto size = p.sizes[pick(rng)];
        const Seconds r = run(rng);
        auto j = make_job(static_cast<std::int64_t>(i) + 1, static_cast<Seconds>(t), r, size,
                          static_cast<Seconds>(std::ceil(static_cast<double>(r) * over(rng))), user(rng));
        j.waitTime = static_cast<Seconds>(size_wait(size));
        jobs.push_back(j);
    }
    return with_header(std::move(jobs), p.processors, "recorded wait is a function of request size");
}

Trace moldable_trace(const MoldableParams& p) {
    if (p.users == 0 || p.largeSizes.empty()) {
        throw InvalidArgument("moldable trace needs users and sizes");
    }
    if (p.diurnalAmplitude < 0.0 || p.diurnalAmplitude >= 1.0) {
        throw InvalidArgument("diurnal amplitude must lie in [0, 1)");
    }
    std::mt19937_64 rng(p.seed);
    struct User {
        std::int64_t large;
        double work;
    };
    std::vector<User> users;
    std::uniform_real_distribution<double> baseRun(1800.0, 7200.0);
    for (std::size_t u = 0; u < p.users; ++u) {
        const auto large = p.largeSizes[u % p.largeSizes.size()];
        // Work chosen so the large-size runtime is baseRun.
        users.push_back({large, baseRun(rng) * std::pow(static_cast<double>(large), p.speedupExponent)});
    }

    std::uniform_int_distribution<std::size_t> pickUser(0, p.users - 1);
    std::bernoulli_distribution large(p.largeShare);
    std::uniform_real_distribution<double> noise(0.8, 1.2);
    std::uniform_real_distribution<double> over(1.0, 1.5);
    std::vector<JobRecord> jobs;
    double area = 0.0;
    for (std::size_t i = 0; i < p.jobs; ++i) {
        const auto u = pickUser(rng);
        const auto size = large(rng) ? users[u].large : std::max<std::int64_t>(1, users[u].large / 4);
        const double r = users[u].work * std::pow(static_cast<double>(size), -p.speedupExponent) * noise(rng);
        const auto run = static_cast<Seconds>(std::llround(r));
        const auto ert = static_cast<Seconds>(std::ceil(static_cast<double>(run) * over(rng)));
        jobs.push_back(make_job(static_cast<std::int64_t>(i) + 1, 0, run, size, ert,
                                static_cast<std::int64_t>(u) + 1));
        area += static_cast<double>(size * run);
    }

    // Arrivals at the mean rate that yields the offered load.
    const double meanGap = area / (p.offeredLoad * static_cast<double>(p.processors)) / static_cast<double>(p.jobs);
    std::exponential_distribution<double> gap(1.0 / meanGap);
    double v = 0.0;
    for (auto& j : jobs) {
        v += gap(rng);
        j.submitTime = static_cast<Seconds>(inverse_intensity(v, p.diurnalAmplitude));
    }
    record_easy_waits(jobs, p.processors);
    return with_header(std::move(jobs), p.processors, "moldable synthetic workload");
}

Trace heavy_load_trace(std::uint64_t seed) {
    MoldableParams p;
    p.seed = seed;
    auto t = moldable_trace(p);
    t.header.comments.front() = "; Note: heavy-load moldable synthetic workload";
    return t;
}

Trace diurnal_trace(std::uint64_t seed) {
    MoldableParams p;
    p.offeredLoad = 0.8;
    p.diurnalAmplitude = 0.8;
    p.seed = seed;
    auto t = moldable_trace(p);
    t.header.comments.front() = "; Note: diurnal moldable synthetic workload";
    return t;
}

std::vector<JobRecord> random_jobs(std::size_t count, std::int64_t processors, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(1.0 / 300.0);
    std::uniform_int_distribution<std::int64_t> size(1, processors);
    std::uniform_int_distribution<Seconds> run(0, 4 * 3600);
    std::uniform_real_distribution<double> over(0.8, 2.0);
    std::uniform_int_distribution<std::int64_t> user(1, 50);
    std::vector<JobRecord> jobs;
    double t = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        t += gap(rng);
        const Seconds r = run(rng);
        const auto ert = std::max<Seconds>(1, static_cast<Seconds>(std::ceil(static_cast<double>(r) * over(rng))));
        jobs.push_back(make_job(static_cast<std::int64_t>(i) + 1, static_cast<Seconds>(t), r, size(rng), ert,
                                user(rng)));
    }
    return jobs;
}

void record_easy_waits(std::vector<JobRecord>& jobs, std::int64_t processors) {
    const auto result = sched::run_simulation(sched::to_sim_jobs(jobs), processors);
    std::map<std::int64_t, const sched::ScheduledJob*> byId;
    for (const auto& s : result.jobs) {
        byId[s.jobId] = &s;
    }
    for (auto& j : jobs) {
        const auto it = byId.find(j.jobId);
        if (it == byId.end()) {
            throw InvalidArgument("job " + std::to_string(j.jobId) + " does not fit the machine");
        }
        j.waitTime = it->second->wait();
        j.runTime = it->second->run();
    }
}

} // namespace hpcpred::synth
