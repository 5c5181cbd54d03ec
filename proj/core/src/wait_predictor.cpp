#include "hpcpred/wait_predictor.hpp"

#include "hpcpred/csv.hpp"
#include "hpcpred/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <queue>

namespace hpcpred::qwait {

std::string_view to_string(StatisticMode m) {
    return m == StatisticMode::Distributions ? "distributions" : "feature";
}

std::string_view to_string(WaitModel m) {
    switch (m) {
    case WaitModel::Sdm: return "sdm";
    case WaitModel::Ridge: return "ridge";
    case WaitModel::WeightedAverage: return "weighted-average";
    }
    return "?";
}

WaitPredictor::WaitPredictor(WaitPredictorConfig config) : config_(config), history_(config.historySize) {
    if (config_.historySize == 0) {
        throw InvalidArgument("history size must be positive");
    }
    if (config_.weightStride == 0) {
        config_.weightStride = 1;
    }
}

void WaitPredictor::add_history(WaitHistoryEntry entry) {
    history_.push(std::move(entry));
    ++sinceRefresh_;
    if (history_.size() >= 3 && (!weightsFitted_ || sinceRefresh_ >= config_.weightStride)) {
        refresh_weights();
    }
}

void WaitPredictor::refresh_weights() {
    std::vector<WeightSample> samples;
    samples.reserve(history_.size());
    for (const auto& h : history_) {
        samples.push_back({&h.state, h.wait});
    }
    weights_ = compute_weights(samples);
    const double sum =
        config_.mode == StatisticMode::Distributions ? weights_.distribution_sum() : weights_.feature_sum();
    if (!(sum > 0.0)) {
        // No feature correlates with the wait; compare on equal footing.
        weights_ = WeightVector::uniform();
    }
    weightsFitted_ = true;
    sinceRefresh_ = 0;
}

std::vector<double> WaitPredictor::feature_distances(const JobState& target) const {
    WeightVector w = weights_;
    if (!(w.feature_sum() > 0.0)) {
        w = WeightVector::uniform();
    }
    FeatureBounds bounds{target.features, target.features};
    for (const auto& h : history_) {
        bounds.include(h.state.features);
    }
    std::vector<double> d;
    d.reserve(history_.size());
    for (const auto& h : history_) {
        d.push_back(feature_distance(target.features, h.state.features, w, bounds,
                                     target.ertKnown && h.state.ertKnown));
    }
    return d;
}

std::vector<double> WaitPredictor::distribution_distances(const JobState& target) const {
    WeightVector w = weights_;
    if (!(w.distribution_sum() > 0.0)) {
        w = WeightVector::uniform();
    }
    DistributionNormalizer norm;
    norm.ertMin = norm.ertMax = target.features[1];
    std::vector<std::array<double, kPopulations>> chi;
    chi.reserve(history_.size());
    for (const auto& h : history_) {
        norm.ertMin = std::min(norm.ertMin, h.state.features[1]);
        norm.ertMax = std::max(norm.ertMax, h.state.features[1]);
        auto& c = chi.emplace_back();
        for (std::size_t p = 0; p < kPopulations; ++p) {
            c[p] = chi_square(target.distributions[p], h.state.distributions[p]);
            norm.chiMax[p] = std::max(norm.chiMax[p], c[p]);
        }
    }
    std::vector<double> d;
    d.reserve(history_.size());
    for (std::size_t i = 0; i < history_.size(); ++i) {
        d.push_back(distribution_distance(target, history_[i].state, w, norm, chi[i]));
    }
    return d;
}

std::vector<double> WaitPredictor::distances(const JobState& target) const {
    return config_.mode == StatisticMode::Distributions ? distribution_distances(target) : feature_distances(target);
}

Neighborhood WaitPredictor::neighborhood(const std::vector<double>& d) const {
    std::vector<ScoredJob> scored;
    scored.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        scored.push_back({d[i], history_[i].wait, i});
    }
    return Neighborhood::from_scores(std::move(scored));
}

WaitPrediction WaitPredictor::predict(const JobState& target) const {
    if (history_.empty()) {
        throw ColdStartError("wait predictor has no history");
    }
    Neighborhood hood = neighborhood(distances(target));
    hood.classification = classify_neighborhood(hood, config_.cluster);

    WaitPrediction out;
    out.neighborhood = hood.classification;
    if (hood.classification == NeighborhoodCase::DenseCluster) {
        if (auto sdm = predict_sdm(hood, config_.sdm)) {
            out.seconds = std::max(0.0, *sdm);
            out.model = WaitModel::Sdm;
            return out;
        }
    }
    std::vector<FeatureVector> features;
    features.reserve(history_.size());
    for (const auto& h : history_) {
        features.push_back(h.state.features);
    }
    if (auto ridge = predict_ridge(hood, features, target.features, config_.ridge); ridge && *ridge >= 0.0) {
        out.seconds = *ridge;
        out.model = WaitModel::Ridge;
        return out;
    }
    // Weighted average always ranks neighbors by the feature-summary distance.
    const Neighborhood byFeatures =
        config_.mode == StatisticMode::FeatureSummary ? std::move(hood) : neighborhood(feature_distances(target));
    out.seconds = std::max(0.0, predict_weighted_average(byFeatures, config_.neighbors));
    out.model = WaitModel::WeightedAverage;
    return out;
}

std::vector<WaitSample> build_wait_samples(std::span<const JobRecord> jobs, const HistogramBinning& binning) {
    std::vector<WaitSample> out;
    out.reserve(jobs.size());
    TraceReplayer replayer(jobs);
    while (!replayer.done()) {
        auto step = replayer.next();
        WaitSample s;
        s.job = *step.job;
        s.state = build_state(step.snapshot, *step.job, binning);
        s.waitingCount = step.snapshot.waiting.size();
        s.runningCount = step.snapshot.running.size();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<WaitOutcome> evaluate_online(std::span<const WaitSample> samples, IndexRange eval,
                                         const WaitPredictorConfig& config) {
    if (eval.end > samples.size()) {
        throw InvalidArgument("evaluation range exceeds the sample count");
    }
    WaitPredictor predictor(config);
    using Pending = std::pair<Seconds, std::size_t>;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending;
    std::vector<WaitOutcome> out;
    out.reserve(eval.size());
    for (std::size_t i = 0; i < eval.end; ++i) {
        const auto& s = samples[i];
        while (!pending.empty() && pending.top().first <= s.job.submitTime) {
            const auto& h = samples[pending.top().second];
            predictor.add_history({h.job.jobId, h.state, static_cast<double>(h.job.waitTime)});
            pending.pop();
        }
        if (i >= eval.begin && predictor.history_size() > 0) {
            WaitOutcome o;
            o.jobId = s.job.jobId;
            o.prediction = predictor.predict(s.state);
            o.actual = static_cast<double>(s.job.waitTime);
            o.response = static_cast<double>(s.job.responseTime());
            out.push_back(o);
        }
        pending.emplace(s.job.startTime(), i);
    }
    return out;
}

namespace {

double outcome_aae(std::span<const WaitOutcome> outcomes) {
    if (outcomes.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (const auto& o : outcomes) {
        s += std::abs(o.prediction.seconds - o.actual);
    }
    return s / static_cast<double>(outcomes.size());
}

} // namespace

ModeChoice choose_statistic_mode(std::span<const WaitSample> samples, IndexRange training,
                                 const WaitPredictorConfig& config) {
    ModeChoice choice;
    if (training.empty()) {
        choice.defaulted = true;
        return choice;
    }
    auto cfg = config;
    cfg.mode = StatisticMode::Distributions;
    choice.aaeDistributions = outcome_aae(evaluate_online(samples, training, cfg));
    cfg.mode = StatisticMode::FeatureSummary;
    choice.aaeFeatureSummary = outcome_aae(evaluate_online(samples, training, cfg));
    choice.mode = choice.aaeDistributions < choice.aaeFeatureSummary ? StatisticMode::Distributions
                                                                      : StatisticMode::FeatureSummary;
    return choice;
}

void write_wait_diagnostics_csv(std::ostream& out, std::span<const WaitOutcome> outcomes) {
    out << "jobId,modelUsed,neighborhood,prediction,actual,response\n";
    for (const auto& o : outcomes) {
        out << o.jobId << ',' << to_string(o.prediction.model) << ',' << to_string(o.prediction.neighborhood) << ','
            << csv::num(o.prediction.seconds) << ',' << csv::num(o.actual) << ',' << csv::num(o.response) << '\n';
    }
}

void write_snapshot_csv(std::ostream& out, std::span<const WaitSample> samples) {
    out << "jobId,atTime,waiting,running";
    for (std::size_t i = 1; i <= kFeatureCount; ++i) {
        out << ",f" << i;
    }
    out << '\n';
    for (const auto& s : samples) {
        out << s.job.jobId << ',' << s.job.submitTime << ',' << s.waitingCount << ',' << s.runningCount;
        for (double f : s.state.features) {
            out << ',' << csv::num(f);
        }
        out << '\n';
    }
}

} // namespace hpcpred::qwait
