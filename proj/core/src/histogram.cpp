#include "hpcpred/histogram.hpp"

#include "hpcpred/error.hpp"

#include <algorithm>
#include <cmath>

namespace hpcpred::qwait {

Histogram::Histogram(BinEdges edges) : edges_(std::move(edges)) {
    if (!edges_ || edges_->size() < 2) {
        throw InvalidArgument("a histogram needs at least two bin edges");
    }
    counts_.assign(edges_->size() - 1, 0.0);
}

Histogram Histogram::from_counts(BinEdges edges, std::vector<double> counts, bool normalized) {
    Histogram h(std::move(edges));
    if (counts.size() != h.counts_.size()) {
        throw InvalidArgument("histogram count size does not match its edges");
    }
    h.counts_ = std::move(counts);
    h.normalized_ = normalized;
    h.total_ = 0.0;
    for (double c : h.counts_) {
        h.total_ += c;
    }
    return h;
}

void Histogram::add(double value) {
    const auto& e = *edges_;
    auto it = std::upper_bound(e.begin(), e.end(), value);
    std::size_t bin = it == e.begin() ? 0 : static_cast<std::size_t>(it - e.begin()) - 1;
    bin = std::min(bin, counts_.size() - 1);
    counts_[bin] += 1.0;
    total_ += 1.0;
    normalized_ = false;
}

void Histogram::normalize() {
    if (total_ > 0.0 && !normalized_) {
        for (double& c : counts_) {
            c /= total_;
        }
    }
    normalized_ = true;
}

double Histogram::l2_norm() const {
    double s = 0.0;
    for (double c : counts_) {
        s += c * c;
    }
    return std::sqrt(s);
}

bool Histogram::same_edges(const Histogram& other) const {
    if (edges_ == other.edges_) {
        return true;
    }
    return edges_ && other.edges_ && *edges_ == *other.edges_;
}

double chi_square(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw InvalidArgument("chi-square needs histograms with the same number of bins");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double s = p[i] + q[i];
        if (s > 0.0) {
            const double diff = p[i] - q[i];
            d += diff * diff / s;
        }
    }
    return d;
}

double chi_square(const Histogram& p, const Histogram& q) {
    if (!p.same_edges(q)) {
        throw InvalidArgument("chi-square needs histograms with identical bin edges");
    }
    return chi_square(p.counts(), q.counts());
}

std::vector<double> log_spaced_edges(double lo, double hi, std::size_t bins) {
    if (bins == 0) {
        throw InvalidArgument("bin count must be positive");
    }
    lo = std::max(lo, 0.0);
    hi = std::max(hi, lo);
    double a = std::log1p(lo);
    double b = std::log1p(hi);
    if (b - a < 1e-9) {
        b = a + 1.0;
    }
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(bins);
        edges[i] = std::expm1(t);
    }
    edges.front() = std::expm1(a);
    return edges;
}

HistogramBinning HistogramBinning::fit(std::span<const JobRecord> sample, std::size_t bins) {
    if (bins == 0) {
        throw InvalidArgument("bin count must be positive");
    }
    double sizeLo = 1.0;
    double sizeHi = 1.0;
    double ertLo = 0.0;
    double ertHi = 1.0;
    double waitHi = 1.0;
    double runHi = 1.0;
    if (!sample.empty()) {
        sizeLo = sizeHi = static_cast<double>(sample.front().reqSize);
        ertLo = ertHi = static_cast<double>(sample.front().ert);
        for (const auto& j : sample) {
            sizeLo = std::min(sizeLo, static_cast<double>(j.reqSize));
            sizeHi = std::max(sizeHi, static_cast<double>(j.reqSize));
            ertLo = std::min(ertLo, static_cast<double>(j.ert));
            ertHi = std::max(ertHi, static_cast<double>(j.ert));
            waitHi = std::max(waitHi, static_cast<double>(j.waitTime));
            runHi = std::max(runHi, static_cast<double>(j.runTime));
        }
    }
    auto make = [bins](double lo, double hi) {
        return std::make_shared<const std::vector<double>>(log_spaced_edges(lo, hi, bins));
    };
    HistogramBinning b;
    b.bins_ = bins;
    const auto sizeEdges = make(sizeLo, sizeHi);
    const auto ertEdges = make(ertLo, ertHi);
    b.edges_[static_cast<std::size_t>(Population::WaitingReqSize)] = sizeEdges;
    b.edges_[static_cast<std::size_t>(Population::RunningReqSize)] = sizeEdges;
    b.edges_[static_cast<std::size_t>(Population::WaitingErt)] = ertEdges;
    b.edges_[static_cast<std::size_t>(Population::RunningErt)] = ertEdges;
    b.edges_[static_cast<std::size_t>(Population::WaitingElapsed)] = make(0.0, waitHi);
    b.edges_[static_cast<std::size_t>(Population::RunningElapsed)] = make(0.0, runHi);
    return b;
}

FeatureVector compute_features(const SystemSnapshot& snapshot, const JobRecord& job) {
    FeatureVector f{};
    f[0] = static_cast<double>(job.reqSize);
    f[1] = static_cast<double>(job.ert);
    for (const auto& [w, elapsed] : snapshot.waiting) {
        const double size = static_cast<double>(w.reqSize);
        const double ert = static_cast<double>(w.ert);
        f[2] += size;
        f[3] += ert;
        f[4] += static_cast<double>(elapsed);
        if (w.userId == job.userId) {
            f[8] += size * ert;
            f[9] += size;
            f[10] += ert;
            f[11] += 1.0;
        }
    }
    for (const auto& [r, elapsed] : snapshot.running) {
        const double size = static_cast<double>(r.reqSize);
        const double ert = static_cast<double>(r.ert);
        f[5] += size;
        f[6] += ert;
        f[7] += static_cast<double>(elapsed);
        if (r.userId == job.userId) {
            f[12] += size * ert;
            f[13] += size;
            f[14] += ert;
            f[15] += 1.0;
        }
    }
    return f;
}

JobState build_state(const SystemSnapshot& snapshot, const JobRecord& job, const HistogramBinning& binning) {
    if (binning.bins() == 0) {
        throw InvalidArgument("histogram binning has not been fitted");
    }
    JobState s;
    for (std::size_t p = 0; p < kPopulations; ++p) {
        s.distributions[p] = Histogram(binning.edges(static_cast<Population>(p)));
    }
    auto& d = s.distributions;
    for (const auto& [w, elapsed] : snapshot.waiting) {
        d[0].add(static_cast<double>(w.reqSize));
        d[1].add(static_cast<double>(w.ert));
        d[2].add(static_cast<double>(elapsed));
    }
    for (const auto& [r, elapsed] : snapshot.running) {
        d[3].add(static_cast<double>(r.reqSize));
        d[4].add(static_cast<double>(r.ert));
        d[5].add(static_cast<double>(elapsed));
    }
    for (auto& h : d) {
        h.normalize();
    }
    s.features = compute_features(snapshot, job);
    s.ertKnown = job.ertKnown;
    return s;
}

} // namespace hpcpred::qwait
