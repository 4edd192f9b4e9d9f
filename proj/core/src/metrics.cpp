#include "srmac/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace srmac {

MatchResult match_peaks(const PeakList& detections, const PeakList& annotations,
                                                double tolerance_s) {
    if (!std::isfinite(tolerance_s) || tolerance_s <= 0.0) {
        throw std::invalid_argument("match_peaks: tolerance must be finite and > 0");
    }

    const auto& det = detections.times_s();
    const auto& ann = annotations.times_s();

    MatchResult result;
    std::vector<bool> taken(ann.size(), false);

    for (std::size_t d = 0; d < det.size(); ++d) {
        double best_dist = std::numeric_limits<double>::infinity();
        std::size_t best = ann.size();
        for (std::size_t a = 0; a < ann.size(); ++a) {
            if (taken[a]) continue;
            const double dist = std::abs(det[d] - ann[a]);
            if (dist < best_dist) {
                best_dist = dist;
                best = a;
            }
        }
        if (best < ann.size() && best_dist < tolerance_s) {
            taken[best] = true;
            result.pairs.emplace_back(d, best);
            ++result.counts.true_positives;
        } else {
            ++result.counts.false_positives;
        }
    }
    result.counts.false_negatives =
            static_cast<std::int64_t>(ann.size()) - result.counts.true_positives;
    return result;
}

Metrics compute_metrics(const ConfusionCounts& counts) {
    if (counts.true_positives < 0 || counts.false_positives < 0 ||
            counts.false_negatives < 0) {
        throw std::invalid_argument("compute_metrics: negative count");
    }
    const auto tp = static_cast<double>(counts.true_positives);
    const auto fp = static_cast<double>(counts.false_positives);
    const auto fn = static_cast<double>(counts.false_negatives);

    Metrics m;
    if (tp + fp > 0.0) {
        m.precision = tp / (tp + fp);
    } else {
        m.precision = (counts.false_negatives == 0) ? 1.0 : 0.0;
    }
    if (tp + fn > 0.0) {
        m.sensitivity = tp / (tp + fn);
    } else {
        m.sensitivity = (counts.false_positives == 0) ? 1.0 : 0.0;
    }
    m.accuracy = 0.5 * (m.precision + m.sensitivity);
    return m;
}

Metrics evaluate_detections(const PeakList& detections,
                                                        const PeakList& annotations, double tolerance_s) {
    return compute_metrics(match_peaks(detections, annotations, tolerance_s).counts);
}

Metrics aggregate_pooled(const std::vector<ConfusionCounts>& per_record) {
    ConfusionCounts total;
    for (const auto& c : per_record) total += c;
    return compute_metrics(total);
}

MetricsSummary aggregate_averaged(const std::vector<ConfusionCounts>& per_record) {
    MetricsSummary summary;
    summary.record_count = per_record.size();
    if (per_record.empty()) return summary;

    std::vector<Metrics> scored;
    scored.reserve(per_record.size());
    for (const auto& c : per_record) scored.push_back(compute_metrics(c));

    const auto n = static_cast<double>(scored.size());
    for (const auto& m : scored) {
        summary.mean.precision += m.precision;
        summary.mean.sensitivity += m.sensitivity;
        summary.mean.accuracy += m.accuracy;
    }
    summary.mean.precision /= n;
    summary.mean.sensitivity /= n;
    summary.mean.accuracy /= n;

    if (scored.size() >= 2) {
        Metrics var;
        for (const auto& m : scored) {
            const double dp = m.precision - summary.mean.precision;
            const double ds = m.sensitivity - summary.mean.sensitivity;
            const double da = m.accuracy - summary.mean.accuracy;
            var.precision += dp * dp;
            var.sensitivity += ds * ds;
            var.accuracy += da * da;
        }
        const double denom = n - 1.0;
        Metrics sd;
        sd.precision = std::sqrt(var.precision / denom);
        sd.sensitivity = std::sqrt(var.sensitivity / denom);
        sd.accuracy = std::sqrt(var.accuracy / denom);
        summary.stddev = sd;
    }
    return summary;
}

}  // namespace srmac
