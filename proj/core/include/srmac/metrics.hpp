#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "srmac/signal.hpp"

namespace srmac {

// Default agreement window between a detection and an annotation, in seconds.
// A pair matches only when |t_det - t_ann| is strictly below the tolerance.
inline constexpr double kDefaultMatchToleranceS = 0.1;

struct ConfusionCounts {
    std::int64_t true_positives = 0;
    std::int64_t false_positives = 0;
    std::int64_t false_negatives = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& other) {
        true_positives += other.true_positives;
        false_positives += other.false_positives;
        false_negatives += other.false_negatives;
        return *this;
    }
};

// One-to-one pairing between detections and annotations. Detections are
// visited in time order; each claims the nearest annotation that is still
// unmatched and strictly within the tolerance. Ties between two equally
// distant annotations go to the earlier one.
struct MatchResult {
    ConfusionCounts counts;
    // Pairs of (detection index, annotation index) into the input lists.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

MatchResult match_peaks(const PeakList& detections, const PeakList& annotations,
                                                double tolerance_s = kDefaultMatchToleranceS);

struct Metrics {
    double precision = 0.0;    // TP / (TP + FP)
    double sensitivity = 0.0;  // TP / (TP + FN)
    double accuracy = 0.0;     // mean of the two
};

// Degenerate denominators resolve by intent rather than 0/0: with no
// detections, precision is 1 when there was nothing to find and 0 otherwise;
// with no annotations, sensitivity is 1 when nothing was reported and 0
// otherwise.
Metrics compute_metrics(const ConfusionCounts& counts);

// Convenience: match then score in one call.
Metrics evaluate_detections(const PeakList& detections,
                                                        const PeakList& annotations,
                                                        double tolerance_s = kDefaultMatchToleranceS);

struct MetricsSummary {
    Metrics mean;
    // Sample standard deviation (n - 1) of each metric across records.
    // Unset when fewer than two records contribute.
    std::optional<Metrics> stddev;
    std::size_t record_count = 0;
};

// Pooled aggregation: sum confusion counts across records, then score once.
Metrics aggregate_pooled(const std::vector<ConfusionCounts>& per_record);

// Averaged aggregation: score each record independently, then take the mean
// and sample standard deviation of the per-record metrics.
MetricsSummary aggregate_averaged(const std::vector<ConfusionCounts>& per_record);

}  // namespace srmac
