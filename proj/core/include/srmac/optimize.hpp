#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "srmac/filters.hpp"
#include "srmac/metrics.hpp"
#include "srmac/rng.hpp"
#include "srmac/signal.hpp"
#include "srmac/srmac_detector.hpp"
#include "srmac/terma_detector.hpp"

namespace srmac {

struct ParamBound {
    std::string name;
    double low = 0.0;
    double high = 1.0;
    /// Domain notation only; random sampling always draws from [low, high).
    /// Grid search places endpoints on inclusive bounds and pulls an
    /// exclusive endpoint one representable value into the interior.
    bool inclusive_low = true;
    bool inclusive_high = true;
};

struct SearchSpace {
    std::vector<ParamBound> bounds;
    /// Grid search resolution per dimension; unused by random search.
    std::size_t points_per_dim = 11;

    /// Throws unless every bound is finite with low < high and there is at
    /// least one dimension and one grid point.
    void validate() const;
    std::size_t dimensions() const { return bounds.size(); }
};

enum class DetectorKind { Srmac, Terma };

const char* to_string(DetectorKind kind);

/// Published search domains: three smoothing factors in [0.7, 1) plus a
/// threshold in [0, 5e-4) for the crossover detector; window lengths
/// [51, 111] ms and [545, 695] ms plus an offset weight [0, 0.1] for the
/// two-average baseline, at 11 grid points per dimension.
SearchSpace default_search_space(DetectorKind kind);

/// Vector layout: [alpha_fast, alpha_slow, alpha_cross, threshold].
SrmacParams srmac_params_from_vector(std::span<const double> v);
std::vector<double> params_to_vector(const SrmacParams& p);

/// Vector layout: [w1_ms, w2_ms, beta].
TermaParams terma_params_from_vector(std::span<const double> v);
std::vector<double> params_to_vector(const TermaParams& p);

struct HistoryEntry {
    std::size_t ofe_index = 0;  // 1-based objective-function-evaluation count
    std::vector<double> params;
    double fitness = 0.0;
    double best_so_far = 0.0;
};

struct SearchResult {
    std::vector<double> best_params;
    double best_fitness = 0.0;
    std::size_t evaluations = 0;
    std::vector<HistoryEntry> history;  // candidate-index order
};

using FitnessFn = std::function<double(std::span<const double>)>;

/// Draws `budget_ofe` i.i.d. uniform candidates from a generator seeded with
/// `seed`, evaluates each, and returns the argmax with the full evaluation
/// history. The candidate sequence depends only on the seed; evaluation may
/// fan out to `threads` workers without changing the result. Ties keep the
/// earlier candidate.
SearchResult random_search(const SearchSpace& space, const FitnessFn& fitness,
                           std::size_t budget_ofe, std::uint64_t seed,
                           unsigned threads = 1);

/// Evaluates the full Cartesian product of `points_per_dim` evenly spaced
/// points per dimension, lexicographic in dimension order. Inclusive bounds
/// place points exactly on the endpoints; exclusive ones pull that endpoint
/// one representable value inward. A single-point grid sits at the midpoint.
/// Ties keep the earlier candidate.
SearchResult grid_search(const SearchSpace& space, const FitnessFn& fitness,
                         unsigned threads = 1);

/// History as CSV: ofe_index,fitness,best_so_far. Doubles are written in
/// shortest round-trip form.
void write_history_csv(std::ostream& out, const SearchResult& result);

/// Per-record quantities that do not depend on detector parameters, computed
/// once so repeated fitness evaluations skip the filtering pipeline.
struct PreparedRecord {
    std::string subject_id;
    Group group = Group::Healthy;
    Phase phase = Phase::Rest;
    double sample_rate_hz = 0.0;
    std::vector<double> filtered;  // zero-phase bandpass output
    std::vector<double> z;         // clip-and-square of `filtered`
    double z_mean = 0.0;
    PeakList annotations;
};

PreparedRecord prepare_record(const AnnotatedRecord& annotated,
                              const BandpassSpec& bandpass = {});
std::vector<PreparedRecord> prepare_records(
    std::span<const AnnotatedRecord> records, const BandpassSpec& bandpass = {});

/// Runs one detector over a prepared record. Parameters are validated against
/// the published domain first; out-of-domain candidates fail loudly instead
/// of scoring zero.
PeakList detect_prepared(DetectorKind kind, std::span<const double> params,
                         const PreparedRecord& rec);

/// Fitness = accuracy of pooled confusion counts over the held records.
/// Pure: same parameters always produce bit-identical fitness.
class DetectorFitness {
public:
    DetectorFitness(DetectorKind kind, std::vector<PreparedRecord> records,
                    double tolerance_s = kDefaultMatchToleranceS);

    double operator()(std::span<const double> params) const;

    std::vector<ConfusionCounts> per_record_counts(
        std::span<const double> params) const;

    DetectorKind kind() const { return kind_; }
    const std::vector<PreparedRecord>& records() const { return records_; }
    double tolerance_s() const { return tolerance_s_; }

private:
    DetectorKind kind_;
    std::vector<PreparedRecord> records_;
    double tolerance_s_;
};

/// One-shot wrapper over DetectorFitness for callers that evaluate a single
/// candidate; bit-identical to the cached path.
double evaluate_fitness(std::span<const double> params,
                        std::span<const AnnotatedRecord> train_records,
                        DetectorKind kind, const BandpassSpec& bandpass = {},
                        double tolerance_s = kDefaultMatchToleranceS);

}  // namespace srmac
