#include "srmac/optimize.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <utility>

#include "csv_util.hpp"

namespace srmac {

void SearchSpace::validate() const {
    if (bounds.empty())
        throw std::invalid_argument("SearchSpace: no dimensions");
    if (points_per_dim == 0)
        throw std::invalid_argument("SearchSpace: points_per_dim must be >= 1");
    for (const ParamBound& b : bounds) {
        if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low < b.high))
            throw std::invalid_argument("SearchSpace: bound '" + b.name +
                                        "' needs finite low < high");
    }
}

const char* to_string(DetectorKind kind) {
    return kind == DetectorKind::Srmac ? "srmac" : "terma";
}

SearchSpace default_search_space(DetectorKind kind) {
    SearchSpace space;
    if (kind == DetectorKind::Srmac) {
        space.bounds = {{"alpha_fast", 0.7, 1.0, true, false},
                        {"alpha_slow", 0.7, 1.0, true, false},
                        {"alpha_cross", 0.7, 1.0, true, false},
                        {"threshold", 0.0, 5e-4, true, false}};
    } else {
        space.bounds = {{"w1_ms", 51.0, 111.0, true, true},
                        {"w2_ms", 545.0, 695.0, true, true},
                        {"beta", 0.0, 0.1, true, true}};
    }
    space.points_per_dim = 11;
    return space;
}

SrmacParams srmac_params_from_vector(std::span<const double> v) {
    if (v.size() != 4)
        throw std::invalid_argument("srmac_params_from_vector: expected 4 values");
    return SrmacParams{v[0], v[1], v[2], v[3]};
}

std::vector<double> params_to_vector(const SrmacParams& p) {
    return {p.alpha_fast, p.alpha_slow, p.alpha_cross, p.threshold};
}

TermaParams terma_params_from_vector(std::span<const double> v) {
    if (v.size() != 3)
        throw std::invalid_argument("terma_params_from_vector: expected 3 values");
    return TermaParams{v[0], v[1], v[2]};
}

std::vector<double> params_to_vector(const TermaParams& p) {
    return {p.w1_ms, p.w2_ms, p.beta};
}

namespace {

/// Evaluates every candidate, optionally on a worker pool. Scores land in a
/// pre-sized vector indexed by candidate, so scheduling cannot change the
/// reduction below.
std::vector<double> evaluate_all(const std::vector<std::vector<double>>& candidates,
                                 const FitnessFn& fitness, unsigned threads) {
    std::vector<double> scores(candidates.size());
    if (threads <= 1 || candidates.size() <= 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i)
            scores[i] = fitness(candidates[i]);
        return scores;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= candidates.size()) return;
            try {
                scores[i] = fitness(candidates[i]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(candidates.size());
                return;
            }
        }
    };

    const unsigned n = static_cast<unsigned>(
        std::min<std::size_t>(threads, candidates.size()));
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return scores;
}

SearchResult reduce_history(std::vector<std::vector<double>> candidates,
                            const std::vector<double>& scores) {
    SearchResult result;
    result.evaluations = candidates.size();
    result.history.reserve(candidates.size());

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (scores[i] > best) {  // strict: ties keep the earlier candidate
            best = scores[i];
            best_index = i;
        }
        result.history.push_back(
            HistoryEntry{i + 1, candidates[i], scores[i], best});
    }
    result.best_params = std::move(candidates[best_index]);
    result.best_fitness = best;
    return result;
}

}  // namespace

SearchResult random_search(const SearchSpace& space, const FitnessFn& fitness,
                           std::size_t budget_ofe, std::uint64_t seed,
                           unsigned threads) {
    space.validate();
    if (budget_ofe == 0)
        throw std::invalid_argument("random_search: budget must be >= 1");
    if (!fitness) throw std::invalid_argument("random_search: empty fitness");

    // All candidates are drawn up front from one stream, so the sequence is a
    // pure function of the seed no matter how evaluation is scheduled.
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> candidates(budget_ofe);
    for (std::vector<double>& c : candidates) {
        c.reserve(space.bounds.size());
        for (const ParamBound& b : space.bounds)
            c.push_back(portable_uniform(rng, b.low, b.high));
    }

    const std::vector<double> scores = evaluate_all(candidates, fitness, threads);
    return reduce_history(std::move(candidates), scores);
}

SearchResult grid_search(const SearchSpace& space, const FitnessFn& fitness,
                         unsigned threads) {
    space.validate();
    if (!fitness) throw std::invalid_argument("grid_search: empty fitness");

    const std::size_t dims = space.bounds.size();
    const std::size_t n = space.points_per_dim;

    std::vector<std::vector<double>> axes(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        const ParamBound& b = space.bounds[d];
        axes[d].reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            double v;
            if (n == 1) {
                v = 0.5 * (b.low + b.high);
            } else if (i == n - 1) {
                v = b.high;  // exact endpoint, no accumulated rounding
            } else {
                v = b.low + (b.high - b.low) * static_cast<double>(i) /
                                static_cast<double>(n - 1);
            }
            if (!b.inclusive_low && v <= b.low)
                v = std::nextafter(b.low, b.high);
            if (!b.inclusive_high && v >= b.high)
                v = std::nextafter(b.high, b.low);
            axes[d].push_back(v);
        }
    }

    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) {
        if (total > std::numeric_limits<std::size_t>::max() / n)
            throw std::overflow_error("grid_search: grid too large");
        total *= n;
    }

    // Lexicographic order, last dimension fastest.
    std::vector<std::vector<double>> candidates;
    candidates.reserve(total);
    std::vector<std::size_t> idx(dims, 0);
    for (std::size_t c = 0; c < total; ++c) {
        std::vector<double> v(dims);
        for (std::size_t d = 0; d < dims; ++d) v[d] = axes[d][idx[d]];
        candidates.push_back(std::move(v));
        for (std::size_t d = dims; d-- > 0;) {
            if (++idx[d] < n) break;
            idx[d] = 0;
        }
    }

    const std::vector<double> scores = evaluate_all(candidates, fitness, threads);
    return reduce_history(std::move(candidates), scores);
}

void write_history_csv(std::ostream& out, const SearchResult& result) {
    out << "ofe_index,fitness,best_so_far\n";
    for (const HistoryEntry& h : result.history) {
        out << h.ofe_index << ',' << detail::format_double(h.fitness) << ','
            << detail::format_double(h.best_so_far) << '\n';
    }
}

PreparedRecord prepare_record(const AnnotatedRecord& annotated,
                              const BandpassSpec& bandpass) {
    const PpgRecord& rec = annotated.record;
    PreparedRecord out;
    out.subject_id = rec.subject_id();
    out.group = rec.group();
    out.phase = rec.phase();
    out.sample_rate_hz = rec.sample_rate_hz();
    // The evaluation pipeline is zero-phase by protocol regardless of the
    // spec's batch mode; causal runs are a batch/CLI concern.
    const BiquadCascade cascade = design_bandpass(bandpass, rec.sample_rate_hz());
    out.filtered = filter_batch(cascade, rec.samples(), FilterMode::ZeroPhase);
    out.z = clip_square(out.filtered);
    double sum = 0.0;
    for (double v : out.z) sum += v;
    out.z_mean = out.z.empty() ? 0.0 : sum / static_cast<double>(out.z.size());
    out.annotations = annotated.peaks;
    return out;
}

std::vector<PreparedRecord> prepare_records(
    std::span<const AnnotatedRecord> records, const BandpassSpec& bandpass) {
    std::vector<PreparedRecord> out;
    out.reserve(records.size());
    for (const AnnotatedRecord& r : records)
        out.push_back(prepare_record(r, bandpass));
    return out;
}

PeakList detect_prepared(DetectorKind kind, std::span<const double> params,
                         const PreparedRecord& rec) {
    if (kind == DetectorKind::Srmac) {
        const SrmacParams p = srmac_params_from_vector(params);
        p.validate();
        const std::vector<PeakEvent> events =
            srmac_detect_events(p, rec.filtered, rec.filtered, rec.sample_rate_hz);
        std::vector<std::int64_t> indices;
        indices.reserve(events.size());
        for (const PeakEvent& e : events) indices.push_back(e.index);
        return PeakList::from_sample_indices(indices, rec.sample_rate_hz);
    }
    const TermaParams p = terma_params_from_vector(params);
    p.validate();
    const std::vector<std::int64_t> indices =
        terma_block_peaks(p, rec.filtered, rec.z, rec.z_mean, rec.sample_rate_hz);
    return PeakList::from_sample_indices(indices, rec.sample_rate_hz);
}

DetectorFitness::DetectorFitness(DetectorKind kind,
                                 std::vector<PreparedRecord> records,
                                 double tolerance_s)
    : kind_(kind), records_(std::move(records)), tolerance_s_(tolerance_s) {
    if (records_.empty())
        throw std::invalid_argument("DetectorFitness: empty training set");
    if (!std::isfinite(tolerance_s_) || tolerance_s_ <= 0.0)
        throw std::invalid_argument("DetectorFitness: bad tolerance");
}

double DetectorFitness::operator()(std::span<const double> params) const {
    ConfusionCounts total;
    for (const PreparedRecord& rec : records_) {
        const PeakList detected = detect_prepared(kind_, params, rec);
        total += match_peaks(detected, rec.annotations, tolerance_s_).counts;
    }
    return compute_metrics(total).accuracy;
}

std::vector<ConfusionCounts> DetectorFitness::per_record_counts(
    std::span<const double> params) const {
    std::vector<ConfusionCounts> out;
    out.reserve(records_.size());
    for (const PreparedRecord& rec : records_) {
        const PeakList detected = detect_prepared(kind_, params, rec);
        out.push_back(match_peaks(detected, rec.annotations, tolerance_s_).counts);
    }
    return out;
}

double evaluate_fitness(std::span<const double> params,
                        std::span<const AnnotatedRecord> train_records,
                        DetectorKind kind, const BandpassSpec& bandpass,
                        double tolerance_s) {
    DetectorFitness fitness(kind, prepare_records(train_records, bandpass),
                            tolerance_s);
    return fitness(params);
}

}  // namespace srmac
