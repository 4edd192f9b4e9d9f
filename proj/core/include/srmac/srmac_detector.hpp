#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "srmac/filters.hpp"
#include "srmac/signal.hpp"

namespace srmac {

/// The four detector parameters: two crossover smoothing factors, one factor
/// for the averaging stage that suppresses short spurious regions, and the
/// threshold on the smoothed crossover signal.
///
/// No ordering between alpha_fast and alpha_slow is enforced; a role
/// inversion flips the sign of the crossover signal and simply yields no
/// detections at a positive threshold.
struct SrmacParams {
    double alpha_fast;
    double alpha_slow;
    double alpha_cross;
    double threshold;

    /// Alphas must lie in [0.7, 1); the threshold must be finite and >= 0
    /// (its upper bound is a search-space setting, not a type constraint).
    void validate() const;
};

struct PeakEvent {
    std::int64_t index;           // argmax sample within the region
    double time_s;
    double amplitude;
    std::int64_t roi_open_index;  // first sample with the criterion satisfied
    std::int64_t roi_close_index; // last sample with the criterion satisfied
};

/// Streaming peak detector. Per sample it computes
///     d[n] = fast(x[n]) - slow(x[n]),   c[n] = cross(d[n])
/// and keeps a region of interest open while c[n] > threshold. While a region
/// is open it tracks the argmax of the input; when the region closes, one
/// PeakEvent is emitted at the tracked argmax (earliest index on ties).
/// Constant work and memory per sample.
class SrmacDetector {
public:
    SrmacDetector(const SrmacParams& params, double sample_rate_hz);

    /// Feed one sample; returns an event when a region just closed.
    /// Throws on non-finite input, leaving the state untouched.
    std::optional<PeakEvent> push(double x) { return push(x, x); }

    /// Same, but tracks the argmax over `peak_value` instead of `x` (used
    /// when peaks should be located on a different stage of the pipeline
    /// than the thresholded one).
    std::optional<PeakEvent> push(double x, double peak_value);

    /// Closes a still-open region at end of stream, emitting its peak if the
    /// region contains at least one sample.
    std::optional<PeakEvent> finish();

    double fast() const { return fast_.value(); }
    double slow() const { return slow_.value(); }
    double cross() const { return cross_.value(); }
    bool in_roi() const { return in_roi_; }
    std::int64_t samples_seen() const { return counter_; }

    void reset();

private:
    PeakEvent make_event(std::int64_t close_index) const;

    SrmacParams params_;
    double sample_rate_hz_;
    Ewma fast_;
    Ewma slow_;
    Ewma cross_;
    bool in_roi_ = false;
    double roi_best_value_ = 0.0;
    std::int64_t roi_best_index_ = -1;
    std::int64_t roi_open_index_ = -1;
    std::int64_t counter_ = 0;
};

enum class PeakSource { FilteredInput, RawSignal };

struct SrmacBatchOptions {
    /// Where the in-region argmax is taken. Default: the bandpass-filtered
    /// signal the detector thresholds on.
    PeakSource peak_source = PeakSource::FilteredInput;
};

/// Streams a pre-filtered signal through the detector and collects all
/// events, including a force-closed trailing region.
std::vector<PeakEvent> srmac_detect_events(const SrmacParams& params,
                                           std::span<const double> filtered,
                                           std::span<const double> peak_values,
                                           double sample_rate_hz);

/// Bandpass-filters the record, runs the streaming detector over every
/// sample, and returns the detected peak times in seconds.
PeakList srmac_detect_batch(const SrmacParams& params, const PpgRecord& record,
                            const BandpassSpec& bandpass = {},
                            const SrmacBatchOptions& options = {});

}  // namespace srmac
