#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "srmac/filters.hpp"
#include "srmac/signal.hpp"

namespace srmac {

/// Baseline detector parameters: the "peak" and "beat" moving-average window
/// lengths in milliseconds and the offset weight on the global signal level.
struct TermaParams {
    double w1_ms;
    double w2_ms;
    double beta;

    /// Strict search-domain validation used at optimizer and CLI boundaries:
    /// w1 in [51, 111] ms, w2 in [545, 695] ms, beta in [0, 0.1], w1 < w2.
    void validate() const;
};

/// Clip negatives to zero, then square, elementwise.
std::vector<double> clip_square(std::span<const double> x);

/// Zero-phase bandpass, then clip-and-square. The nonlinear stage makes the
/// result sensitive to the filter's sign convention: z(x) != z(-x) in general.
std::vector<double> terma_preprocess(const PpgRecord& record,
                                     const BandpassSpec& bandpass);

/// Block generation on prepared inputs, shared by the batch entry point and
/// the optimization harness. Candidate blocks are maximal runs where the
/// short moving average of z exceeds the long moving average plus
/// beta*mean(z) with mean(z) taken over the whole record; blocks narrower
/// than W1 samples are rejected; each surviving block yields the argmax
/// index of `filtered` inside it.
std::vector<std::int64_t> terma_block_peaks(const TermaParams& params,
                                            std::span<const double> filtered,
                                            std::span<const double> z,
                                            double z_mean, double sample_rate_hz);

/// Full batch pipeline over one record; returns peak times in seconds.
/// Batch-only by contract: the zero-phase filter and the global mean of z
/// are whole-record quantities.
PeakList terma_detect_batch(const TermaParams& params, const PpgRecord& record,
                            const BandpassSpec& bandpass = {});

/// Per-sample intermediate signals for plotting and debugging.
struct TermaTrace {
    std::vector<double> filtered;
    std::vector<double> z;
    std::vector<double> ma_peak;
    std::vector<double> ma_beat;
    double z_mean = 0.0;
    std::vector<std::pair<std::int64_t, std::int64_t>> blocks;  // surviving [first, last]
};

TermaTrace terma_trace(const TermaParams& params, const PpgRecord& record,
                       const BandpassSpec& bandpass);

}  // namespace srmac
