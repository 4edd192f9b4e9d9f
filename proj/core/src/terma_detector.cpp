#include "srmac/terma_detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace srmac {

namespace {

std::int64_t window_samples(double w_ms, double rate_hz, const char* which) {
    if (!std::isfinite(w_ms) || w_ms <= 0.0)
        throw std::invalid_argument(std::string("terma: degenerate ") + which +
                                    " window");
    return std::max<std::int64_t>(1, std::llround(w_ms * rate_hz / 1000.0));
}

std::vector<double> sma_pass(std::span<const double> x, std::int64_t window) {
    Sma sma(static_cast<std::size_t>(window));
    std::vector<double> out;
    out.reserve(x.size());
    for (double v : x) out.push_back(sma.step(v));
    return out;
}

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

}  // namespace

void TermaParams::validate() const {
    if (!(w1_ms >= 51.0 && w1_ms <= 111.0))
        throw std::invalid_argument("TermaParams: w1 must lie in [51, 111] ms");
    if (!(w2_ms >= 545.0 && w2_ms <= 695.0))
        throw std::invalid_argument("TermaParams: w2 must lie in [545, 695] ms");
    if (!(beta >= 0.0 && beta <= 0.1))
        throw std::invalid_argument("TermaParams: beta must lie in [0, 0.1]");
    if (!(w1_ms < w2_ms))
        throw std::invalid_argument("TermaParams: w1 must be shorter than w2");
}

std::vector<double> clip_square(std::span<const double> x) {
    std::vector<double> out;
    out.reserve(x.size());
    for (double v : x) {
        const double c = v > 0.0 ? v : 0.0;
        out.push_back(c * c);
    }
    return out;
}

std::vector<double> terma_preprocess(const PpgRecord& record,
                                     const BandpassSpec& bandpass) {
    const BiquadCascade cascade = design_bandpass(bandpass, record.sample_rate_hz());
    const std::vector<double> filtered =
        filter_batch(cascade, record.samples(), FilterMode::ZeroPhase);
    return clip_square(filtered);
}

std::vector<std::int64_t> terma_block_peaks(const TermaParams& params,
                                            std::span<const double> filtered,
                                            std::span<const double> z,
                                            double z_mean, double sample_rate_hz) {
    if (filtered.size() != z.size())
        throw std::invalid_argument("terma_block_peaks: span size mismatch");
    if (!std::isfinite(params.beta) || params.beta < 0.0)
        throw std::invalid_argument("terma_block_peaks: beta must be >= 0");
    const std::int64_t w1 = window_samples(params.w1_ms, sample_rate_hz, "peak");
    const std::int64_t w2 = window_samples(params.w2_ms, sample_rate_hz, "beat");

    Sma ma_peak(static_cast<std::size_t>(w1));
    Sma ma_beat(static_cast<std::size_t>(w2));
    const double offset = params.beta * z_mean;
    const std::int64_t n = static_cast<std::int64_t>(z.size());

    std::vector<std::int64_t> peaks;
    std::int64_t block_start = -1;
    auto close_block = [&](std::int64_t last) {
        if (block_start < 0) return;
        if (last - block_start + 1 >= w1) {
            std::int64_t best = block_start;
            for (std::int64_t i = block_start + 1; i <= last; ++i)
                if (filtered[static_cast<std::size_t>(i)] >
                    filtered[static_cast<std::size_t>(best)])
                    best = i;
            peaks.push_back(best);
        }
        block_start = -1;
    };

    for (std::int64_t i = 0; i < n; ++i) {
        const double mp = ma_peak.step(z[static_cast<std::size_t>(i)]);
        const double mb = ma_beat.step(z[static_cast<std::size_t>(i)]);
        if (mp > mb + offset) {
            if (block_start < 0) block_start = i;
        } else {
            close_block(i - 1);
        }
    }
    close_block(n - 1);
    return peaks;
}

PeakList terma_detect_batch(const TermaParams& params, const PpgRecord& record,
                            const BandpassSpec& bandpass) {
    const BiquadCascade cascade = design_bandpass(bandpass, record.sample_rate_hz());
    const std::vector<double> filtered =
        filter_batch(cascade, record.samples(), FilterMode::ZeroPhase);
    const std::vector<double> z = clip_square(filtered);
    const double z_mean = mean_of(z);
    const auto indices =
        terma_block_peaks(params, filtered, z, z_mean, record.sample_rate_hz());
    return PeakList::from_sample_indices(indices, record.sample_rate_hz());
}

TermaTrace terma_trace(const TermaParams& params, const PpgRecord& record,
                       const BandpassSpec& bandpass) {
    TermaTrace trace;
    const BiquadCascade cascade = design_bandpass(bandpass, record.sample_rate_hz());
    trace.filtered = filter_batch(cascade, record.samples(), FilterMode::ZeroPhase);
    trace.z = clip_square(trace.filtered);
    trace.z_mean = mean_of(trace.z);
    const std::int64_t w1 =
        window_samples(params.w1_ms, record.sample_rate_hz(), "peak");
    const std::int64_t w2 =
        window_samples(params.w2_ms, record.sample_rate_hz(), "beat");
    trace.ma_peak = sma_pass(trace.z, w1);
    trace.ma_beat = sma_pass(trace.z, w2);

    const double offset = params.beta * trace.z_mean;
    std::int64_t start = -1;
    const std::int64_t n = static_cast<std::int64_t>(trace.z.size());
    for (std::int64_t i = 0; i <= n; ++i) {
        const bool inside =
            i < n && trace.ma_peak[static_cast<std::size_t>(i)] >
                         trace.ma_beat[static_cast<std::size_t>(i)] + offset;
        if (inside && start < 0) start = i;
        if (!inside && start >= 0) {
            if (i - start >= w1) trace.blocks.emplace_back(start, i - 1);
            start = -1;
        }
    }
    return trace;
}

}  // namespace srmac
