#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace srmac {

/// Window length N -> smoothing factor (N-1)/N of the recursive average
/// that tracks an N-sample simple moving average.
double alpha_from_window(std::uint64_t n);

/// Exponentially weighted moving average: e[n] = alpha*e[n-1] + (1-alpha)*x[n].
/// Single-state recursive filter; O(1) time and memory per step for any alpha.
/// Starts from e[-1] = 0.
class Ewma {
public:
    explicit Ewma(double alpha);

    /// Feed one sample, return the updated output. Throws on non-finite input
    /// (state is left untouched).
    double step(double x);

    double value() const { return last_; }
    double alpha() const { return alpha_; }
    void reset() { last_ = 0.0; }
    std::size_t state_bytes() const { return sizeof(*this); }

private:
    double alpha_;
    double last_ = 0.0;
};

/// Simple moving average over the last N samples, streamed with a ring buffer
/// and a running sum. Before the window fills, divides by the number of
/// samples seen so far. The running sum is re-synchronized against the buffer
/// periodically to bound floating-point drift on long streams.
class Sma {
public:
    explicit Sma(std::size_t window);

    double step(double x);

    std::size_t window() const { return window_; }
    std::size_t count() const { return filled_; }
    double running_sum() const { return sum_; }
    void reset();
    std::size_t state_bytes() const { return sizeof(*this) + buf_.capacity() * sizeof(double); }

private:
    std::size_t window_;
    std::vector<double> buf_;
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    double sum_ = 0.0;
    std::uint64_t steps_ = 0;
};

enum class FilterMode { Causal, ZeroPhase };

/// Butterworth bandpass specification. `order` is the lowpass prototype
/// order; the bandpass realization has 2*order poles.
struct BandpassSpec {
    double low_cut_hz = 0.5;
    double high_cut_hz = 8.0;
    int order = 2;
    FilterMode mode = FilterMode::ZeroPhase;
};

/// One second-order section, a0 normalized to 1:
///   y[n] = b0*x[n] + b1*x[n-1] + b2*x[n-2] - a1*y[n-1] - a2*y[n-2]
struct Biquad {
    double b0, b1, b2, a1, a2;
};

struct BiquadCascade {
    std::vector<Biquad> sections;
    double sample_rate_hz = 0.0;
    int prototype_order = 0;
};

/// Designs a Butterworth bandpass as a cascade of second-order sections:
/// analog lowpass prototype, lowpass-to-bandpass transform, bilinear transform
/// with frequency prewarping. Unity gain at the warped center frequency.
BiquadCascade design_bandpass(const BandpassSpec& spec, double sample_rate_hz);

/// Runs the cascade over a whole signal. Causal: one forward pass from zero
/// state. ZeroPhase: forward-backward filtering with odd-reflection padding of
/// 3*(2*prototype_order) samples and steady-state initial conditions on each
/// pass; output has the input's length and no phase delay.
std::vector<double> filter_batch(const BiquadCascade& cascade,
                                 std::span<const double> signal,
                                 FilterMode mode);

}  // namespace srmac
