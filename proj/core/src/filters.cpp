#include "srmac/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace srmac {

namespace {

using cplx = std::complex<double>;

constexpr std::uint64_t kSumRefreshInterval = 1u << 15;

}  // namespace

double alpha_from_window(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("alpha_from_window: window must be >= 1");
    return static_cast<double>(n - 1) / static_cast<double>(n);
}

Ewma::Ewma(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("Ewma: alpha must lie in [0, 1)");
}

double Ewma::step(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("Ewma::step: non-finite input");
    last_ = alpha_ * last_ + (1.0 - alpha_) * x;
    return last_;
}

Sma::Sma(std::size_t window) : window_(window), buf_(window, 0.0) {
    if (window == 0) throw std::invalid_argument("Sma: window must be >= 1");
}

void Sma::reset() {
    std::fill(buf_.begin(), buf_.end(), 0.0);
    head_ = 0;
    filled_ = 0;
    sum_ = 0.0;
    steps_ = 0;
}

double Sma::step(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("Sma::step: non-finite input");
    if (filled_ == window_) {
        sum_ -= buf_[head_];
    } else {
        ++filled_;
    }
    buf_[head_] = x;
    sum_ += x;
    head_ = (head_ + 1) % window_;
    if (++steps_ % kSumRefreshInterval == 0) {
        double exact = 0.0;
        for (std::size_t i = 0; i < filled_; ++i) exact += buf_[i];
        sum_ = exact;
    }
    return sum_ / static_cast<double>(filled_);
}

namespace {

// Analog Butterworth lowpass prototype poles (unit cutoff, left half-plane).
std::vector<cplx> prototype_poles(int order) {
    std::vector<cplx> poles;
    poles.reserve(static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

cplx bilinear(cplx s, double fs2) { return (fs2 + s) / (fs2 - s); }

// Magnitude of the cascade at digital angular frequency w (rad/sample).
double cascade_magnitude(const std::vector<Biquad>& sections, double w) {
    const cplx z1 = std::polar(1.0, -w);   // z^-1
    const cplx z2 = z1 * z1;
    double mag = 1.0;
    for (const Biquad& s : sections) {
        cplx num = s.b0 + s.b1 * z1 + s.b2 * z2;
        cplx den = 1.0 + s.a1 * z1 + s.a2 * z2;
        mag *= std::abs(num) / std::abs(den);
    }
    return mag;
}

}  // namespace

BiquadCascade design_bandpass(const BandpassSpec& spec, double sample_rate_hz) {
    const double nyquist = sample_rate_hz / 2.0;
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("design_bandpass: sample rate must be positive");
    if (spec.order < 1)
        throw std::invalid_argument("design_bandpass: prototype order must be >= 1");
    if (!(spec.low_cut_hz > 0.0 && spec.low_cut_hz < spec.high_cut_hz &&
          spec.high_cut_hz < nyquist))
        throw std::invalid_argument(
            "design_bandpass: cutoffs must satisfy 0 < low < high < Nyquist");

    const int n = spec.order;
    const double fs2 = 2.0 * sample_rate_hz;
    // Prewarped analog band edges.
    const double wl = fs2 * std::tan(std::numbers::pi * spec.low_cut_hz / sample_rate_hz);
    const double wh = fs2 * std::tan(std::numbers::pi * spec.high_cut_hz / sample_rate_hz);
    const double w0 = std::sqrt(wl * wh);
    const double bw = wh - wl;

    // Lowpass-to-bandpass: each prototype pole p yields the two roots of
    // s^2 - bw*p*s + w0^2 = 0.
    std::vector<cplx> apoles;
    apoles.reserve(static_cast<std::size_t>(2 * n));
    for (cplx p : prototype_poles(n)) {
        const cplx half = 0.5 * bw * p;
        const cplx disc = std::sqrt(half * half - cplx(w0 * w0, 0.0));
        apoles.push_back(half + disc);
        apoles.push_back(half - disc);
    }

    std::vector<cplx> zpoles;
    zpoles.reserve(apoles.size());
    for (cplx s : apoles) zpoles.push_back(bilinear(s, fs2));

    // Pair poles into real-coefficient sections: conjugate pairs first,
    // leftover real poles in pairs.
    std::vector<Biquad> sections;
    std::vector<bool> used(zpoles.size(), false);
    const double imag_eps = 1e-10;
    for (std::size_t i = 0; i < zpoles.size(); ++i) {
        if (used[i] || std::abs(zpoles[i].imag()) <= imag_eps) continue;
        used[i] = true;
        std::size_t best = zpoles.size();
        double best_d = 0.0;
        for (std::size_t j = 0; j < zpoles.size(); ++j) {
            if (used[j]) continue;
            double d = std::abs(zpoles[j] - std::conj(zpoles[i]));
            if (best == zpoles.size() || d < best_d) {
                best = j;
                best_d = d;
            }
        }
        if (best == zpoles.size())
            throw std::runtime_error("design_bandpass: unpaired complex pole");
        used[best] = true;
        sections.push_back(Biquad{1.0, 0.0, -1.0, -2.0 * zpoles[i].real(),
                                  std::norm(zpoles[i])});
    }
    std::vector<double> reals;
    for (std::size_t i = 0; i < zpoles.size(); ++i)
        if (!used[i]) reals.push_back(zpoles[i].real());
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
        sections.push_back(
            Biquad{1.0, 0.0, -1.0, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]});
    }

    // Normalize to unity gain at the warped center frequency, spreading the
    // scale evenly across sections.
    const double wc = 2.0 * std::atan(w0 / fs2);
    const double raw = cascade_magnitude(sections, wc);
    const double g = std::pow(1.0 / raw, 1.0 / static_cast<double>(sections.size()));
    for (Biquad& s : sections) {
        s.b0 *= g;
        s.b2 *= g;
    }

    BiquadCascade cascade;
    cascade.sections = std::move(sections);
    cascade.sample_rate_hz = sample_rate_hz;
    cascade.prototype_order = n;
    return cascade;
}

namespace {

struct SectionState {
    double s1 = 0.0, s2 = 0.0;
};

// Direct form II transposed, one section, in place.
void run_section(const Biquad& c, SectionState st, std::vector<double>& x) {
    for (double& v : x) {
        const double y = c.b0 * v + st.s1;
        st.s1 = c.b1 * v - c.a1 * y + st.s2;
        st.s2 = c.b2 * v - c.a2 * y;
        v = y;
    }
}

// Steady-state internal state for a constant input u; returns the section's
// steady output so states can be chained through the cascade.
double steady_state(const Biquad& c, double u, SectionState& st) {
    const double denom = 1.0 + c.a1 + c.a2;
    const double y = (c.b0 + c.b1 + c.b2) * u / denom;
    st.s2 = c.b2 * u - c.a2 * y;
    st.s1 = c.b1 * u - c.a1 * y + st.s2;
    return y;
}

void forward_pass(const BiquadCascade& cascade, std::vector<double>& x,
                  bool steady_init) {
    double u = x.empty() ? 0.0 : x.front();
    for (const Biquad& c : cascade.sections) {
        SectionState st;
        if (steady_init) u = steady_state(c, u, st);
        run_section(c, st, x);
    }
}

}  // namespace

std::vector<double> filter_batch(const BiquadCascade& cascade,
                                 std::span<const double> signal, FilterMode mode) {
    if (signal.empty())
        throw std::invalid_argument("filter_batch: empty signal");
    if (cascade.sections.empty())
        throw std::invalid_argument("filter_batch: undesigned cascade");

    if (mode == FilterMode::Causal) {
        std::vector<double> out(signal.begin(), signal.end());
        forward_pass(cascade, out, /*steady_init=*/false);
        return out;
    }

    const std::size_t n = signal.size();
    const std::size_t pad =
        std::min<std::size_t>(3 * static_cast<std::size_t>(2 * cascade.prototype_order),
                              n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i)
        ext.push_back(2.0 * signal[0] - signal[pad - i]);
    ext.insert(ext.end(), signal.begin(), signal.end());
    for (std::size_t i = 0; i < pad; ++i)
        ext.push_back(2.0 * signal[n - 1] - signal[n - 2 - i]);

    forward_pass(cascade, ext, /*steady_init=*/true);
    std::reverse(ext.begin(), ext.end());
    forward_pass(cascade, ext, /*steady_init=*/true);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace srmac
