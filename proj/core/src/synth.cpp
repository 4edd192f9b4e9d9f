#include "srmac/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "srmac/rng.hpp"

namespace srmac {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kTwoPi = 2.0 * kPi;
// Slow modulation of the instantaneous heart rate.
constexpr double kHrModulationHz = 0.05;

void add_gaussian(std::vector<double>& y, double rate, double center_s,
                  double amplitude, double width_s) {
    if (amplitude == 0.0) return;
    const double span = 5.0 * width_s;
    const auto n = static_cast<std::int64_t>(y.size());
    const auto first = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::ceil((center_s - span) * rate)));
    const auto last = std::min<std::int64_t>(
        n - 1, static_cast<std::int64_t>(std::floor((center_s + span) * rate)));
    const double inv2w2 = 1.0 / (2.0 * width_s * width_s);
    for (std::int64_t i = first; i <= last; ++i) {
        const double dt = static_cast<double>(i) / rate - center_s;
        y[static_cast<std::size_t>(i)] += amplitude * std::exp(-dt * dt * inv2w2);
    }
}

std::string subject_label(std::size_t index) {
    const std::string digits = std::to_string(index + 1);
    return "s" + std::string(digits.size() < 2 ? 2 - digits.size() : 0, '0') +
           digits;
}

}  // namespace

void SynthConfig::validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };

    if (!finite_pos(duration_s))
        throw std::invalid_argument("SynthConfig: duration must be positive");
    if (!finite_pos(sample_rate_hz))
        throw std::invalid_argument("SynthConfig: sample rate must be positive");
    if (!finite_pos(pulse_amplitude))
        throw std::invalid_argument("SynthConfig: pulse amplitude must be positive");
    if (subject_id.empty())
        throw std::invalid_argument("SynthConfig: subject id must be non-empty");
    if (!(heart_rate_bpm >= 30.0 && heart_rate_bpm <= 220.0))
        throw std::invalid_argument("SynthConfig: heart rate must lie in [30, 220] bpm");
    if (!finite_nonneg(hr_drift_bpm) || heart_rate_bpm - hr_drift_bpm < 30.0 ||
        heart_rate_bpm + hr_drift_bpm > 220.0)
        throw std::invalid_argument(
            "SynthConfig: drifted heart rate must stay in [30, 220] bpm");
    if (!finite_nonneg(beat_jitter_s))
        throw std::invalid_argument("SynthConfig: beat jitter must be >= 0");
    if (!finite_pos(systolic_width_s) || !finite_pos(diastolic_width_s) ||
        !finite_pos(notch_width_s))
        throw std::invalid_argument("SynthConfig: pulse widths must be positive");
    if (!finite_nonneg(diastolic_amplitude) || !finite_nonneg(notch_depth))
        throw std::invalid_argument("SynthConfig: pulse amplitudes must be >= 0");
    if (!finite_nonneg(diastolic_delay_s) || !finite_nonneg(notch_delay_s))
        throw std::invalid_argument("SynthConfig: pulse delays must be >= 0");
    if (!(std::isfinite(amplitude_mod_depth) && amplitude_mod_depth >= 0.0 &&
          amplitude_mod_depth < 1.0) ||
        !finite_nonneg(amplitude_mod_freq_hz))
        throw std::invalid_argument(
            "SynthConfig: amplitude modulation depth must lie in [0, 1)");
    if (!(std::isfinite(diastolic_jitter) && diastolic_jitter >= 0.0 &&
          diastolic_jitter < 1.0))
        throw std::invalid_argument(
            "SynthConfig: diastolic jitter must lie in [0, 1)");
    if (!finite_nonneg(baseline_amplitude) || !finite_nonneg(baseline_freq_hz))
        throw std::invalid_argument("SynthConfig: baseline settings must be >= 0");
    if (!finite_nonneg(noise_std))
        throw std::invalid_argument("SynthConfig: noise std must be >= 0");
    if (!finite_nonneg(artifact_rate_per_min) || !finite_nonneg(artifact_amplitude) ||
        !finite_pos(artifact_width_s))
        throw std::invalid_argument("SynthConfig: bad artifact settings");
    if (!finite_nonneg(edge_margin_s))
        throw std::invalid_argument("SynthConfig: edge margin must be >= 0");
}

AnnotatedRecord synth_record(const SynthConfig& config) {
    config.validate();
    const double rate = config.sample_rate_hz;
    const auto n =
        static_cast<std::size_t>(std::llround(config.duration_s * rate));
    if (n == 0) throw std::invalid_argument("synth_record: empty record");

    std::mt19937_64 rng(config.seed);
    const double drift_phase = portable_uniform(rng, 0.0, kTwoPi);
    const double baseline_phase = portable_uniform(rng, 0.0, kTwoPi);
    const double mod_phase = portable_uniform(rng, 0.0, kTwoPi);

    // Beat grid: advance by the instantaneous period; jitter shifts each
    // emitted center but never accumulates.
    std::vector<double> centers;
    std::vector<double> diastolic_scale;
    const double t_end = config.duration_s - config.edge_margin_s;
    double t = config.edge_margin_s;
    while (t < t_end) {
        const double hr =
            config.heart_rate_bpm +
            config.hr_drift_bpm * std::sin(kTwoPi * kHrModulationHz * t + drift_phase);
        const double interval = 60.0 / hr;
        const double jitter =
            std::clamp(config.beat_jitter_s * portable_normal(rng),
                       -0.25 * interval, 0.25 * interval);
        const double dia = portable_uniform(rng, 1.0 - config.diastolic_jitter,
                                            1.0 + config.diastolic_jitter);
        const double center = t + jitter;
        if (center >= config.edge_margin_s && center <= t_end) {
            centers.push_back(center);
            diastolic_scale.push_back(dia);
        }
        t += interval;
    }

    std::vector<double> clean(n, 0.0);
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const double c = centers[k];
        const double mod =
            1.0 + config.amplitude_mod_depth *
                      std::sin(kTwoPi * config.amplitude_mod_freq_hz * c + mod_phase);
        add_gaussian(clean, rate, c, mod, config.systolic_width_s);
        add_gaussian(clean, rate, c + config.diastolic_delay_s,
                     mod * diastolic_scale[k] * config.diastolic_amplitude,
                     config.diastolic_width_s);
        add_gaussian(clean, rate, c + config.notch_delay_s, -mod * config.notch_depth,
                     config.notch_width_s);
    }

    // Ground truth: argmax of the clean waveform inside a window that cannot
    // reach into a neighboring beat.
    std::vector<std::int64_t> peaks;
    peaks.reserve(centers.size());
    const double huge_gap = config.duration_s;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        const double c = centers[k];
        const double prev_gap = k > 0 ? c - centers[k - 1] : huge_gap;
        const double next_gap =
            k + 1 < centers.size() ? centers[k + 1] - c : huge_gap;
        const double half = std::min({0.2, 0.45 * prev_gap, 0.45 * next_gap});
        const auto first = std::max<std::int64_t>(0, std::llround((c - half) * rate));
        const auto last = std::min<std::int64_t>(static_cast<std::int64_t>(n) - 1,
                                                 std::llround((c + half) * rate));
        std::int64_t best = first;
        for (std::int64_t i = first + 1; i <= last; ++i)
            if (clean[static_cast<std::size_t>(i)] > clean[static_cast<std::size_t>(best)])
                best = i;
        if (!peaks.empty() && best <= peaks.back())
            throw std::logic_error("synth_record: non-increasing annotations");
        peaks.push_back(best);
    }

    // Non-beat components go through an edge taper so the record starts and
    // ends quiescent: zero-phase filtering then sees no boundary step and its
    // reflection padding produces no spurious transient inside the margins.
    std::vector<double> extras(n, 0.0);
    if (config.baseline_amplitude > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double ti = static_cast<double>(i) / rate;
            extras[i] += config.baseline_amplitude *
                         std::sin(kTwoPi * config.baseline_freq_hz * ti +
                                  baseline_phase);
        }
    }
    if (config.noise_std > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            extras[i] += config.noise_std * portable_normal(rng);
    }

    const double expected_bursts =
        config.artifact_rate_per_min * config.duration_s / 60.0;
    if (expected_bursts > 0.0 && config.artifact_amplitude > 0.0) {
        auto count = static_cast<std::size_t>(expected_bursts);
        const double frac = expected_bursts - static_cast<double>(count);
        if (frac > 0.0 && portable_uniform(rng, 0.0, 1.0) < frac) ++count;
        for (std::size_t b = 0; b < count; ++b) {
            const double c = portable_uniform(rng, 0.0, config.duration_s);
            const double freq = portable_uniform(rng, 1.0, 3.0);
            const double phase = portable_uniform(rng, 0.0, kTwoPi);
            const double w = config.artifact_width_s;
            const auto first = std::max<std::int64_t>(
                0, std::llround((c - 0.5 * w) * rate));
            const auto last = std::min<std::int64_t>(
                static_cast<std::int64_t>(n) - 1, std::llround((c + 0.5 * w) * rate));
            for (std::int64_t i = first; i <= last; ++i) {
                const double dt = static_cast<double>(i) / rate - c;
                const double hann = 0.5 * (1.0 + std::cos(kTwoPi * dt / w));
                extras[static_cast<std::size_t>(i)] +=
                    config.artifact_amplitude * hann *
                    std::sin(kTwoPi * freq * dt + phase);
            }
        }
    }

    const double margin = std::min(config.edge_margin_s, 0.5 * config.duration_s);
    if (margin > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double ti = static_cast<double>(i) / rate;
            const double from_edge = std::min(ti, config.duration_s - ti);
            if (from_edge < margin)
                extras[i] *= 0.5 - 0.5 * std::cos(kPi * from_edge / margin);
        }
    }

    std::vector<double> samples = clean;
    for (std::size_t i = 0; i < n; ++i)
        samples[i] = (samples[i] + extras[i]) * config.pulse_amplitude;

    PpgRecord record(std::move(samples), rate, config.subject_id, config.group,
                     config.phase);
    return AnnotatedRecord{std::move(record),
                           PeakList::from_sample_indices(peaks, rate)};
}

std::vector<AnnotatedRecord> make_synth_suite(const SuiteConfig& config) {
    if (config.subjects == 0)
        throw std::invalid_argument("make_synth_suite: need at least one subject");
    if (config.healthy_subjects > config.subjects)
        throw std::invalid_argument(
            "make_synth_suite: healthy_subjects exceeds subjects");
    if (config.phases.empty())
        throw std::invalid_argument("make_synth_suite: no phases requested");

    std::vector<AnnotatedRecord> records;
    records.reserve(config.subjects * config.phases.size());
    for (std::size_t s = 0; s < config.subjects; ++s) {
        const std::uint64_t subject_seed =
            splitmix64(splitmix64(config.seed) ^ static_cast<std::uint64_t>(s));
        std::mt19937_64 rng(subject_seed);
        const double base_hr = portable_uniform(rng, 62.0, 86.0);
        const double width_scale = portable_uniform(rng, 0.9, 1.1);
        const double diastolic_amplitude = portable_uniform(rng, 0.27, 0.35);

        for (std::size_t p = 0; p < config.phases.size(); ++p) {
            const Phase phase = config.phases[p];
            SynthConfig sc;
            sc.duration_s = config.duration_s;
            sc.sample_rate_hz = config.sample_rate_hz;
            sc.subject_id = subject_label(s);
            sc.group = s < config.healthy_subjects ? Group::Healthy : Group::Copd;
            sc.phase = phase;
            sc.systolic_width_s *= width_scale;
            sc.diastolic_width_s *= width_scale;
            sc.diastolic_amplitude = diastolic_amplitude;
            switch (phase) {
                case Phase::Rest:
                    sc.heart_rate_bpm = base_hr;
                    sc.noise_std = config.rest_noise_std;
                    break;
                case Phase::Walking:
                    sc.heart_rate_bpm = base_hr + 40.0;
                    sc.noise_std = config.walking_noise_std;
                    sc.artifact_rate_per_min = config.walking_artifact_rate_per_min;
                    sc.artifact_amplitude = config.walking_artifact_amplitude;
                    break;
                case Phase::Recovery:
                    sc.heart_rate_bpm = base_hr + 12.0;
                    sc.noise_std = config.recovery_noise_std;
                    break;
            }
            sc.seed = splitmix64(subject_seed ^ (static_cast<std::uint64_t>(p) + 0x9e37ULL));
            records.push_back(synth_record(sc));
        }
    }
    return records;
}

}  // namespace srmac
