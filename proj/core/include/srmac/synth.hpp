#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srmac/signal.hpp"

namespace srmac {

/// Synthetic PPG generator settings. Each beat is a systolic Gaussian pulse,
/// a delayed and attenuated diastolic pulse, and a subtractive notch between
/// them, superposed on baseline wander, white noise and optional
/// motion-artifact bursts. Annotations are the argmax of the clean
/// (kernels-only) waveform around each beat, so ground truth is exact by
/// construction.
struct SynthConfig {
    double duration_s = 60.0;
    double sample_rate_hz = 200.0;
    std::string subject_id = "synth";
    Group group = Group::Healthy;
    Phase phase = Phase::Rest;

    double heart_rate_bpm = 75.0;
    /// Amplitude of a slow sinusoidal heart-rate modulation.
    double hr_drift_bpm = 3.0;
    /// Standard deviation of per-beat timing jitter.
    double beat_jitter_s = 0.01;

    /// Overall gain applied to the finished record (systolic pulses have this
    /// amplitude). Detector thresholds are absolute quantities, so the corpus
    /// pins its scale here; the default puts the crossover excursions of a
    /// typical parameterization inside the default threshold search bounds.
    double pulse_amplitude = 0.01;

    double systolic_width_s = 0.045;
    double diastolic_amplitude = 0.3;  // relative to the unit systolic pulse
    double diastolic_delay_s = 0.26;
    double diastolic_width_s = 0.11;
    double notch_depth = 0.08;  // subtractive Gaussian between the two pulses
    double notch_delay_s = 0.18;
    double notch_width_s = 0.035;

    /// Slow multiplicative amplitude modulation of whole beats (respiration).
    double amplitude_mod_depth = 0.15;
    double amplitude_mod_freq_hz = 0.25;
    /// Per-beat relative spread of the diastolic amplitude, uniform in
    /// [1 - j, 1 + j]. Makes every record span a range of beat morphologies.
    double diastolic_jitter = 0.35;

    double baseline_amplitude = 0.25;
    double baseline_freq_hz = 0.2;
    double noise_std = 0.015;

    /// Hann-windowed oscillatory bursts in the passband, modeling motion.
    double artifact_rate_per_min = 0.0;
    double artifact_amplitude = 1.0;
    double artifact_width_s = 0.8;

    /// Beat-free padding at both ends of the record, so edge transients of
    /// downstream filters fall outside the annotated span.
    double edge_margin_s = 1.0;

    std::uint64_t seed = 1;

    void validate() const;
};

/// Deterministic for a fixed config. Every annotated peak is a strict local
/// maximum of the clean waveform.
AnnotatedRecord synth_record(const SynthConfig& config);

/// A leave-subject-out-shaped corpus: `subjects` subjects (healthy ones
/// first), one record per listed phase each, with per-subject morphology and
/// heart-rate variation derived from the seed. Walking is the hard phase:
/// extra noise plus artifact bursts.
struct SuiteConfig {
    std::size_t subjects = 5;
    std::size_t healthy_subjects = 3;
    std::vector<Phase> phases{Phase::Rest, Phase::Walking, Phase::Recovery};
    double duration_s = 60.0;
    double sample_rate_hz = 200.0;
    std::uint64_t seed = 1;

    double rest_noise_std = 0.01;
    double walking_noise_std = 0.04;
    double recovery_noise_std = 0.02;
    double walking_artifact_rate_per_min = 10.0;
    double walking_artifact_amplitude = 1.2;
};

std::vector<AnnotatedRecord> make_synth_suite(const SuiteConfig& config);

}  // namespace srmac
