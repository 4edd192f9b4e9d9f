#include "srmac/srmac_detector.hpp"

#include <cmath>
#include <stdexcept>

namespace srmac {

void SrmacParams::validate() const {
    auto alpha_ok = [](double a) { return a >= 0.7 && a < 1.0; };
    if (!alpha_ok(alpha_fast) || !alpha_ok(alpha_slow) || !alpha_ok(alpha_cross))
        throw std::invalid_argument("SrmacParams: alphas must lie in [0.7, 1)");
    if (!std::isfinite(threshold) || threshold < 0.0)
        throw std::invalid_argument("SrmacParams: threshold must be finite and >= 0");
}

SrmacDetector::SrmacDetector(const SrmacParams& params, double sample_rate_hz)
    : params_(params),
      sample_rate_hz_(sample_rate_hz),
      fast_(params.alpha_fast),
      slow_(params.alpha_slow),
      cross_(params.alpha_cross) {
    params.validate();
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("SrmacDetector: sample rate must be positive");
}

void SrmacDetector::reset() {
    fast_.reset();
    slow_.reset();
    cross_.reset();
    in_roi_ = false;
    roi_best_value_ = 0.0;
    roi_best_index_ = -1;
    roi_open_index_ = -1;
    counter_ = 0;
}

PeakEvent SrmacDetector::make_event(std::int64_t close_index) const {
    return PeakEvent{roi_best_index_,
                     index_to_time(roi_best_index_, sample_rate_hz_),
                     roi_best_value_, roi_open_index_, close_index};
}

std::optional<PeakEvent> SrmacDetector::push(double x, double peak_value) {
    if (!std::isfinite(x) || !std::isfinite(peak_value))
        throw std::invalid_argument("SrmacDetector::push: non-finite input");

    const std::int64_t n = counter_++;
    const double d = fast_.step(x) - slow_.step(x);
    const double c = cross_.step(d);

    if (c > params_.threshold) {
        if (!in_roi_) {
            in_roi_ = true;
            roi_open_index_ = n;
            roi_best_index_ = n;
            roi_best_value_ = peak_value;
        } else if (peak_value > roi_best_value_) {
            // strict: ties keep the earliest index
            roi_best_value_ = peak_value;
            roi_best_index_ = n;
        }
        return std::nullopt;
    }

    if (in_roi_) {
        in_roi_ = false;
        return make_event(n - 1);
    }
    return std::nullopt;
}

std::optional<PeakEvent> SrmacDetector::finish() {
    if (!in_roi_) return std::nullopt;
    in_roi_ = false;
    return make_event(counter_ - 1);
}

std::vector<PeakEvent> srmac_detect_events(const SrmacParams& params,
                                           std::span<const double> filtered,
                                           std::span<const double> peak_values,
                                           double sample_rate_hz) {
    if (filtered.size() != peak_values.size())
        throw std::invalid_argument("srmac_detect_events: span size mismatch");
    SrmacDetector det(params, sample_rate_hz);
    std::vector<PeakEvent> events;
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        if (auto ev = det.push(filtered[i], peak_values[i])) events.push_back(*ev);
    }
    if (auto ev = det.finish()) events.push_back(*ev);
    return events;
}

PeakList srmac_detect_batch(const SrmacParams& params, const PpgRecord& record,
                            const BandpassSpec& bandpass,
                            const SrmacBatchOptions& options) {
    const BiquadCascade cascade = design_bandpass(bandpass, record.sample_rate_hz());
    const std::vector<double> filtered =
        filter_batch(cascade, record.samples(), bandpass.mode);
    const std::span<const double> peaks_on =
        options.peak_source == PeakSource::RawSignal
            ? std::span<const double>(record.samples())
            : std::span<const double>(filtered);
    const auto events =
        srmac_detect_events(params, filtered, peaks_on, record.sample_rate_hz());
    std::vector<double> times;
    times.reserve(events.size());
    for (const PeakEvent& ev : events) times.push_back(ev.time_s);
    return PeakList(std::move(times));
}

}  // namespace srmac
