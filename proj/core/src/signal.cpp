#include "srmac/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace srmac {

const char* to_string(Group g) {
    switch (g) {
        case Group::Healthy: return "healthy";
        case Group::Copd: return "copd";
    }
    return "?";
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Rest: return "rest";
        case Phase::Walking: return "walking";
        case Phase::Recovery: return "recovery";
    }
    return "?";
}

std::array<GroupPhaseKey, 6> all_group_phase_keys() {
    return {{{Group::Healthy, Phase::Rest},
             {Group::Healthy, Phase::Walking},
             {Group::Healthy, Phase::Recovery},
             {Group::Copd, Phase::Rest},
             {Group::Copd, Phase::Walking},
             {Group::Copd, Phase::Recovery}}};
}

PpgRecord::PpgRecord(std::vector<double> samples, double sample_rate_hz,
                     std::string subject_id, Group group, Phase phase)
    : samples_(std::move(samples)),
      sample_rate_hz_(sample_rate_hz),
      subject_id_(std::move(subject_id)),
      group_(group),
      phase_(phase) {
    if (samples_.empty())
        throw std::invalid_argument("PpgRecord: samples must be non-empty");
    if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_))
        throw std::invalid_argument("PpgRecord: sample rate must be positive");
    // Folds and report tables key on the subject id; a blank one would merge
    // subjects silently.
    if (subject_id_.empty())
        throw std::invalid_argument("PpgRecord: subject id must be non-empty");
    for (double v : samples_) {
        if (!std::isfinite(v))
            throw std::invalid_argument("PpgRecord: non-finite sample");
    }
}

double record_duration_s(const PpgRecord& record) {
    return static_cast<double>(record.size()) / record.sample_rate_hz();
}

double index_to_time(std::int64_t index, double rate_hz) {
    return static_cast<double>(index) / rate_hz;
}

std::int64_t time_to_index(double time_s, double rate_hz) {
    return std::llround(time_s * rate_hz);
}

PeakList::PeakList(std::vector<double> times_s) : times_s_(std::move(times_s)) {
    double prev = -1.0;
    for (double t : times_s_) {
        if (!std::isfinite(t) || t < 0.0)
            throw std::invalid_argument("PeakList: times must be finite and non-negative");
        if (t <= prev)
            throw std::invalid_argument("PeakList: times must be strictly increasing");
        prev = t;
    }
}

PeakList PeakList::from_sample_indices(std::span<const std::int64_t> indices,
                                       double rate_hz) {
    std::vector<double> times;
    times.reserve(indices.size());
    for (std::int64_t i : indices) times.push_back(index_to_time(i, rate_hz));
    return PeakList(std::move(times));
}

}  // namespace srmac
