#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace srmac {

enum class Group { Healthy, Copd };
enum class Phase { Rest, Walking, Recovery };

const char* to_string(Group g);
const char* to_string(Phase p);

struct GroupPhaseKey {
    Group group;
    Phase phase;
    friend bool operator==(const GroupPhaseKey&, const GroupPhaseKey&) = default;
};

/// All six group/phase combinations, in report order.
std::array<GroupPhaseKey, 6> all_group_phase_keys();

/// One subject/phase recording: raw sample vector plus acquisition metadata.
/// Immutable after construction; safe to share across threads.
class PpgRecord {
public:
    PpgRecord(std::vector<double> samples, double sample_rate_hz,
              std::string subject_id, Group group, Phase phase);

    const std::vector<double>& samples() const { return samples_; }
    double sample_rate_hz() const { return sample_rate_hz_; }
    const std::string& subject_id() const { return subject_id_; }
    Group group() const { return group_; }
    Phase phase() const { return phase_; }
    std::size_t size() const { return samples_.size(); }

private:
    std::vector<double> samples_;
    double sample_rate_hz_;
    std::string subject_id_;
    Group group_;
    Phase phase_;
};

double record_duration_s(const PpgRecord& record);

/// index -> seconds. Rounds back exactly through time_to_index for all
/// indices below 2^32 at typical rates.
double index_to_time(std::int64_t index, double rate_hz);
std::int64_t time_to_index(double time_s, double rate_hz);

/// Ordered peak times in seconds. Construction rejects unsorted, duplicated,
/// negative or non-finite input. Immutable value type.
class PeakList {
public:
    PeakList() = default;
    explicit PeakList(std::vector<double> times_s);

    static PeakList from_sample_indices(std::span<const std::int64_t> indices,
                                        double rate_hz);

    const std::vector<double>& times_s() const { return times_s_; }
    std::size_t size() const { return times_s_.size(); }
    bool empty() const { return times_s_.empty(); }

private:
    std::vector<double> times_s_;
};

struct AnnotatedRecord {
    PpgRecord record;
    PeakList peaks;
};

}  // namespace srmac
