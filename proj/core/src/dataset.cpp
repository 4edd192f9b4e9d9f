#include "srmac/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "csv_util.hpp"

namespace srmac {

namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string_view column(std::string_view line, std::size_t index, char delimiter) {
    std::size_t start = 0;
    for (std::size_t col = 0;; ++col) {
        const std::size_t end = line.find(delimiter, start);
        if (col == index)
            return line.substr(start, end == std::string_view::npos ? end : end - start);
        if (end == std::string_view::npos) return {};
        start = end + 1;
    }
}

bool parse_double(std::string_view token, double& out) {
    token = trim(token);
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = first + token.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

bool parse_index(std::string_view token, std::int64_t& out) {
    token = trim(token);
    if (token.empty()) return false;
    const char* first = token.data();
    const char* last = first + token.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

[[noreturn]] void fail_at(const fs::path& path, std::size_t line_no,
                          const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                             ": " + what);
}

std::ifstream open_for_read(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return in;
}

}  // namespace

std::string group_dir_name(Group g) {
    return g == Group::Healthy ? "healthy" : "not-healthy";
}

std::string phase_dir_name(Phase p) {
    switch (p) {
        case Phase::Rest: return "rest";
        case Phase::Walking: return "balke";
        case Phase::Recovery: return "recovery";
    }
    return "?";
}

std::optional<Group> parse_group_dir(const std::string& name) {
    if (name == "healthy") return Group::Healthy;
    if (name == "not-healthy" || name == "copd") return Group::Copd;
    return std::nullopt;
}

std::optional<Phase> parse_phase_dir(const std::string& name) {
    if (name == "rest") return Phase::Rest;
    if (name == "balke" || name == "walking") return Phase::Walking;
    if (name == "recovery") return Phase::Recovery;
    return std::nullopt;
}

std::vector<double> load_signal_csv(const fs::path& path,
                                    const DatasetOptions& options) {
    auto in = open_for_read(path);
    std::vector<double> samples;
    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        double value = 0.0;
        const bool ok =
            parse_double(column(line, options.signal_column, options.delimiter), value);
        if (!ok) {
            // A single leading unparsable row is a header; anything later is
            // data corruption.
            if (samples.empty() && !skipped_header) {
                skipped_header = true;
                continue;
            }
            fail_at(path, line_no, "malformed sample row");
        }
        samples.push_back(value);
    }
    return samples;
}

std::vector<std::int64_t> load_annotation_csv(const fs::path& path) {
    auto in = open_for_read(path);
    std::vector<std::int64_t> indices;
    std::string line;
    std::size_t line_no = 0;
    bool skipped_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::int64_t value = 0;
        if (!parse_index(column(line, 0, ','), value)) {
            if (indices.empty() && !skipped_header) {
                skipped_header = true;
                continue;
            }
            fail_at(path, line_no, "malformed annotation row");
        }
        if (value < 0) fail_at(path, line_no, "negative sample index");
        indices.push_back(value);
    }
    return indices;
}

fs::path annotation_path_for(const fs::path& signal_path,
                             const DatasetOptions& options) {
    fs::path out = signal_path;
    out.replace_filename(signal_path.stem().string() + options.annotation_suffix +
                         signal_path.extension().string());
    return out;
}

LoadResult load_dataset(const fs::path& root, const DatasetOptions& options) {
    LoadResult result;
    if (!fs::exists(root)) {
        result.warnings.push_back("dataset root does not exist: " + root.string());
        return result;
    }

    struct Entry {
        fs::path signal;
        Group group;
        Phase phase;
    };
    std::vector<Entry> entries;

    for (const auto& group_entry : fs::directory_iterator(root)) {
        if (!group_entry.is_directory()) {
            result.warnings.push_back("skipping non-directory entry: " +
                                      group_entry.path().string());
            continue;
        }
        const auto group = parse_group_dir(group_entry.path().filename().string());
        if (!group) {
            result.warnings.push_back("skipping unrecognized group directory: " +
                                      group_entry.path().string());
            continue;
        }
        for (const auto& phase_entry : fs::directory_iterator(group_entry.path())) {
            if (!phase_entry.is_directory()) {
                result.warnings.push_back("skipping non-directory entry: " +
                                          phase_entry.path().string());
                continue;
            }
            const auto phase = parse_phase_dir(phase_entry.path().filename().string());
            if (!phase) {
                result.warnings.push_back(
                    "skipping unrecognized phase directory: " +
                    phase_entry.path().string());
                continue;
            }
            for (const auto& file : fs::directory_iterator(phase_entry.path())) {
                if (!file.is_regular_file() || file.path().extension() != ".csv")
                    continue;
                const std::string stem = file.path().stem().string();
                if (stem.ends_with(options.annotation_suffix)) continue;
                entries.push_back(Entry{file.path(), *group, *phase});
            }
        }
    }

    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.signal < b.signal; });

    std::set<std::string> subjects;
    for (const Entry& entry : entries) {
        const fs::path ann_path = annotation_path_for(entry.signal, options);
        if (!fs::exists(ann_path))
            throw std::runtime_error("missing annotation file " + ann_path.string() +
                                     " for signal " + entry.signal.string());
        std::vector<double> samples = load_signal_csv(entry.signal, options);
        const std::vector<std::int64_t> indices = load_annotation_csv(ann_path);
        try {
            PpgRecord record(std::move(samples), options.sample_rate_hz,
                             entry.signal.stem().string(), entry.group, entry.phase);
            PeakList peaks =
                PeakList::from_sample_indices(indices, options.sample_rate_hz);
            result.total_minutes += record_duration_s(record) / 60.0;
            result.total_peaks += peaks.size();
            subjects.insert(record.subject_id());
            result.records.push_back(AnnotatedRecord{std::move(record), std::move(peaks)});
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(entry.signal.string() + ": " + e.what());
        }
    }
    result.subject_count = subjects.size();
    if (result.records.empty())
        result.warnings.push_back("no records found under " + root.string());
    return result;
}

void save_record(const AnnotatedRecord& annotated, const fs::path& signal_path,
                 const DatasetOptions& options) {
    if (signal_path.has_parent_path())
        fs::create_directories(signal_path.parent_path());

    {
        std::ofstream out(signal_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + signal_path.string());
        for (double v : annotated.record.samples())
            out << detail::format_double(v) << '\n';
        if (!out) throw std::runtime_error("write failed: " + signal_path.string());
    }
    {
        const fs::path ann_path = annotation_path_for(signal_path, options);
        std::ofstream out(ann_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + ann_path.string());
        for (double t : annotated.peaks.times_s())
            out << time_to_index(t, annotated.record.sample_rate_hz()) << '\n';
        if (!out) throw std::runtime_error("write failed: " + ann_path.string());
    }
}

std::vector<fs::path> save_dataset(std::span<const AnnotatedRecord> records,
                                   const fs::path& root,
                                   const DatasetOptions& options) {
    std::vector<fs::path> written;
    std::set<std::string> seen;
    for (const AnnotatedRecord& annotated : records) {
        const PpgRecord& rec = annotated.record;
        const fs::path path = root / group_dir_name(rec.group()) /
                              phase_dir_name(rec.phase()) /
                              (rec.subject_id() + ".csv");
        if (!seen.insert(path.string()).second)
            throw std::invalid_argument("save_dataset: duplicate record for " +
                                        path.string());
        save_record(annotated, path, options);
        written.push_back(path);
    }
    return written;
}

}  // namespace srmac
