#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srmac/signal.hpp"

namespace srmac {

/// On-disk conventions for the three-level dataset tree:
///   root/<group>/<phase>/<subject>.csv        one sample per line
///   root/<group>/<phase>/<subject>_peaks.csv  one peak sample-index per line
/// Group directories are "healthy" and "not-healthy"; phase directories are
/// "rest", "balke" (treadmill walking) and "recovery". Headers are optional
/// and auto-detected. `signal_column` selects the column when signal rows
/// carry several values.
struct DatasetOptions {
    double sample_rate_hz = 200.0;
    std::string annotation_suffix = "_peaks";
    std::size_t signal_column = 0;
    char delimiter = ',';
};

std::string group_dir_name(Group g);   // healthy -> "healthy", copd -> "not-healthy"
std::string phase_dir_name(Phase p);   // walking -> "balke"
std::optional<Group> parse_group_dir(const std::string& name);
std::optional<Phase> parse_phase_dir(const std::string& name);

/// Reads the selected column of every data row. Malformed rows fail with the
/// file name and 1-based line number.
std::vector<double> load_signal_csv(const std::filesystem::path& path,
                                    const DatasetOptions& options = {});

/// Reads one non-negative integer sample index per line. An empty file is a
/// valid empty annotation list.
std::vector<std::int64_t> load_annotation_csv(const std::filesystem::path& path);

/// <dir>/<stem><suffix>.csv for <dir>/<stem>.csv.
std::filesystem::path annotation_path_for(const std::filesystem::path& signal_path,
                                          const DatasetOptions& options = {});

struct LoadResult {
    std::vector<AnnotatedRecord> records;  // sorted by path
    std::vector<std::string> warnings;     // skipped entries, empty root
    std::size_t subject_count = 0;
    double total_minutes = 0.0;
    std::size_t total_peaks = 0;
};

/// Walks the tree and loads every signal/annotation pair. A signal file
/// without its annotation sibling is an error; unrecognized directories are
/// skipped with a warning; an empty or missing-level root yields an empty
/// result with a warning.
LoadResult load_dataset(const std::filesystem::path& root,
                        const DatasetOptions& options = {});

/// Writes the signal CSV and its annotation sibling next to it. Samples are
/// written in shortest round-trip decimal form, so load(save(x)) == x.
void save_record(const AnnotatedRecord& annotated,
                 const std::filesystem::path& signal_path,
                 const DatasetOptions& options = {});

/// Lays out the whole tree under `root` (created if needed); file stem is the
/// subject id. Returns the paths of the signal files written.
std::vector<std::filesystem::path> save_dataset(
    std::span<const AnnotatedRecord> records, const std::filesystem::path& root,
    const DatasetOptions& options = {});

}  // namespace srmac
