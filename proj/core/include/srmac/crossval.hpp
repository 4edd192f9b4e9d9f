#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "srmac/metrics.hpp"
#include "srmac/optimize.hpp"
#include "srmac/signal.hpp"

namespace srmac {

/// One leave-subject-out split, holding indices into the dataset it was made
/// from. Validation carries every record of exactly one subject; train
/// carries everything else.
struct Fold {
    std::string held_out_subject;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> validation_indices;
};

/// One fold per distinct subject id, in sorted id order. Throws when the
/// dataset has fewer than two subjects.
std::vector<Fold> make_folds(std::span<const AnnotatedRecord> dataset);

enum class SearchMethod { Random, Grid };
const char* to_string(SearchMethod method);

struct SearchConfig {
    SearchMethod method = SearchMethod::Random;
    /// Random-search evaluation budget per cell. Grid search ignores this
    /// and always evaluates the full grid.
    std::size_t budget_ofe = 300;
    /// Search repetitions per fold. Grid search is deterministic, so it
    /// always runs once regardless of this setting.
    std::size_t runs = 30;
    std::uint64_t base_seed = 1;
    /// Empty bounds mean the detector's published default space.
    SearchSpace space;
    /// Budgets at which the best-so-far candidate is re-scored on the held
    /// out subject. Values beyond the actual evaluation count are dropped;
    /// the final count is always included.
    std::vector<std::size_t> ofe_checkpoints{50, 100, 150, 200, 250, 300};
    double tolerance_s = kDefaultMatchToleranceS;
    BandpassSpec bandpass;
    unsigned threads = 1;
};

/// Stable per-(fold, run) seed derived by chained splitmix64 mixing, so runs
/// are independent but the whole report is a pure function of the base seed.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t fold_index,
                        std::size_t run_index);

/// One (fold, run) search outcome plus its held-out evaluation.
struct CvCell {
    std::size_t fold_index = 0;
    std::size_t run_index = 0;
    std::uint64_t seed = 0;  // 0 for grid search
    std::vector<double> best_params;
    double train_fitness = 0.0;
    std::size_t evaluations = 0;
    /// Confusion counts pooled over the held-out subject's records, and the
    /// metrics of that pool.
    ConfusionCounts validation_counts;
    Metrics validation;
    /// Held-out accuracy of the best-so-far candidate after each checkpoint
    /// budget; parallel to CvReport::ofe_checkpoints.
    std::vector<double> checkpoint_accuracy;
};

/// One held-out record scored with one cell's chosen parameters. The
/// population behind the summary tables.
struct RecordEvaluation {
    std::size_t record_index = 0;
    std::size_t fold_index = 0;
    std::size_t run_index = 0;
    std::string subject_id;
    Group group = Group::Healthy;
    Phase phase = Phase::Rest;
    ConfusionCounts counts;
};

/// Mean and sample standard deviation (n-1) of per-record-per-run metrics.
/// stddev is all zeros when fewer than two evaluations contribute.
struct SummaryRow {
    std::string label;
    std::size_t population = 0;
    Metrics mean;
    Metrics stddev;
};

struct OfeCurvePoint {
    std::size_t ofe = 0;
    double mean_accuracy = 0.0;  // grand mean over fold x run cells
    double std_accuracy = 0.0;   // sample std over the same cells
};

struct CvReport {
    DetectorKind detector = DetectorKind::Srmac;
    SearchMethod method = SearchMethod::Random;
    std::size_t runs = 0;        // effective runs (1 for grid)
    std::size_t budget_ofe = 0;  // effective evaluations per cell
    std::uint64_t base_seed = 0;
    double tolerance_s = 0.0;
    std::size_t fold_count = 0;
    std::size_t record_count = 0;
    std::vector<std::string> param_names;
    std::vector<std::string> subjects;  // fold order
    std::vector<std::size_t> ofe_checkpoints;
    std::vector<CvCell> cells;  // fold-major, run-minor
    std::vector<RecordEvaluation> record_evaluations;
    SummaryRow overall;
    std::vector<SummaryRow> by_group;  // present groups, healthy first
    std::vector<SummaryRow> by_phase;  // present phases, rest first
    std::vector<OfeCurvePoint> ofe_curve;
};

/// Full leave-subject-out protocol: for every fold and run, search on the
/// training subjects and score the winner on the held-out subject. Search
/// failures abort the whole report. Deterministic for a fixed dataset and
/// config, independent of `config.threads`.
CvReport run_lsocv(std::span<const AnnotatedRecord> dataset,
                   DetectorKind detector, const SearchConfig& config);

/// Per-phase rows (rest, walking, recovery order, absent phases skipped)
/// from a set of held-out record evaluations. Throws on an empty set.
std::vector<SummaryRow> phase_breakdown(
    std::span<const RecordEvaluation> evaluations);

/// Per-group rows (healthy, copd order, absent groups skipped).
std::vector<SummaryRow> group_breakdown(
    std::span<const RecordEvaluation> evaluations);

/// Summary over the whole population.
SummaryRow overall_summary(std::span<const RecordEvaluation> evaluations);

/// Canonical JSON rendering; key order and number formatting are stable, so
/// equal reports serialize to equal bytes.
std::string report_to_json(const CvReport& report);

/// Writes report.json plus flat CSV mirrors (group_metrics.csv,
/// phase_metrics.csv, ofe_curve.csv, cells.csv) into `directory`, creating
/// it if needed. Returns the paths written.
std::vector<std::filesystem::path> write_report_files(
    const CvReport& report, const std::filesystem::path& directory);

}  // namespace srmac
