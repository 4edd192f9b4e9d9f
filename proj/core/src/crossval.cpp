#include "srmac/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "csv_util.hpp"

namespace srmac {

namespace {

using ordered_json = nlohmann::ordered_json;

SummaryRow make_row(std::string label,
                    const std::vector<ConfusionCounts>& counts) {
    const MetricsSummary s = aggregate_averaged(counts);
    SummaryRow row;
    row.label = std::move(label);
    row.population = s.record_count;
    row.mean = s.mean;
    row.stddev = s.stddev.value_or(Metrics{});
    return row;
}

std::vector<ConfusionCounts> counts_where(
    std::span<const RecordEvaluation> evaluations, auto&& keep) {
    std::vector<ConfusionCounts> out;
    for (const RecordEvaluation& e : evaluations)
        if (keep(e)) out.push_back(e.counts);
    return out;
}

/// Checkpoints actually usable for a per-cell budget: the configured values
/// that fit, deduplicated, ascending, with the final budget always present.
std::vector<std::size_t> effective_checkpoints(
    std::vector<std::size_t> configured, std::size_t evaluations_per_cell) {
    std::vector<std::size_t> out;
    for (std::size_t c : configured)
        if (c >= 1 && c <= evaluations_per_cell) out.push_back(c);
    out.push_back(evaluations_per_cell);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ordered_json row_to_json(const SummaryRow& row) {
    return ordered_json{{"label", row.label},
                        {"population", row.population},
                        {"precision_mean", row.mean.precision},
                        {"precision_std", row.stddev.precision},
                        {"sensitivity_mean", row.mean.sensitivity},
                        {"sensitivity_std", row.stddev.sensitivity},
                        {"accuracy_mean", row.mean.accuracy},
                        {"accuracy_std", row.stddev.accuracy}};
}

void write_summary_csv(std::ofstream& out, std::span<const SummaryRow> rows) {
    out << "label,population,precision_mean,precision_std,sensitivity_mean,"
           "sensitivity_std,accuracy_mean,accuracy_std\n";
    for (const SummaryRow& r : rows) {
        out << r.label << ',' << r.population << ','
            << detail::format_double(r.mean.precision) << ','
            << detail::format_double(r.stddev.precision) << ','
            << detail::format_double(r.mean.sensitivity) << ','
            << detail::format_double(r.stddev.sensitivity) << ','
            << detail::format_double(r.mean.accuracy) << ','
            << detail::format_double(r.stddev.accuracy) << '\n';
    }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<Fold> make_folds(std::span<const AnnotatedRecord> dataset) {
    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        by_subject[dataset[i].record.subject_id()].push_back(i);
    if (by_subject.size() < 2)
        throw std::invalid_argument(
            "make_folds: need at least two subjects to cross-validate");

    std::vector<Fold> folds;
    folds.reserve(by_subject.size());
    for (const auto& [subject, indices] : by_subject) {
        Fold fold;
        fold.held_out_subject = subject;
        fold.validation_indices = indices;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            if (dataset[i].record.subject_id() != subject)
                fold.train_indices.push_back(i);
        folds.push_back(std::move(fold));
    }
    return folds;
}

const char* to_string(SearchMethod method) {
    return method == SearchMethod::Random ? "random" : "grid";
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t fold_index,
                        std::size_t run_index) {
    std::uint64_t h = splitmix64(base_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(fold_index));
    h = splitmix64(h ^ static_cast<std::uint64_t>(run_index));
    return h;
}

std::vector<SummaryRow> phase_breakdown(
    std::span<const RecordEvaluation> evaluations) {
    if (evaluations.empty())
        throw std::invalid_argument("phase_breakdown: no evaluations");
    std::vector<SummaryRow> rows;
    for (Phase phase : {Phase::Rest, Phase::Walking, Phase::Recovery}) {
        auto counts = counts_where(
            evaluations, [phase](const RecordEvaluation& e) { return e.phase == phase; });
        if (!counts.empty()) rows.push_back(make_row(to_string(phase), counts));
    }
    return rows;
}

std::vector<SummaryRow> group_breakdown(
    std::span<const RecordEvaluation> evaluations) {
    if (evaluations.empty())
        throw std::invalid_argument("group_breakdown: no evaluations");
    std::vector<SummaryRow> rows;
    for (Group group : {Group::Healthy, Group::Copd}) {
        auto counts = counts_where(
            evaluations, [group](const RecordEvaluation& e) { return e.group == group; });
        if (!counts.empty()) rows.push_back(make_row(to_string(group), counts));
    }
    return rows;
}

SummaryRow overall_summary(std::span<const RecordEvaluation> evaluations) {
    if (evaluations.empty())
        throw std::invalid_argument("overall_summary: no evaluations");
    return make_row("overall",
                    counts_where(evaluations, [](const RecordEvaluation&) {
                        return true;
                    }));
}

CvReport run_lsocv(std::span<const AnnotatedRecord> dataset,
                   DetectorKind detector, const SearchConfig& config) {
    const std::vector<Fold> folds = make_folds(dataset);

    SearchSpace space = config.space.bounds.empty()
                            ? default_search_space(detector)
                            : config.space;
    space.validate();

    const bool grid = config.method == SearchMethod::Grid;
    const std::size_t runs = grid ? 1 : config.runs;
    if (runs == 0) throw std::invalid_argument("run_lsocv: runs must be >= 1");
    if (!grid && config.budget_ofe == 0)
        throw std::invalid_argument("run_lsocv: budget must be >= 1");

    std::size_t evals_per_cell = config.budget_ofe;
    if (grid) {
        evals_per_cell = 1;
        for (std::size_t d = 0; d < space.dimensions(); ++d)
            evals_per_cell *= space.points_per_dim;
    }

    CvReport report;
    report.detector = detector;
    report.method = config.method;
    report.runs = runs;
    report.budget_ofe = evals_per_cell;
    report.base_seed = config.base_seed;
    report.tolerance_s = config.tolerance_s;
    report.fold_count = folds.size();
    report.record_count = dataset.size();
    for (const ParamBound& b : space.bounds) report.param_names.push_back(b.name);
    report.ofe_checkpoints =
        effective_checkpoints(config.ofe_checkpoints, evals_per_cell);

    const std::vector<PreparedRecord> prepared =
        prepare_records(dataset, config.bandpass);

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Fold& fold = folds[f];
        report.subjects.push_back(fold.held_out_subject);

        std::vector<PreparedRecord> train;
        train.reserve(fold.train_indices.size());
        for (std::size_t i : fold.train_indices) train.push_back(prepared[i]);
        std::vector<PreparedRecord> validation;
        validation.reserve(fold.validation_indices.size());
        for (std::size_t i : fold.validation_indices)
            validation.push_back(prepared[i]);

        const DetectorFitness train_fitness(detector, std::move(train),
                                            config.tolerance_s);
        const DetectorFitness val_fitness(detector, std::move(validation),
                                          config.tolerance_s);
        const FitnessFn fn = [&train_fitness](std::span<const double> p) {
            return train_fitness(p);
        };

        for (std::size_t r = 0; r < runs; ++r) {
            CvCell cell;
            cell.fold_index = f;
            cell.run_index = r;
            cell.seed = grid ? 0 : cell_seed(config.base_seed, f, r);

            const SearchResult result =
                grid ? grid_search(space, fn, config.threads)
                     : random_search(space, fn, config.budget_ofe, cell.seed,
                                     config.threads);
            cell.evaluations = result.evaluations;
            cell.best_params = result.best_params;
            cell.train_fitness = result.best_fitness;

            // Held-out accuracy of the prefix-best candidate at each
            // checkpoint, recovered from the stored history.
            double best = -1.0;
            std::span<const double> best_params;
            std::size_t next_checkpoint = 0;
            for (const HistoryEntry& h : result.history) {
                if (h.fitness > best) {
                    best = h.fitness;
                    best_params = h.params;
                }
                if (next_checkpoint < report.ofe_checkpoints.size() &&
                    h.ofe_index == report.ofe_checkpoints[next_checkpoint]) {
                    cell.checkpoint_accuracy.push_back(val_fitness(best_params));
                    ++next_checkpoint;
                }
            }

            const std::vector<ConfusionCounts> val_counts =
                val_fitness.per_record_counts(cell.best_params);
            for (std::size_t v = 0; v < val_counts.size(); ++v) {
                const std::size_t record_index = fold.validation_indices[v];
                const PpgRecord& rec = dataset[record_index].record;
                RecordEvaluation eval;
                eval.record_index = record_index;
                eval.fold_index = f;
                eval.run_index = r;
                eval.subject_id = rec.subject_id();
                eval.group = rec.group();
                eval.phase = rec.phase();
                eval.counts = val_counts[v];
                report.record_evaluations.push_back(std::move(eval));
                cell.validation_counts += val_counts[v];
            }
            cell.validation = compute_metrics(cell.validation_counts);
            report.cells.push_back(std::move(cell));
        }
    }

    report.overall = overall_summary(report.record_evaluations);
    report.by_group = group_breakdown(report.record_evaluations);
    report.by_phase = phase_breakdown(report.record_evaluations);

    for (std::size_t k = 0; k < report.ofe_checkpoints.size(); ++k) {
        OfeCurvePoint point;
        point.ofe = report.ofe_checkpoints[k];
        const auto n = static_cast<double>(report.cells.size());
        for (const CvCell& cell : report.cells)
            point.mean_accuracy += cell.checkpoint_accuracy[k];
        point.mean_accuracy /= n;
        if (report.cells.size() >= 2) {
            double ss = 0.0;
            for (const CvCell& cell : report.cells) {
                const double d = cell.checkpoint_accuracy[k] - point.mean_accuracy;
                ss += d * d;
            }
            point.std_accuracy = std::sqrt(ss / (n - 1.0));
        }
        report.ofe_curve.push_back(point);
    }

    return report;
}

std::string report_to_json(const CvReport& report) {
    ordered_json j;
    j["schema"] = "cv_report/1";
    j["detector"] = to_string(report.detector);
    j["method"] = to_string(report.method);
    j["runs"] = report.runs;
    j["budget_ofe"] = report.budget_ofe;
    j["base_seed"] = report.base_seed;
    j["tolerance_s"] = report.tolerance_s;
    j["std_convention"] = "sample (n-1)";
    j["cell_metrics"] = "counts pooled over the held-out subject's records";
    j["summary_population"] = "one entry per held-out record per run";
    j["fold_count"] = report.fold_count;
    j["record_count"] = report.record_count;
    j["param_names"] = report.param_names;
    j["subjects"] = report.subjects;
    j["ofe_checkpoints"] = report.ofe_checkpoints;

    ordered_json cells = ordered_json::array();
    for (const CvCell& cell : report.cells) {
        ordered_json c;
        c["fold"] = cell.fold_index;
        c["subject"] = report.subjects[cell.fold_index];
        c["run"] = cell.run_index;
        c["seed"] = cell.seed;
        c["evaluations"] = cell.evaluations;
        c["train_fitness"] = cell.train_fitness;
        c["best_params"] = cell.best_params;
        c["validation"] = ordered_json{
            {"tp", cell.validation_counts.true_positives},
            {"fp", cell.validation_counts.false_positives},
            {"fn", cell.validation_counts.false_negatives},
            {"precision", cell.validation.precision},
            {"sensitivity", cell.validation.sensitivity},
            {"accuracy", cell.validation.accuracy}};
        c["checkpoint_accuracy"] = cell.checkpoint_accuracy;
        cells.push_back(std::move(c));
    }
    j["cells"] = std::move(cells);

    j["overall"] = row_to_json(report.overall);
    ordered_json groups = ordered_json::array();
    for (const SummaryRow& row : report.by_group) groups.push_back(row_to_json(row));
    j["by_group"] = std::move(groups);
    ordered_json phases = ordered_json::array();
    for (const SummaryRow& row : report.by_phase) phases.push_back(row_to_json(row));
    j["by_phase"] = std::move(phases);

    ordered_json curve = ordered_json::array();
    for (const OfeCurvePoint& point : report.ofe_curve) {
        curve.push_back(ordered_json{{"ofe", point.ofe},
                                     {"mean_accuracy", point.mean_accuracy},
                                     {"std_accuracy", point.std_accuracy}});
    }
    j["ofe_curve"] = std::move(curve);

    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_report_files(
    const CvReport& report, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::vector<std::filesystem::path> written;

    {
        const auto path = directory / "report.json";
        auto out = open_for_write(path);
        out << report_to_json(report);
        written.push_back(path);
    }
    {
        const auto path = directory / "group_metrics.csv";
        auto out = open_for_write(path);
        std::vector<SummaryRow> rows = report.by_group;
        rows.push_back(report.overall);
        write_summary_csv(out, rows);
        written.push_back(path);
    }
    {
        const auto path = directory / "phase_metrics.csv";
        auto out = open_for_write(path);
        write_summary_csv(out, report.by_phase);
        written.push_back(path);
    }
    {
        const auto path = directory / "ofe_curve.csv";
        auto out = open_for_write(path);
        out << "ofe,mean_accuracy,std_accuracy\n";
        for (const OfeCurvePoint& point : report.ofe_curve) {
            out << point.ofe << ',' << detail::format_double(point.mean_accuracy)
                << ',' << detail::format_double(point.std_accuracy) << '\n';
        }
        written.push_back(path);
    }
    {
        const auto path = directory / "cells.csv";
        auto out = open_for_write(path);
        out << "fold,subject,run,seed,evaluations,train_fitness";
        for (const std::string& name : report.param_names) out << ',' << name;
        out << ",tp,fp,fn,precision,sensitivity,accuracy\n";
        for (const CvCell& cell : report.cells) {
            out << cell.fold_index << ',' << report.subjects[cell.fold_index]
                << ',' << cell.run_index << ',' << cell.seed << ','
                << cell.evaluations << ','
                << detail::format_double(cell.train_fitness);
            for (double p : cell.best_params)
                out << ',' << detail::format_double(p);
            out << ',' << cell.validation_counts.true_positives << ','
                << cell.validation_counts.false_positives << ','
                << cell.validation_counts.false_negatives << ','
                << detail::format_double(cell.validation.precision) << ','
                << detail::format_double(cell.validation.sensitivity) << ','
                << detail::format_double(cell.validation.accuracy) << '\n';
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace srmac
