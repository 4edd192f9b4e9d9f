// srmac: synthetic data generation, peak detection, evaluation, parameter
// search and cross-validation from one binary. Every command is
// deterministic given its flags and seed; outputs are plain CSV/JSON.

#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srmac/crossval.hpp"
#include "srmac/dataset.hpp"
#include "srmac/metrics.hpp"
#include "srmac/optimize.hpp"
#include "srmac/srmac_detector.hpp"
#include "srmac/synth.hpp"
#include "srmac/terma_detector.hpp"

namespace {

using namespace srmac;

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

DetectorKind parse_detector(const std::string& name) {
    if (name == "srmac") return DetectorKind::Srmac;
    if (name == "terma") return DetectorKind::Terma;
    throw std::runtime_error("unknown detector: " + name);
}

SearchMethod parse_search(const std::string& name) {
    if (name == "random") return SearchMethod::Random;
    if (name == "grid") return SearchMethod::Grid;
    throw std::runtime_error("unknown search method: " + name);
}

Phase parse_phase(const std::string& name) {
    const auto phase = parse_phase_dir(name);
    if (!phase) throw std::runtime_error("unknown phase: " + name);
    return *phase;
}

// Flags shared by detect/optimize/crossval for the preprocessing filter.
struct BandpassFlags {
    double low_hz = 0.5;
    double high_hz = 8.0;
    int order = 2;
    std::string mode = "zero-phase";

    void attach(CLI::App& cmd) {
        cmd.add_option("--low", low_hz, "Bandpass low cutoff in Hz");
        cmd.add_option("--high", high_hz, "Bandpass high cutoff in Hz");
        cmd.add_option("--order", order, "Lowpass prototype order");
        cmd.add_option("--bandpass-mode", mode,
                       "Filter mode: zero-phase or causal")
            ->check(CLI::IsMember({"zero-phase", "causal"}));
    }

    BandpassSpec spec() const {
        BandpassSpec s;
        s.low_cut_hz = low_hz;
        s.high_cut_hz = high_hz;
        s.order = order;
        s.mode = mode == "causal" ? FilterMode::Causal : FilterMode::ZeroPhase;
        return s;
    }
};

struct SuiteFlags {
    bool enabled = false;
    std::size_t subjects = 5;
    std::size_t healthy = 3;
    std::vector<std::string> phases{"rest", "walking", "recovery"};
    double duration_s = 60.0;
    double sample_rate_hz = 200.0;
    std::uint64_t seed = 1;
    double walking_artifact_rate = 10.0;

    void attach(CLI::App& cmd) {
        cmd.add_flag("--synth-suite", enabled,
                     "Generate a synthetic suite instead of loading a dataset");
        cmd.add_option("--subjects", subjects, "Synthetic subjects");
        cmd.add_option("--healthy", healthy,
                       "How many synthetic subjects are healthy");
        cmd.add_option("--phases", phases,
                       "Synthetic phases (rest walking recovery)");
        cmd.add_option("--duration", duration_s,
                       "Synthetic record duration in seconds");
        cmd.add_option("--suite-seed", seed, "Synthetic suite seed");
        cmd.add_option("--walking-artifacts", walking_artifact_rate,
                       "Walking-phase artifact bursts per minute");
    }

    SuiteConfig config() const {
        SuiteConfig c;
        c.subjects = subjects;
        c.healthy_subjects = healthy;
        c.phases.clear();
        for (const std::string& p : phases) c.phases.push_back(parse_phase(p));
        c.duration_s = duration_s;
        c.sample_rate_hz = sample_rate_hz;
        c.seed = seed;
        c.walking_artifact_rate_per_min = walking_artifact_rate;
        return c;
    }
};

std::vector<AnnotatedRecord> gather_records(const std::string& dataset_flag,
                                            const SuiteFlags& suite,
                                            double sample_rate_hz) {
    if (suite.enabled) return make_synth_suite(suite.config());

    std::string root = dataset_flag;
    if (root.empty()) {
        if (const char* env = std::getenv("SRMAC_DATASET_ROOT")) root = env;
    }
    if (root.empty())
        throw std::runtime_error(
            "no input: pass --dataset, set SRMAC_DATASET_ROOT, or use "
            "--synth-suite");

    DatasetOptions options;
    options.sample_rate_hz = sample_rate_hz;
    LoadResult loaded = load_dataset(root, options);
    for (const std::string& w : loaded.warnings)
        std::cerr << "warning: " << w << '\n';
    if (loaded.records.empty())
        throw std::runtime_error("dataset is empty: " + root);
    std::cerr << "loaded " << loaded.records.size() << " records from "
              << loaded.subject_count << " subjects ("
              << fmt(loaded.total_minutes) << " minutes, " << loaded.total_peaks
              << " annotated peaks)\n";
    return std::move(loaded.records);
}

// Tuned on the synthetic corpus; see README for how to re-derive.
constexpr SrmacParams kDefaultSrmacParams{0.73, 0.80, 0.76, 2.5e-4};
constexpr TermaParams kDefaultTermaParams{111.0, 667.0, 0.0};

int cmd_synth(const SuiteFlags& suite, const std::string& out_dir) {
    const std::vector<AnnotatedRecord> records = make_synth_suite(suite.config());
    const auto written = save_dataset(records, out_dir);
    std::size_t peaks = 0;
    for (const AnnotatedRecord& r : records) peaks += r.peaks.size();
    std::cout << "wrote " << written.size() << " records (" << peaks
              << " annotated peaks) under " << out_dir << '\n';
    return 0;
}

struct DetectFlags {
    std::string input;
    bool synth = false;
    double duration_s = 60.0;
    double heart_rate = 75.0;
    double noise_std = 0.015;
    double artifact_rate = 0.0;
    std::uint64_t seed = 1;

    double sample_rate_hz = 200.0;
    std::size_t column = 0;
    std::string detector = "srmac";
    SrmacParams srmac_params = kDefaultSrmacParams;
    TermaParams terma_params = kDefaultTermaParams;
    std::string peaks_from = "filtered";
    std::string output;
    std::string trace;
};

int cmd_detect(const DetectFlags& flags, const BandpassFlags& bandpass) {
    PpgRecord record = [&] {
        if (flags.synth) {
            SynthConfig sc;
            sc.duration_s = flags.duration_s;
            sc.sample_rate_hz = flags.sample_rate_hz;
            sc.heart_rate_bpm = flags.heart_rate;
            sc.noise_std = flags.noise_std;
            sc.artifact_rate_per_min = flags.artifact_rate;
            sc.seed = flags.seed;
            return synth_record(sc).record;
        }
        if (flags.input.empty())
            throw std::runtime_error("detect: pass --input FILE or --synth");
        DatasetOptions options;
        options.sample_rate_hz = flags.sample_rate_hz;
        options.signal_column = flags.column;
        return PpgRecord(load_signal_csv(flags.input, options),
                         flags.sample_rate_hz,
                         std::filesystem::path(flags.input).stem().string(),
                         Group::Healthy, Phase::Rest);
    }();

    const BandpassSpec spec = bandpass.spec();
    const DetectorKind kind = parse_detector(flags.detector);
    PeakList peaks;

    if (kind == DetectorKind::Srmac) {
        flags.srmac_params.validate();
        SrmacBatchOptions options;
        options.peak_source = flags.peaks_from == "raw" ? PeakSource::RawSignal
                                                        : PeakSource::FilteredInput;
        peaks = srmac_detect_batch(flags.srmac_params, record, spec, options);

        if (!flags.trace.empty()) {
            const BiquadCascade cascade =
                design_bandpass(spec, record.sample_rate_hz());
            const std::vector<double> filtered =
                filter_batch(cascade, record.samples(), spec.mode);
            SrmacDetector det(flags.srmac_params, record.sample_rate_hz());
            auto out = open_out(flags.trace);
            out << "index,time_s,input,filtered,fast,slow,cross,in_roi\n";
            for (std::size_t i = 0; i < filtered.size(); ++i) {
                det.push(filtered[i]);
                out << i << ',' << fmt(index_to_time(static_cast<std::int64_t>(i),
                                                     record.sample_rate_hz()))
                    << ',' << fmt(record.samples()[i]) << ',' << fmt(filtered[i])
                    << ',' << fmt(det.fast()) << ',' << fmt(det.slow()) << ','
                    << fmt(det.cross()) << ',' << (det.in_roi() ? 1 : 0) << '\n';
            }
        }
    } else {
        if (spec.mode != FilterMode::ZeroPhase)
            throw std::runtime_error(
                "detect: the two-average detector is defined on zero-phase "
                "filtering only");
        flags.terma_params.validate();
        peaks = terma_detect_batch(flags.terma_params, record, spec);

        if (!flags.trace.empty()) {
            const TermaTrace trace = terma_trace(flags.terma_params, record, spec);
            auto out = open_out(flags.trace);
            out << "index,time_s,input,filtered,z,ma_peak,ma_beat\n";
            for (std::size_t i = 0; i < trace.z.size(); ++i) {
                out << i << ',' << fmt(index_to_time(static_cast<std::int64_t>(i),
                                                     record.sample_rate_hz()))
                    << ',' << fmt(record.samples()[i]) << ','
                    << fmt(trace.filtered[i]) << ',' << fmt(trace.z[i]) << ','
                    << fmt(trace.ma_peak[i]) << ',' << fmt(trace.ma_beat[i])
                    << '\n';
            }
        }
    }

    for (double t : peaks.times_s()) std::cout << fmt(t) << '\n';

    if (!flags.output.empty()) {
        auto out = open_out(flags.output);
        for (double t : peaks.times_s())
            out << time_to_index(t, record.sample_rate_hz()) << '\n';
    }
    std::cerr << peaks.size() << " peaks\n";
    return 0;
}

PeakList load_peaks(const std::string& path, bool times_in_seconds, double rate) {
    if (times_in_seconds) {
        std::vector<double> times;
        for (double v : load_signal_csv(path)) times.push_back(v);
        return PeakList(std::move(times));
    }
    const std::vector<std::int64_t> indices = load_annotation_csv(path);
    return PeakList::from_sample_indices(indices, rate);
}

int cmd_evaluate(const std::string& detections, const std::string& annotations,
                 double rate, double tol, bool times_in_seconds,
                 const std::string& json_out) {
    const PeakList detected = load_peaks(detections, times_in_seconds, rate);
    const PeakList annotated = load_peaks(annotations, times_in_seconds, rate);

    const MatchResult match = match_peaks(detected, annotated, tol);
    const Metrics m = compute_metrics(match.counts);

    std::cout << "TP " << match.counts.true_positives << "  FP "
              << match.counts.false_positives << "  FN "
              << match.counts.false_negatives << '\n'
              << "precision   " << fmt(m.precision) << '\n'
              << "sensitivity " << fmt(m.sensitivity) << '\n'
              << "accuracy    " << fmt(m.accuracy) << '\n';

    if (!json_out.empty()) {
        nlohmann::ordered_json j;
        j["schema"] = "metrics/1";
        j["tolerance_s"] = tol;
        j["tp"] = match.counts.true_positives;
        j["fp"] = match.counts.false_positives;
        j["fn"] = match.counts.false_negatives;
        j["precision"] = m.precision;
        j["sensitivity"] = m.sensitivity;
        j["accuracy"] = m.accuracy;
        const std::string text = j.dump(2) + "\n";
        if (json_out == "-") {
            std::cout << text;
        } else {
            auto out = open_out(json_out);
            out << text;
        }
    }
    return 0;
}

struct SearchFlags {
    std::string dataset;
    std::string detector = "srmac";
    std::string method = "random";
    std::size_t budget = 300;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double tol = kDefaultMatchToleranceS;
    double sample_rate_hz = 200.0;
};

int cmd_optimize(const SearchFlags& flags, const SuiteFlags& suite,
                 const BandpassFlags& bandpass, const std::string& history_path) {
    const std::vector<AnnotatedRecord> records =
        gather_records(flags.dataset, suite, flags.sample_rate_hz);
    const DetectorKind kind = parse_detector(flags.detector);
    const SearchMethod method = parse_search(flags.method);

    const DetectorFitness fitness(kind, prepare_records(records, bandpass.spec()),
                                  flags.tol);
    const FitnessFn fn = [&fitness](std::span<const double> p) {
        return fitness(p);
    };
    const SearchSpace space = default_search_space(kind);

    const SearchResult result =
        method == SearchMethod::Grid
            ? grid_search(space, fn, flags.threads)
            : random_search(space, fn, flags.budget, flags.seed, flags.threads);

    std::cout << "evaluations " << result.evaluations << '\n';
    for (std::size_t d = 0; d < space.bounds.size(); ++d)
        std::cout << space.bounds[d].name << ' ' << fmt(result.best_params[d])
                  << '\n';
    std::cout << "fitness " << fmt(result.best_fitness) << '\n';

    if (!history_path.empty()) {
        auto out = open_out(history_path);
        write_history_csv(out, result);
    }
    return 0;
}

int cmd_crossval(const SearchFlags& flags, const SuiteFlags& suite,
                 const BandpassFlags& bandpass, std::size_t runs,
                 const std::vector<std::size_t>& checkpoints,
                 const std::string& out_dir) {
    const std::vector<AnnotatedRecord> records =
        gather_records(flags.dataset, suite, flags.sample_rate_hz);

    SearchConfig config;
    config.method = parse_search(flags.method);
    config.budget_ofe = flags.budget;
    config.runs = runs;
    config.base_seed = flags.seed;
    if (!checkpoints.empty()) config.ofe_checkpoints = checkpoints;
    config.tolerance_s = flags.tol;
    config.bandpass = bandpass.spec();
    config.threads = flags.threads;

    const CvReport report =
        run_lsocv(records, parse_detector(flags.detector), config);
    const auto written = write_report_files(report, out_dir);

    std::cout << "folds " << report.fold_count << "  runs " << report.runs
              << "  evaluations/cell " << report.budget_ofe << '\n';
    auto print_row = [](const SummaryRow& row) {
        std::cout << row.label << ": precision " << fmt(row.mean.precision)
                  << " (" << fmt(row.stddev.precision) << ")  sensitivity "
                  << fmt(row.mean.sensitivity) << " ("
                  << fmt(row.stddev.sensitivity) << ")  accuracy "
                  << fmt(row.mean.accuracy) << " (" << fmt(row.stddev.accuracy)
                  << ")\n";
    };
    print_row(report.overall);
    for (const SummaryRow& row : report.by_group) print_row(row);
    for (const SummaryRow& row : report.by_phase) print_row(row);
    for (const auto& path : written) std::cerr << "wrote " << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Streaming systolic-peak detection: synthetic data, detection, "
        "evaluation, parameter search and leave-subject-out cross-validation"};
    app.require_subcommand(1);

    // synth
    SuiteFlags synth_suite;
    std::string synth_out = "synth_dataset";
    CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset tree");
    synth_suite.attach(*synth);
    synth->add_option("--out", synth_out, "Output dataset root");

    // detect
    DetectFlags detect;
    BandpassFlags detect_bandpass;
    CLI::App* det = app.add_subcommand("detect", "Detect peaks in one record");
    det->add_option("--input", detect.input, "Signal CSV (one sample per line)");
    det->add_flag("--synth", detect.synth, "Generate the input instead");
    det->add_option("--duration", detect.duration_s, "Synthetic duration (s)");
    det->add_option("--hr", detect.heart_rate, "Synthetic heart rate (bpm)");
    det->add_option("--noise-std", detect.noise_std, "Synthetic noise std");
    det->add_option("--artifacts", detect.artifact_rate,
                    "Synthetic artifact bursts per minute");
    det->add_option("--seed", detect.seed, "Synthetic seed");
    det->add_option("--rate", detect.sample_rate_hz, "Sample rate in Hz");
    det->add_option("--column", detect.column, "Signal CSV column");
    det->add_option("--detector", detect.detector, "srmac or terma")
        ->check(CLI::IsMember({"srmac", "terma"}));
    det->add_option("--alpha-fast", detect.srmac_params.alpha_fast,
                    "Fast EWMA smoothing factor");
    det->add_option("--alpha-slow", detect.srmac_params.alpha_slow,
                    "Slow EWMA smoothing factor");
    det->add_option("--alpha-cross", detect.srmac_params.alpha_cross,
                    "Crossover EWMA smoothing factor");
    det->add_option("--threshold", detect.srmac_params.threshold,
                    "Crossover threshold");
    det->add_option("--w1", detect.terma_params.w1_ms, "Peak window (ms)");
    det->add_option("--w2", detect.terma_params.w2_ms, "Beat window (ms)");
    det->add_option("--beta", detect.terma_params.beta, "Offset weight");
    det->add_option("--peaks-from", detect.peaks_from,
                    "Where the in-region argmax is taken: filtered or raw")
        ->check(CLI::IsMember({"filtered", "raw"}));
    det->add_option("--output", detect.output,
                    "Write detected peak sample indices to this CSV");
    det->add_option("--trace", detect.trace,
                    "Write per-sample detector internals to this CSV");
    detect_bandpass.attach(*det);

    // evaluate
    std::string eval_detections, eval_annotations, eval_json;
    double eval_rate = 200.0;
    double eval_tol = kDefaultMatchToleranceS;
    bool eval_times = false;
    CLI::App* ev = app.add_subcommand(
        "evaluate", "Score a detection file against an annotation file");
    ev->add_option("--detections", eval_detections, "Detected peaks CSV")
        ->required();
    ev->add_option("--annotations", eval_annotations, "Annotated peaks CSV")
        ->required();
    ev->add_option("--rate", eval_rate, "Sample rate for index files (Hz)");
    ev->add_option("--tol", eval_tol, "Match tolerance in seconds");
    ev->add_flag("--times", eval_times, "Files hold seconds, not sample indices");
    ev->add_option("--json", eval_json, "Write metrics JSON here ('-' = stdout)");

    // optimize
    SearchFlags opt_flags;
    SuiteFlags opt_suite;
    BandpassFlags opt_bandpass;
    std::string opt_history;
    CLI::App* opt = app.add_subcommand(
        "optimize", "Search detector parameters on a whole dataset");
    opt->add_option("--dataset", opt_flags.dataset, "Dataset root");
    opt->add_option("--detector", opt_flags.detector, "srmac or terma")
        ->check(CLI::IsMember({"srmac", "terma"}));
    opt->add_option("--search", opt_flags.method, "random or grid")
        ->check(CLI::IsMember({"random", "grid"}));
    opt->add_option("--budget", opt_flags.budget, "Random-search evaluations");
    opt->add_option("--seed", opt_flags.seed, "Random-search seed");
    opt->add_option("--threads", opt_flags.threads, "Worker threads");
    opt->add_option("--tol", opt_flags.tol, "Match tolerance in seconds");
    opt->add_option("--rate", opt_flags.sample_rate_hz, "Dataset sample rate");
    opt->add_option("--history", opt_history, "Write OFE history CSV here");
    opt_suite.attach(*opt);
    opt_bandpass.attach(*opt);

    // crossval
    SearchFlags cv_flags;
    SuiteFlags cv_suite;
    BandpassFlags cv_bandpass;
    std::size_t cv_runs = 30;
    std::vector<std::size_t> cv_checkpoints;
    std::string cv_out = "cv_report";
    CLI::App* cv = app.add_subcommand(
        "crossval", "Leave-subject-out cross-validation with parameter search");
    cv->add_option("--dataset", cv_flags.dataset, "Dataset root");
    cv->add_option("--detector", cv_flags.detector, "srmac or terma")
        ->check(CLI::IsMember({"srmac", "terma"}));
    cv->add_option("--search", cv_flags.method, "random or grid")
        ->check(CLI::IsMember({"random", "grid"}));
    cv->add_option("--budget", cv_flags.budget, "Random-search evaluations");
    cv->add_option("--runs", cv_runs, "Search repetitions per fold");
    cv->add_option("--seed", cv_flags.seed, "Base seed");
    cv->add_option("--threads", cv_flags.threads, "Worker threads");
    cv->add_option("--tol", cv_flags.tol, "Match tolerance in seconds");
    cv->add_option("--rate", cv_flags.sample_rate_hz, "Dataset sample rate");
    cv->add_option("--checkpoints", cv_checkpoints,
                   "OFE checkpoints for the validation curve");
    cv->add_option("--out", cv_out, "Report output directory");
    cv_suite.attach(*cv);
    cv_bandpass.attach(*cv);

    // A bare invocation lists the subcommands instead of a terse error.
    if (argc <= 1) {
        std::cerr << app.help();
        return 2;
    }
    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_suite, synth_out);
        if (det->parsed()) return cmd_detect(detect, detect_bandpass);
        if (ev->parsed())
            return cmd_evaluate(eval_detections, eval_annotations, eval_rate,
                                eval_tol, eval_times, eval_json);
        if (opt->parsed())
            return cmd_optimize(opt_flags, opt_suite, opt_bandpass, opt_history);
        if (cv->parsed())
            return cmd_crossval(cv_flags, cv_suite, cv_bandpass, cv_runs,
                                cv_checkpoints, cv_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
