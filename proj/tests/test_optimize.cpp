#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "srmac/optimize.hpp"
#include "srmac/synth.hpp"

#include "test_util.hpp"

using namespace srmac;

namespace {

double sum_fitness(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

SearchSpace unit_square() {
    SearchSpace space;
    space.bounds = {{"x", 0.0, 1.0, true, true}, {"y", -2.0, 2.0, true, true}};
    return space;
}

}  // namespace

TEST_CASE("search space validation") {
    SearchSpace space;
    CHECK_THROWS_AS(space.validate(), std::invalid_argument);  // no dimensions
    space.bounds = {{"x", 1.0, 0.0, true, true}};
    CHECK_THROWS_AS(space.validate(), std::invalid_argument);  // inverted
    space.bounds = {{"x", 0.0, 0.0, true, true}};
    CHECK_THROWS_AS(space.validate(), std::invalid_argument);  // empty interval
    space.bounds = {{"x", 0.0, std::numeric_limits<double>::infinity(), true, true}};
    CHECK_THROWS_AS(space.validate(), std::invalid_argument);
    space = unit_square();
    CHECK_NOTHROW(space.validate());
    space.points_per_dim = 0;
    CHECK_THROWS_AS(space.validate(), std::invalid_argument);
}

TEST_CASE("published search domains") {
    const SearchSpace crossover = default_search_space(DetectorKind::Srmac);
    REQUIRE(crossover.bounds.size() == 4);
    CHECK(crossover.points_per_dim == 11);
    const char* names[] = {"alpha_fast", "alpha_slow", "alpha_cross", "threshold"};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(crossover.bounds[i].name == names[i]);
        CHECK(crossover.bounds[i].low == 0.7);
        CHECK(crossover.bounds[i].high == 1.0);
        CHECK(crossover.bounds[i].inclusive_low);
        CHECK_FALSE(crossover.bounds[i].inclusive_high);
    }
    CHECK(crossover.bounds[3].name == "threshold");
    CHECK(crossover.bounds[3].low == 0.0);
    CHECK(crossover.bounds[3].high == 5e-4);
    CHECK_FALSE(crossover.bounds[3].inclusive_high);

    const SearchSpace baseline = default_search_space(DetectorKind::Terma);
    REQUIRE(baseline.bounds.size() == 3);
    CHECK(baseline.bounds[0].name == "w1_ms");
    CHECK(baseline.bounds[0].low == 51.0);
    CHECK(baseline.bounds[0].high == 111.0);
    CHECK(baseline.bounds[1].low == 545.0);
    CHECK(baseline.bounds[1].high == 695.0);
    CHECK(baseline.bounds[2].low == 0.0);
    CHECK(baseline.bounds[2].high == 0.1);
    for (const ParamBound& b : baseline.bounds) {
        CHECK(b.inclusive_low);
        CHECK(b.inclusive_high);
    }
}

TEST_CASE("parameter vector conversions round-trip and validate length") {
    const SrmacParams sp{0.73, 0.80, 0.76, 2.5e-4};
    const std::vector<double> sv = params_to_vector(sp);
    REQUIRE(sv.size() == 4);
    const SrmacParams sp2 = srmac_params_from_vector(sv);
    CHECK(sp2.alpha_fast == sp.alpha_fast);
    CHECK(sp2.alpha_slow == sp.alpha_slow);
    CHECK(sp2.alpha_cross == sp.alpha_cross);
    CHECK(sp2.threshold == sp.threshold);

    const TermaParams tp{91.0, 620.0, 0.05};
    const std::vector<double> tv = params_to_vector(tp);
    REQUIRE(tv.size() == 3);
    const TermaParams tp2 = terma_params_from_vector(tv);
    CHECK(tp2.w1_ms == tp.w1_ms);
    CHECK(tp2.w2_ms == tp.w2_ms);
    CHECK(tp2.beta == tp.beta);

    const std::vector<double> wrong(2, 0.0);
    CHECK_THROWS_AS(srmac_params_from_vector(wrong), std::invalid_argument);
    CHECK_THROWS_AS(terma_params_from_vector(wrong), std::invalid_argument);
}

TEST_CASE("random search is a pure function of the seed") {
    const SearchSpace space = unit_square();
    const SearchResult a = random_search(space, sum_fitness, 64, 99);
    const SearchResult b = random_search(space, sum_fitness, 64, 99);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].params == b.history[i].params);
        CHECK(a.history[i].fitness == b.history[i].fitness);
        CHECK(a.history[i].best_so_far == b.history[i].best_so_far);
    }
    CHECK(a.best_params == b.best_params);
    CHECK(a.best_fitness == b.best_fitness);

    const SearchResult c = random_search(space, sum_fitness, 64, 100);
    CHECK(a.history[0].params != c.history[0].params);
}

TEST_CASE("thread count does not change the search result") {
    const SearchSpace space = unit_square();
    const SearchResult seq = random_search(space, sum_fitness, 128, 7, 1);
    const SearchResult par = random_search(space, sum_fitness, 128, 7, 4);
    REQUIRE(seq.history.size() == par.history.size());
    for (std::size_t i = 0; i < seq.history.size(); ++i) {
        CHECK(seq.history[i].params == par.history[i].params);
        CHECK(seq.history[i].fitness == par.history[i].fitness);
    }
    CHECK(seq.best_params == par.best_params);

    const SearchResult gseq = grid_search(space, sum_fitness, 1);
    const SearchResult gpar = grid_search(space, sum_fitness, 3);
    CHECK(gseq.best_params == gpar.best_params);
    CHECK(gseq.evaluations == gpar.evaluations);
}

TEST_CASE("history bookkeeping") {
    const SearchSpace space = unit_square();
    const SearchResult res = random_search(space, sum_fitness, 50, 3);
    CHECK(res.evaluations == 50);
    REQUIRE(res.history.size() == 50);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < res.history.size(); ++i) {
        CHECK(res.history[i].ofe_index == i + 1);
        best = std::max(best, res.history[i].fitness);
        CHECK(res.history[i].best_so_far == best);
    }
    CHECK(res.best_fitness == best);
    // The reported best is an actual evaluated candidate.
    bool found = false;
    for (const HistoryEntry& h : res.history)
        if (h.params == res.best_params && h.fitness == res.best_fitness) found = true;
    CHECK(found);
}

TEST_CASE("random candidates respect half-open bounds") {
    SearchSpace space = default_search_space(DetectorKind::Srmac);
    const SearchResult res = random_search(space, sum_fitness, 500, 11);
    for (const HistoryEntry& h : res.history) {
        REQUIRE(h.params.size() == 4);
        for (std::size_t d = 0; d < 4; ++d) {
            CHECK(h.params[d] >= space.bounds[d].low);
            CHECK(h.params[d] < space.bounds[d].high);
        }
    }
}

TEST_CASE("ties keep the earliest candidate") {
    const SearchSpace space = unit_square();
    auto constant = [](std::span<const double>) { return 0.5; };
    const SearchResult res = random_search(space, constant, 20, 1);
    CHECK(res.best_fitness == 0.5);
    CHECK(res.best_params == res.history.front().params);

    const SearchResult grid = grid_search(space, constant);
    CHECK(grid.best_params == grid.history.front().params);
}

TEST_CASE("grid search enumerates the full cartesian product") {
    const SearchSpace baseline = default_search_space(DetectorKind::Terma);
    const SearchResult res = grid_search(baseline, sum_fitness);
    CHECK(res.evaluations == 1331);  // 11^3
    REQUIRE(res.history.size() == 1331);

    std::set<double> w1, w2, beta;
    bool has_zero_beta = false;
    for (const HistoryEntry& h : res.history) {
        w1.insert(h.params[0]);
        w2.insert(h.params[1]);
        beta.insert(h.params[2]);
        if (h.params[2] == 0.0) has_zero_beta = true;
    }
    CHECK(w1.size() == 11);
    CHECK(w2.size() == 11);
    CHECK(beta.size() == 11);
    CHECK(has_zero_beta);
    // Inclusive endpoints sit exactly on the bounds.
    CHECK(*w1.begin() == 51.0);
    CHECK(*w1.rbegin() == 111.0);
    CHECK(*w2.begin() == 545.0);
    CHECK(*w2.rbegin() == 695.0);
    CHECK(*beta.begin() == 0.0);
    CHECK(*beta.rbegin() == 0.1);

    // Lexicographic order, last dimension fastest.
    CHECK(res.history[0].params == std::vector<double>{51.0, 545.0, 0.0});
    CHECK(res.history[1].params[0] == 51.0);
    CHECK(res.history[1].params[1] == 545.0);
    CHECK(res.history[11].params[1] > 545.0);
}

TEST_CASE("exclusive grid endpoints move one representable value inward") {
    SearchSpace space = default_search_space(DetectorKind::Srmac);
    space.points_per_dim = 3;
    const SearchResult res = grid_search(space, sum_fitness);
    CHECK(res.evaluations == 81);  // 3^4
    double max_alpha = 0.0, max_thr = 0.0;
    for (const HistoryEntry& h : res.history) {
        max_alpha = std::max(max_alpha, h.params[0]);
        max_thr = std::max(max_thr, h.params[3]);
    }
    CHECK(max_alpha == std::nextafter(1.0, 0.0));
    CHECK(max_alpha < 1.0);
    CHECK(max_thr == std::nextafter(5e-4, 0.0));
    CHECK(max_thr < 5e-4);
    // The pulled-in endpoints are still valid detector parameters.
    CHECK_NOTHROW(SrmacParams{max_alpha, 0.7, 0.7, max_thr}.validate());
}

TEST_CASE("a single-point grid sits at the midpoint") {
    SearchSpace space = unit_square();
    space.points_per_dim = 1;
    const SearchResult res = grid_search(space, sum_fitness);
    CHECK(res.evaluations == 1);
    CHECK(res.best_params == std::vector<double>{0.5, 0.0});
}

TEST_CASE("history serializes as csv") {
    const SearchSpace space = unit_square();
    auto fitness = [](std::span<const double> v) { return v[0]; };
    const SearchResult res = random_search(space, fitness, 3, 5);
    std::ostringstream out;
    write_history_csv(out, res);
    const std::string text = out.str();
    REQUIRE(text.rfind("ofe_index,fitness,best_so_far\n", 0) == 0);
    std::size_t lines = 0;
    for (char ch : text)
        if (ch == '\n') ++lines;
    CHECK(lines == 4);  // header + one row per evaluation
    CHECK(text.find("\n1,") != std::string::npos);
    CHECK(text.find("\n3,") != std::string::npos);
}

TEST_CASE("search rejects malformed requests") {
    const SearchSpace space = unit_square();
    CHECK_THROWS_AS(random_search(space, sum_fitness, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(random_search(space, FitnessFn{}, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(grid_search(space, FitnessFn{}), std::invalid_argument);
}

TEST_CASE("prepared records cache the parameter-independent pipeline") {
    SuiteConfig config;
    config.subjects = 2;
    config.healthy_subjects = 1;
    config.phases = {Phase::Rest};
    config.duration_s = 20.0;
    const std::vector<AnnotatedRecord> records = make_synth_suite(config);
    const std::vector<PreparedRecord> prepared = prepare_records(records);
    REQUIRE(prepared.size() == records.size());
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        CHECK(prepared[i].subject_id == records[i].record.subject_id());
        CHECK(prepared[i].filtered.size() == records[i].record.size());
        CHECK(prepared[i].z.size() == records[i].record.size());
        CHECK(prepared[i].annotations.size() == records[i].peaks.size());
        for (std::size_t k = 0; k < prepared[i].z.size(); ++k) {
            const double f = prepared[i].filtered[k];
            const double c = f > 0.0 ? f : 0.0;
            CHECK(prepared[i].z[k] == c * c);
        }
    }

    // The cached path and the one-shot path agree bit for bit.
    const std::vector<double> params = {0.73, 0.80, 0.76, 2.5e-4};
    const DetectorFitness fitness(DetectorKind::Srmac, prepared);
    CHECK(fitness(params) ==
          evaluate_fitness(params, records, DetectorKind::Srmac));

    // Detection through the cache matches the full batch pipeline.
    const PeakList via_cache =
        detect_prepared(DetectorKind::Srmac, params, prepared[0]);
    const PeakList via_batch =
        srmac_detect_batch(srmac_params_from_vector(params), records[0].record);
    CHECK(via_cache.times_s() == via_batch.times_s());

    const std::vector<double> tparams = {111.0, 667.0, 0.02};
    const PeakList terma_cache =
        detect_prepared(DetectorKind::Terma, tparams, prepared[0]);
    const PeakList terma_batch =
        terma_detect_batch(terma_params_from_vector(tparams), records[0].record);
    CHECK(terma_cache.times_s() == terma_batch.times_s());
}

TEST_CASE("out-of-domain candidates fail loudly instead of scoring zero") {
    SuiteConfig config;
    config.subjects = 1;
    config.healthy_subjects = 1;
    config.phases = {Phase::Rest};
    config.duration_s = 10.0;
    const std::vector<PreparedRecord> prepared =
        prepare_records(make_synth_suite(config));
    const std::vector<double> bad_alpha = {0.5, 0.8, 0.8, 1e-4};
    CHECK_THROWS_AS(detect_prepared(DetectorKind::Srmac, bad_alpha, prepared[0]),
                    std::invalid_argument);
    const std::vector<double> bad_w1 = {20.0, 600.0, 0.0};
    CHECK_THROWS_AS(detect_prepared(DetectorKind::Terma, bad_w1, prepared[0]),
                    std::invalid_argument);

    DetectorFitness fitness(DetectorKind::Srmac, prepared);
    CHECK_THROWS_AS(fitness(bad_alpha), std::invalid_argument);
    CHECK_THROWS_AS(
        (DetectorFitness{DetectorKind::Srmac, std::vector<PreparedRecord>{}}),
        std::invalid_argument);
}

TEST_CASE("fitness pools confusion counts before scoring") {
    SuiteConfig config;
    config.subjects = 2;
    config.healthy_subjects = 1;
    config.phases = {Phase::Rest, Phase::Recovery};
    config.duration_s = 15.0;
    const std::vector<PreparedRecord> prepared =
        prepare_records(make_synth_suite(config));
    const DetectorFitness fitness(DetectorKind::Srmac, prepared);
    const std::vector<double> params = {0.73, 0.80, 0.76, 2.5e-4};

    const std::vector<ConfusionCounts> per_record = fitness.per_record_counts(params);
    REQUIRE(per_record.size() == prepared.size());
    const Metrics pooled = aggregate_pooled(per_record);
    CHECK(fitness(params) == pooled.accuracy);
    CHECK(fitness(params) >= 0.0);
    CHECK(fitness(params) <= 1.0);
}
