#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "srmac/signal.hpp"
#include "srmac/synth.hpp"

using namespace srmac;

TEST_CASE("generation is deterministic for a fixed config") {
    SynthConfig config;
    config.seed = 21;
    config.duration_s = 15.0;
    const AnnotatedRecord a = synth_record(config);
    const AnnotatedRecord b = synth_record(config);
    CHECK(a.record.samples() == b.record.samples());
    CHECK(a.peaks.times_s() == b.peaks.times_s());

    config.seed = 22;
    const AnnotatedRecord c = synth_record(config);
    CHECK(a.record.samples() != c.record.samples());
}

TEST_CASE("annotations are strictly increasing and stay inside the margins") {
    SynthConfig config;
    config.seed = 13;
    config.duration_s = 30.0;
    const AnnotatedRecord annotated = synth_record(config);
    const std::vector<double>& t = annotated.peaks.times_s();
    REQUIRE(t.size() > 20);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
    CHECK(t.front() >= config.edge_margin_s);
    CHECK(t.back() <= config.duration_s - config.edge_margin_s);

    // Beat spacing tracks the requested heart rate.
    const double mean_interval =
        (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    CHECK(mean_interval == doctest::Approx(60.0 / config.heart_rate_bpm).epsilon(0.15));
}

TEST_CASE("annotated peaks are local maxima of a low-noise record") {
    SynthConfig config;
    config.seed = 17;
    config.duration_s = 20.0;
    config.noise_std = 0.0;
    config.baseline_amplitude = 0.0;
    const AnnotatedRecord annotated = synth_record(config);
    const std::vector<double>& x = annotated.record.samples();
    for (double t : annotated.peaks.times_s()) {
        const std::int64_t i = time_to_index(t, config.sample_rate_hz);
        REQUIRE(i > 0);
        REQUIRE(i + 1 < static_cast<std::int64_t>(x.size()));
        CHECK(x[static_cast<std::size_t>(i)] >= x[static_cast<std::size_t>(i - 1)]);
        CHECK(x[static_cast<std::size_t>(i)] >= x[static_cast<std::size_t>(i + 1)]);
    }
}

TEST_CASE("config validation rejects out-of-range settings") {
    SynthConfig config;
    CHECK_NOTHROW(config.validate());

    auto expect_throw = [](SynthConfig c) {
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    };
    {
        SynthConfig c;
        c.duration_s = 0.0;
        expect_throw(c);
    }
    {
        SynthConfig c;
        c.sample_rate_hz = -200.0;
        expect_throw(c);
    }
    {
        SynthConfig c;
        c.subject_id.clear();
        expect_throw(c);
    }
    {
        SynthConfig c;
        c.heart_rate_bpm = 300.0;
        expect_throw(c);
    }
    {
        SynthConfig c;
        c.pulse_amplitude = 0.0;
        expect_throw(c);
    }
    {
        SynthConfig c;
        c.amplitude_mod_depth = 1.0;
        expect_throw(c);
    }
    {
        SynthConfig c;
        c.diastolic_jitter = 1.0;
        expect_throw(c);
    }
    {
        SynthConfig c;
        c.noise_std = -0.1;
        expect_throw(c);
    }
    {
        SynthConfig c;
        c.artifact_rate_per_min = -1.0;
        expect_throw(c);
    }
}

TEST_CASE("the record scales exactly linearly with the pulse amplitude") {
    SynthConfig config;
    config.seed = 33;
    config.duration_s = 10.0;
    const AnnotatedRecord base = synth_record(config);

    SynthConfig doubled = config;
    doubled.pulse_amplitude = 2.0 * config.pulse_amplitude;
    const AnnotatedRecord scaled = synth_record(doubled);

    REQUIRE(base.record.size() == scaled.record.size());
    CHECK(base.peaks.times_s() == scaled.peaks.times_s());
    for (std::size_t i = 0; i < base.record.size(); ++i)
        CHECK(scaled.record.samples()[i] == 2.0 * base.record.samples()[i]);
}

TEST_CASE("records start and end quiescent") {
    // The edge taper keeps non-beat components near zero at the boundaries so
    // downstream zero-phase filtering sees no step.
    SynthConfig config;
    config.seed = 3;
    config.duration_s = 30.0;
    const AnnotatedRecord annotated = synth_record(config);
    const std::vector<double>& x = annotated.record.samples();
    CHECK(std::abs(x.front()) < 1e-4 * config.pulse_amplitude);
    CHECK(std::abs(x.back()) < 1e-4 * config.pulse_amplitude);
}

TEST_CASE("artifact bursts add power") {
    SynthConfig config;
    config.seed = 44;
    config.duration_s = 30.0;
    const AnnotatedRecord clean = synth_record(config);

    SynthConfig noisy = config;
    noisy.artifact_rate_per_min = 20.0;
    noisy.artifact_amplitude = 1.2;
    const AnnotatedRecord bursty = synth_record(noisy);

    auto power = [](const std::vector<double>& v) {
        double p = 0.0;
        for (double s : v) p += s * s;
        return p / static_cast<double>(v.size());
    };
    CHECK(power(bursty.record.samples()) > 1.05 * power(clean.record.samples()));
    // Annotations do not move when artifacts are injected.
    CHECK(bursty.peaks.times_s() == clean.peaks.times_s());
}

TEST_CASE("suite layout covers subjects, groups and phases") {
    SuiteConfig config;
    config.subjects = 5;
    config.healthy_subjects = 3;
    config.duration_s = 8.0;
    config.seed = 7;
    const std::vector<AnnotatedRecord> suite = make_synth_suite(config);
    REQUIRE(suite.size() == 15);  // 5 subjects x 3 phases

    std::set<std::string> subjects;
    std::size_t healthy = 0, walking = 0;
    for (const AnnotatedRecord& rec : suite) {
        subjects.insert(rec.record.subject_id());
        if (rec.record.group() == Group::Healthy) ++healthy;
        if (rec.record.phase() == Phase::Walking) ++walking;
        CHECK(rec.record.sample_rate_hz() == config.sample_rate_hz);
        CHECK(!rec.peaks.empty());
    }
    CHECK(subjects.size() == 5);
    CHECK(healthy == 9);   // 3 healthy subjects x 3 phases
    CHECK(walking == 5);   // one per subject

    // Same subject keeps its group across phases.
    for (const AnnotatedRecord& a : suite)
        for (const AnnotatedRecord& b : suite)
            if (a.record.subject_id() == b.record.subject_id())
                CHECK(a.record.group() == b.record.group());

    // Deterministic end to end.
    const std::vector<AnnotatedRecord> again = make_synth_suite(config);
    REQUIRE(again.size() == suite.size());
    for (std::size_t i = 0; i < suite.size(); ++i) {
        CHECK(again[i].record.subject_id() == suite[i].record.subject_id());
        CHECK(again[i].record.samples() == suite[i].record.samples());
    }
}

TEST_CASE("walking is the noisy phase") {
    SuiteConfig config;
    config.subjects = 2;
    config.healthy_subjects = 1;
    config.duration_s = 20.0;
    const std::vector<AnnotatedRecord> suite = make_synth_suite(config);

    // Compare within one subject: walking records carry artifact bursts and
    // extra noise, so their high-frequency residual power exceeds rest.
    auto residual_power = [](const PpgRecord& rec) {
        const std::vector<double>& x = rec.samples();
        double p = 0.0;
        for (std::size_t i = 1; i < x.size(); ++i) {
            const double d = x[i] - x[i - 1];
            p += d * d;
        }
        return p / static_cast<double>(x.size() - 1);
    };
    for (const AnnotatedRecord& rest : suite) {
        if (rest.record.phase() != Phase::Rest) continue;
        for (const AnnotatedRecord& walk : suite) {
            if (walk.record.phase() != Phase::Walking ||
                walk.record.subject_id() != rest.record.subject_id())
                continue;
            CHECK(residual_power(walk.record) > residual_power(rest.record));
        }
    }
}

TEST_CASE("suite validation") {
    SuiteConfig config;
    config.subjects = 0;
    CHECK_THROWS_AS(make_synth_suite(config), std::invalid_argument);
    config = {};
    config.healthy_subjects = 10;
    config.subjects = 3;
    CHECK_THROWS_AS(make_synth_suite(config), std::invalid_argument);
    config = {};
    config.phases.clear();
    CHECK_THROWS_AS(make_synth_suite(config), std::invalid_argument);
}
