#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "phaseid/errors.hpp"
#include "phaseid/rng.hpp"
#include "phaseid/segmentation.hpp"
#include "test_util.hpp"

using namespace phaseid;

namespace {

MeterSeries series(std::vector<double> power, std::vector<double> voltage) {
    MeterSeries m;
    m.meter_id = "m";
    m.power_kw = std::move(power);
    m.voltage = std::move(voltage);
    return m;
}

std::set<std::size_t> index_set(const SegmentSet& s) {
    auto v = s.indices();
    return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("low_power_mask applies 0 <= P <= C with gaps excluded") {
    CHECK(low_power_mask(std::vector<double>{0.3, 1.2, 0.5}, 1.0) ==
          std::vector<bool>{true, false, true});
    CHECK(low_power_mask(std::vector<double>{0.3, missing_value(), 0.5}, 1.0) ==
          std::vector<bool>{true, false, true});
    CHECK(low_power_mask(std::vector<double>{-0.2}, 1.0) == std::vector<bool>{false});
    CHECK(low_power_mask(std::vector<double>{0.0, 1.0}, 1.0) ==
          std::vector<bool>{true, true});  // inclusive bounds
}

TEST_CASE("min_run_length from T_dur and sampling interval") {
    SegmentParams p{1.0, 0.5, 15.0};
    CHECK(p.min_run_length() == 2);
    CHECK(SegmentParams{1.0, 0.0, 15.0}.min_run_length() == 1);
    CHECK(SegmentParams{1.0, 2.0, 15.0}.min_run_length() == 8);
    CHECK(SegmentParams{1.0, 0.6, 15.0}.min_run_length() == 3);  // ceil
    CHECK_THROWS_AS((SegmentParams{-1.0, 0.5, 15.0}.min_run_length()), ContractError);
    CHECK_THROWS_AS((SegmentParams{1.0, -0.5, 15.0}.min_run_length()), ContractError);
    CHECK_THROWS_AS((SegmentParams{1.0, 0.5, 0.0}.min_run_length()), ContractError);
}

TEST_CASE("joint_segments keeps sustained jointly low runs") {
    MeterSeries a = series({0.5, 0.5, 0.5, 2.0}, {1, 1, 1, 1});
    MeterSeries b = series({0.4, 0.4, 2.0, 0.4}, {1, 1, 1, 1});
    SegmentParams p{1.0, 0.5, 15.0};  // min run = 2

    SegmentSet s = joint_segments(a, b, p);
    REQUIRE(s.runs.size() == 1);
    CHECK(s.runs[0] == IndexRun{0, 2});
    CHECK(s.total_points == 2);
    CHECK_FALSE(s.fallback_used);

    SUBCASE("all powers below C gives one full run") {
        MeterSeries c = series({0.1, 0.1, 0.1, 0.1}, {1, 1, 1, 1});
        MeterSeries d = series({0.2, 0.2, 0.2, 0.2}, {1, 1, 1, 1});
        SegmentSet all = joint_segments(c, d, p);
        CHECK(all.runs == std::vector<IndexRun>{{0, 4}});
        CHECK_FALSE(all.fallback_used);
    }
    SUBCASE("all powers above C falls back to every joint index") {
        MeterSeries c = series({2, 2, 2, 2}, {1, 1, 1, 1});
        MeterSeries d = series({3, 3, 3, 3}, {1, 1, 1, 1});
        SegmentSet fb = joint_segments(c, d, p);
        CHECK(fb.fallback_used);
        CHECK(fb.total_points == 4);
        CHECK(index_set(fb) == std::set<std::size_t>{0, 1, 2, 3});
    }
    SUBCASE("too few qualifying points also falls back") {
        SegmentSet fb = joint_segments(a, b, p, 3);  // 2 < 3
        CHECK(fb.fallback_used);
        CHECK(fb.total_points == 4);
    }
    SUBCASE("fallback skips indices where voltage is absent") {
        MeterSeries c = series({2, 2, 2, 2}, {1, missing_value(), 1, 1});
        MeterSeries d = series({3, 3, 3, 3}, {1, 1, 1, 1});
        SegmentSet fb = joint_segments(c, d, p);
        CHECK(fb.fallback_used);
        CHECK(index_set(fb) == std::set<std::size_t>{0, 2, 3});
    }
}

TEST_CASE("a missing sample in either meter breaks contiguity") {
    MeterSeries a = series({0.5, 0.5, 0.5, 0.5, 0.5}, {1, 1, missing_value(), 1, 1});
    MeterSeries b = series({0.4, 0.4, 0.4, 0.4, 0.4}, {1, 1, 1, 1, 1});
    SegmentParams p{1.0, 0.5, 15.0};
    SegmentSet s = joint_segments(a, b, p);
    CHECK(s.runs == std::vector<IndexRun>{{0, 2}, {3, 5}});

    MeterSeries c = series({0.5, missing_value(), 0.5, 0.5, 0.5}, {1, 1, 1, 1, 1});
    SegmentSet s2 = joint_segments(c, b, p);
    CHECK(s2.runs == std::vector<IndexRun>{{2, 5}});
}

TEST_CASE("axis mismatch is a contract error") {
    MeterSeries a = series({0.5, 0.5}, {1, 1});
    MeterSeries b = series({0.5, 0.5, 0.5}, {1, 1, 1});
    CHECK_THROWS_AS(joint_segments(a, b, SegmentParams{}), ContractError);
}

TEST_CASE("selection is symmetric and monotone in C and T_dur") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 40 + rng.below(60);
        std::vector<double> pa = testutil::random_series(rng, n, 0.0, 2.0);
        std::vector<double> pb = testutil::random_series(rng, n, 0.0, 2.0);
        std::vector<double> va(n, 1.0), vb(n, 1.0);
        MeterSeries a = series(pa, va), b = series(pb, vb);

        SegmentParams lo{0.6, 0.5, 15.0};
        SegmentParams hi{1.4, 0.5, 15.0};
        SegmentSet s_lo = joint_segments(a, b, lo);
        SegmentSet s_hi = joint_segments(a, b, hi);
        if (!s_lo.fallback_used && !s_hi.fallback_used) {
            auto set_lo = index_set(s_lo), set_hi = index_set(s_hi);
            CHECK(std::includes(set_hi.begin(), set_hi.end(), set_lo.begin(), set_lo.end()));
        }

        SegmentParams shorter{1.0, 0.25, 15.0};
        SegmentParams longer{1.0, 1.0, 15.0};
        SegmentSet s_short = joint_segments(a, b, shorter);
        SegmentSet s_long = joint_segments(a, b, longer);
        if (!s_short.fallback_used && !s_long.fallback_used) {
            auto set_s = index_set(s_short), set_l = index_set(s_long);
            CHECK(std::includes(set_s.begin(), set_s.end(), set_l.begin(), set_l.end()));
        }

        SegmentSet swapped = joint_segments(b, a, lo);
        CHECK(swapped.runs == s_lo.runs);
        CHECK(swapped.fallback_used == s_lo.fallback_used);
    }
}

TEST_CASE("every selected index re-checks against the criteria") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 100;
        std::vector<double> pa = testutil::random_series(rng, n, 0.0, 2.0);
        std::vector<double> pb = testutil::random_series(rng, n, 0.0, 2.0);
        MeterSeries a = series(pa, std::vector<double>(n, 1.0));
        MeterSeries b = series(pb, std::vector<double>(n, 1.0));
        SegmentParams p{1.0, 0.75, 15.0};  // min run 3
        SegmentSet s = joint_segments(a, b, p);
        if (s.fallback_used) continue;
        for (const auto& run : s.runs) {
            CHECK(run.length() >= p.min_run_length());
            for (std::size_t t = run.begin; t < run.end; ++t) {
                CHECK(pa[t] >= 0.0);
                CHECK(pa[t] <= p.c_threshold_kw);
                CHECK(pb[t] >= 0.0);
                CHECK(pb[t] <= p.c_threshold_kw);
            }
        }
    }
}
