#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "q3/detection.hpp"
#include "q3/error.hpp"
#include "q3/rng.hpp"
#include "q3/source.hpp"

using namespace q3;
using namespace q3::detection;

namespace {

TimeTagSeries poisson(double rate, double seconds, std::uint64_t seed, std::uint8_t ch = 0) {
    auto s = source::generate_stream(source::WeakCoherentCW{rate}, 0.0, seconds, seed);
    return ch == 0 ? s : s.relabelled(ch, static_cast<std::uint8_t>(ch + 1));
}

SpadParams ideal_spad(std::uint8_t ch = 0) { return {1.0, 0.0, 60.0, 0.0, ch}; }

Picoseconds min_gap(const TimeTagSeries& s) {
    Picoseconds g = ~Picoseconds{0};
    for (std::size_t i = 1; i < s.size(); ++i) g = std::min(g, s.times()[i] - s.times()[i - 1]);
    return g;
}

TimeTagSeries two_channel(const std::vector<Picoseconds>& a, const std::vector<Picoseconds>& b) {
    TimeTagSeries s(0, Origin::Detected, 2);
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            s.push_back(a[i++], 0);
        else
            s.push_back(b[j++], 1);
    }
    s.set_duration(s.empty() ? 0 : s.times().back());
    return s;
}

}  // namespace

TEST_SUITE("detection") {

TEST_CASE("filter survival and pump leak") {
    FilterParams f;
    CHECK(f.survival_probability() == doctest::Approx(0.794).epsilon(1e-3));
    CHECK(1e10 * f.leak_fraction() == doctest::Approx(1e4));
    const auto s = poisson(1e5, 1.0, 1);
    FilterParams clear{60.0, 0.0};
    CHECK(apply_filter(s, 0.0, clear, 2) == s);
    const auto leaked = apply_filter(TimeTagSeries(seconds_to_ps(1.0), Origin::Emitted, 1), 1e10, f, 3);
    CHECK(std::fabs(static_cast<double>(leaked.size()) - 1e4) < 5.0 * 100.0);
    const auto kept = apply_filter(s, 0.0, f, 4);
    const double expect = static_cast<double>(s.size()) * f.survival_probability();
    CHECK(std::fabs(static_cast<double>(kept.size()) - expect) < 5.0 * std::sqrt(expect * 0.21));
}

TEST_CASE("spad pipeline basics") {
    const auto s = poisson(1e4, 1.0, 5);
    SpadParams off{0.0, 0.0, 60.0, 500.0, 0};
    CHECK(spad_detect(s, off, s.duration(), 1).empty());
    SpadParams half{0.5, 0.0, 60.0, 500.0, 0};
    const auto d = spad_detect(s, half, s.duration(), 1);
    const double n = static_cast<double>(s.size());
    CHECK(std::fabs(static_cast<double>(d.size()) - 0.5 * n) < 5.0 * std::sqrt(0.25 * n));
    CHECK(d.is_sorted());
    CHECK(d == spad_detect(s, half, s.duration(), 1));
    TimeTagSeries unsorted(10, Origin::Emitted, 1);
    unsorted.push_back(5, 0);
    unsorted.push_back(3, 0);
    CHECK_THROWS_AS(spad_detect(unsorted, half, 10, 1), Error);
    SpadParams too_good{0.7};
    CHECK_THROWS_WITH(spad_detect(s, too_good, s.duration(), 1), "efficiency must lie in [0, 0.5]");
    CHECK_NOTHROW(spad_detect(s, too_good, s.duration(), 1, true));
}

TEST_CASE("jitter stays within five sigma and inside the run") {
    TimeTagSeries s(seconds_to_ps(1e-3), Origin::Emitted, 1);
    for (Picoseconds t = 0; t <= s.duration(); t += 100000) s.push_back(t, 0);
    SpadParams p{1.0, 0.0, 1.0, 500.0, 0};
    const auto d = spad_detect(s, p, s.duration(), 9, true);
    REQUIRE(d.size() == s.size());
    const double five_sigma = 5.0 * p.jitter_sigma_ps() + 1.0;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double dt = static_cast<double>(d.times()[i]) - static_cast<double>(s.times()[i]);
        REQUIRE(std::fabs(dt) <= five_sigma);
        REQUIRE(d.times()[i] <= s.duration());
        if (i > 0 && i + 1 < d.size()) {
            sum += dt;
            sum2 += dt * dt;
        }
    }
    const double m = static_cast<double>(d.size() - 2);
    CHECK(std::sqrt(sum2 / m) == doctest::Approx(p.jitter_sigma_ps()).epsilon(0.1));
}

TEST_CASE("dead-time gap is exact and the saturation curve holds") {
    for (double rate : {1e5, 1e6, 1e7, 1e8}) {
        const double secs = std::min(0.1, 2e6 / rate);
        const auto s = poisson(rate, secs, 7);
        const auto d = spad_detect(s, ideal_spad(), s.duration(), 3, true);
        CHECK(min_gap(d) >= 60000);
        const double out = static_cast<double>(d.size()) / secs;
        CAPTURE(rate);
        CHECK(out == doctest::Approx(nonparalyzable_output_rate(rate, 60.0)).epsilon(0.02));
    }
    CHECK(nonparalyzable_output_rate(1e12, 60.0) == doctest::Approx(1.0 / 60e-9).epsilon(1e-3));
}

TEST_CASE("restriction commutes with ideal detection up to one boundary event") {
    const auto s = poisson(2e7, 0.01, 11);
    const Picoseconds a = seconds_to_ps(0.003), b = seconds_to_ps(0.007);
    const auto full = spad_detect(s, ideal_spad(), s.duration(), 1, true).restrict(a, b);
    const auto part = spad_detect(s.restrict(a, b), ideal_spad(), s.duration(), 1, true);
    const auto diff = static_cast<long>(part.size()) - static_cast<long>(full.size());
    CHECK(std::labs(diff) <= 1);
}

TEST_CASE("detect_all wiring") {
    DetectorSystem sys;
    sys.test_mode = true;
    for (auto& sp : sys.spads) {
        sp.efficiency = 1.0;
        sp.dark_rate = 0.0;
        sp.jitter_fwhm_ps = 0.0;
    }
    const auto a = poisson(1e5, 0.5, 1);
    const TimeTagSeries empty(a.duration(), Origin::Emitted, 1);
    std::vector<TimeTagSeries> ports{empty, a, empty};
    const auto m = detect_all(ports, sys, 3);
    CHECK(m.count(1) == spad_detect(a, sys.spads[1], a.duration(), 3, true).size());
    CHECK(m.count(0) == 0);
    CHECK(m.count(2) == 0);
    std::vector<TimeTagSeries> none{empty, empty, empty};
    CHECK(detect_all(none, sys, 3).empty());
    std::vector<TimeTagSeries> two{a, poisson(1e5, 0.5, 2), empty};
    const auto t = detect_all(two, DetectorSystem{}, 4);
    const double c0 = static_cast<double>(t.count(0)), c1 = static_cast<double>(t.count(1));
    CHECK(std::fabs(c0 - c1) < 5.0 * std::sqrt(c0 + c1));
    std::vector<TimeTagSeries> four{empty, empty, empty, empty};
    try {
        (void)detect_all(four, sys, 1);
        FAIL("expected a configuration error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Configuration);
    }
}

TEST_CASE("coincidence histogram constructed cases") {
    std::vector<Picoseconds> a, b;
    for (Picoseconds k = 0; k < 1000; ++k) {
        a.push_back(1'000'000 * k + 100'000);
        b.push_back(1'000'000 * k + 105'000);
    }
    const auto h = coincidence_histogram(two_channel(a, b), 0, 1, 20.0, 1000);
    REQUIRE(h.counts.size() == 40);
    for (std::size_t k = 0; k < h.counts.size(); ++k) CHECK(h.counts[k] == (h.bin_start(k) == 5000 ? 1000u : 0u));
    const auto zero = coincidence_histogram(two_channel(a, {}), 0, 1, 20.0, 1000);
    CHECK(zero.total() == 0);
    CHECK_THROWS_AS(coincidence_histogram(two_channel(a, b), 0, 1, 20.0, 3000), Error);
    CHECK_THROWS_AS(coincidence_histogram(two_channel(a, b), 0, 1, 0.0, 1000), Error);
    // Window edges: -W is counted, +W is not.
    const auto e = coincidence_histogram(two_channel({50'000}, {30'000, 70'000}), 0, 1, 20.0, 1000);
    CHECK(e.counts.front() == 1);
    CHECK(e.total() == 1);
}

TEST_CASE("independent Poisson streams give flat bins") {
    const double r1 = 2e5, r2 = 3e5, secs = 2.0;
    const auto s = merge(poisson(r1, secs, 1), poisson(r2, secs, 2, 1));
    const auto h = coincidence_histogram(s, 0, 1, 50.0, 1000);
    const double expect = r1 * r2 * 1e-9 * secs;
    for (auto c : h.counts) CHECK(std::fabs(static_cast<double>(c) - expect) < 5.0 * std::sqrt(expect));
}

TEST_CASE("dark-only cross histogram is flat by chi-square") {
    DetectorSystem sys;
    for (auto& sp : sys.spads) {
        sp.efficiency = 0.0;
        sp.dark_rate = 1e5;
    }
    const TimeTagSeries empty(seconds_to_ps(10.0), Origin::Emitted, 1);
    std::vector<TimeTagSeries> ports{empty, empty, empty};
    const auto tags = detect_all(ports, sys, 8);
    const auto h = coincidence_histogram(tags, 0, 1, 100.0, 1000);
    const double mean = static_cast<double>(h.total()) / static_cast<double>(h.counts.size());
    double chi2 = 0.0;
    for (auto c : h.counts) chi2 += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean) / mean;
    CHECK(chi2 < 266.4);  // chi-square 0.999 quantile, 199 dof
}

TEST_CASE("histogram mirror symmetry") {
    // Odd times on a, even on b: no delay lands on an even bin edge.
    Rng r(5);
    std::vector<Picoseconds> a, b;
    Picoseconds ta = 1, tb = 0;
    for (int i = 0; i < 20000; ++i) {
        ta += 2 * (1 + r.next_u64() % 20000);
        tb += 2 * (1 + r.next_u64() % 20000);
        a.push_back(ta);
        b.push_back(tb);
    }
    const auto s = two_channel(a, b);
    const auto ab = coincidence_histogram(s, 0, 1, 30.0, 1000);
    const auto ba = coincidence_histogram(s, 1, 0, 30.0, 1000);
    REQUIRE(ab.counts.size() == ba.counts.size());
    const std::size_t n = ab.counts.size();
    for (std::size_t k = 0; k < n; ++k) REQUIRE(ab.counts[k] == ba.counts[n - 1 - k]);
}

TEST_CASE("mirror differences come only from delays on bin edges") {
    Rng r(6);
    std::vector<Picoseconds> a, b;
    Picoseconds ta = 0, tb = 0;
    for (int i = 0; i < 20000; ++i) {
        ta += 500 * (1 + r.next_u64() % 40);
        tb += 500 * (1 + r.next_u64() % 40);
        a.push_back(ta);
        b.push_back(tb);
    }
    const auto s = two_channel(a, b);
    const auto ab = coincidence_histogram(s, 0, 1, 10.0, 1000);
    const auto ba = coincidence_histogram(s, 1, 0, 10.0, 1000);
    // Count pairs with delay exactly on an interior edge k*bin, k != 0 excluded by neither side.
    std::int64_t mismatch = 0;
    const std::size_t n = ab.counts.size();
    for (std::size_t k = 0; k < n; ++k)
        mismatch += std::llabs(static_cast<std::int64_t>(ab.counts[k]) - static_cast<std::int64_t>(ba.counts[n - 1 - k]));
    std::int64_t edge_pairs = 0;
    std::size_t lo = 0;
    for (auto t : a) {
        while (lo < b.size() && b[lo] + 10000 < t) ++lo;
        for (std::size_t j = lo; j < b.size() && b[j] <= t + 10000; ++j) {
            const auto d = static_cast<std::int64_t>(b[j]) - static_cast<std::int64_t>(t);
            if (d % 1000 == 0) ++edge_pairs;
        }
    }
    CHECK(mismatch > 0);
    CHECK(mismatch <= 2 * edge_pairs);
}

TEST_CASE("self-correlation drops the zero-delay self pairs") {
    const auto s = poisson(1e5, 0.1, 3);
    const auto h = coincidence_histogram(s, 0, 0, 10.0, 1000);
    CHECK(h.counts[10] < 10u);
    CHECK(h.total() < s.size());
}

TEST_CASE("accumulate") {
    Histogram a{10, 5, {1, 2, 3, 4}}, b{10, 5, {1, 1, 1, 1}}, c{10, 10, {1, 1}};
    accumulate(a, b);
    CHECK(a.counts == std::vector<std::uint64_t>{2, 3, 4, 5});
    CHECK_THROWS_AS(accumulate(a, c), Error);
    Histogram empty;
    accumulate(empty, b);
    CHECK(empty.counts == b.counts);
}

}
