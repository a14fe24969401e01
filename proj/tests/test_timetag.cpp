#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "q3/error.hpp"
#include "q3/rng.hpp"
#include "q3/timetag.hpp"

using namespace q3;

namespace {

TimeTagSeries sample(std::size_t n, std::uint8_t channels, std::uint64_t seed) {
    Rng r(seed);
    TimeTagSeries s(0, Origin::Detected, channels);
    Picoseconds t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        t += 1 + (r.next_u64() % 100000);
        s.push_back(t, static_cast<std::uint8_t>(r.next_u64() % channels));
    }
    s.set_duration(t);
    return s;
}

void same_tags(const TimeTagSeries& a, const TimeTagSeries& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.times()[i] == b.times()[i]);
        CHECK(a.channels()[i] == b.channels()[i]);
    }
}

}  // namespace

TEST_SUITE("timetag") {

TEST_CASE("csv round trip") {
    const auto s = sample(500, 3, 1);
    std::stringstream buf;
    write_csv(buf, s);
    CHECK(buf.str().rfind("time_ps,channel\n", 0) == 0);
    const auto back = read_csv(buf);
    same_tags(s, back);
    CHECK(back.channel_count() <= 3);
}

TEST_CASE("binary round trip and header layout") {
    auto s = sample(1000, 3, 2);
    s.push_back(0xFFFF'FFFF'FFFFull, 2);  // exercises every byte of the little-endian field
    std::stringstream buf;
    write_binary(buf, s);
    const std::string bytes = buf.str();
    REQUIRE(bytes.size() == 6 + 9 * s.size());
    CHECK(bytes.substr(0, 4) == "Q3TT");
    CHECK(static_cast<unsigned>(bytes[4]) == kQ3ttVersion);
    CHECK(static_cast<unsigned>(bytes[5]) == 3u);
    // First record: time LSB first.
    const auto t0 = s.times()[0];
    CHECK(static_cast<unsigned char>(bytes[6]) == (t0 & 0xFF));
    const auto back = read_binary(buf);
    same_tags(s, back);
    CHECK(back.channel_count() == 3);
}

TEST_CASE("malformed inputs are data errors") {
    std::stringstream bad_magic("XXXX\x01\x01");
    CHECK_THROWS_AS(read_binary(bad_magic), Error);
    std::stringstream truncated(std::string("Q3TT\x01\x01", 6) + "abc");
    CHECK_THROWS_AS(read_binary(truncated), Error);
    std::stringstream no_header("1,0\n");
    CHECK_THROWS_AS(read_csv(no_header), Error);
    std::stringstream unsorted("time_ps,channel\n5,0\n3,0\n");
    try {
        (void)read_csv(unsorted);
        FAIL("expected a data error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
    }
}

TEST_CASE("save and load pick the format from the suffix") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto s = sample(200, 2, 3);
    for (const char* name : {"q3_tt_test.csv", "q3_tt_test.q3tt"}) {
        const auto p = (dir / name).string();
        save(p, s);
        same_tags(s, load(p));
        std::filesystem::remove(p);
    }
}

TEST_CASE("merge keeps order and restrict is half-open") {
    const auto a = sample(300, 1, 4);
    auto b = sample(300, 1, 5).relabelled(1, 2);
    const auto m = merge(a, b);
    CHECK(m.size() == 600);
    CHECK(m.is_sorted());
    CHECK(m.count(0) == 300);
    CHECK(m.count(1) == 300);
    CHECK(m.select(1).size() == 300);
    const auto mid = m.times()[100];
    const auto end = m.times()[200];
    const auto r = m.restrict(mid, end);
    CHECK(r.size() >= 100);
    for (auto t : r.times()) {
        CHECK(t >= mid);
        CHECK(t < end);
    }
}

TEST_CASE("seconds to picoseconds") {
    CHECK(seconds_to_ps(1.0) == 1'000'000'000'000ull);
    CHECK(seconds_to_ps(1e-12) == 1ull);
    CHECK(ps_to_seconds(2'000'000'000'000ull) == doctest::Approx(2.0));
}

}
