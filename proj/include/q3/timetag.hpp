#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace q3 {

/// Integer picoseconds. 2^64 ps is about 5.8e5 years, far beyond any run.
using Picoseconds = std::uint64_t;

constexpr double kPsPerSecond = 1e12;

inline Picoseconds seconds_to_ps(double s) {
    return static_cast<Picoseconds>(s * kPsPerSecond + 0.5);
}
inline double ps_to_seconds(Picoseconds ps) { return static_cast<double>(ps) / kPsPerSecond; }

enum class Origin : std::uint8_t { Emitted, Detected };

/// Sorted stream of (time, channel) events, stored column-wise.
///
/// Invariants: times are non-decreasing, every time lies in [0, duration],
/// and every channel is below `channel_count`.
class TimeTagSeries {
public:
    TimeTagSeries() = default;
    TimeTagSeries(Picoseconds duration, Origin origin, std::uint8_t channel_count = 1)
        : duration_(duration), origin_(origin), channel_count_(channel_count) {}

    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }

    std::span<const Picoseconds> times() const noexcept { return times_; }
    std::span<const std::uint8_t> channels() const noexcept { return channels_; }

    Picoseconds duration() const noexcept { return duration_; }
    Origin origin() const noexcept { return origin_; }
    std::uint8_t channel_count() const noexcept { return channel_count_; }

    void set_duration(Picoseconds d) noexcept { duration_ = d; }
    void set_origin(Origin o) noexcept { origin_ = o; }
    void set_channel_count(std::uint8_t n) noexcept { channel_count_ = n; }

    void reserve(std::size_t n) {
        times_.reserve(n);
        channels_.reserve(n);
    }
    /// Appends without checking order; call `validate` or `is_sorted` when
    /// the source is not trusted.
    void push_back(Picoseconds t, std::uint8_t channel) {
        times_.push_back(t);
        channels_.push_back(channel);
    }
    void truncate(std::size_t n) {
        times_.resize(n);
        channels_.resize(n);
    }
    void clear() noexcept {
        times_.clear();
        channels_.clear();
    }

    std::vector<Picoseconds>& mutable_times() noexcept { return times_; }
    std::vector<std::uint8_t>& mutable_channels() noexcept { return channels_; }

    bool is_sorted() const noexcept;
    std::size_t count(std::uint8_t channel) const noexcept;

    /// Throws a data error describing the first violated invariant.
    void validate() const;

    /// Same tags relabelled to a single channel.
    TimeTagSeries relabelled(std::uint8_t channel, std::uint8_t channel_count) const;

    /// Tags of one channel only, keeping labels.
    TimeTagSeries select(std::uint8_t channel) const;

    /// Tags with t in [begin, end); times are kept absolute.
    TimeTagSeries restrict(Picoseconds begin, Picoseconds end) const;

    /// Sorts by time; ties keep insertion order.
    void sort();

    friend bool operator==(const TimeTagSeries&, const TimeTagSeries&) = default;

private:
    std::vector<Picoseconds> times_;
    std::vector<std::uint8_t> channels_;
    Picoseconds duration_ = 0;
    Origin origin_ = Origin::Emitted;
    std::uint8_t channel_count_ = 1;
};

/// Merges two sorted series. Ties take `a` first.
TimeTagSeries merge(const TimeTagSeries& a, const TimeTagSeries& b);

// CSV: header `time_ps,channel`, one tag per line.
void write_csv(std::ostream& out, const TimeTagSeries& s);
TimeTagSeries read_csv(std::istream& in);

// Binary `Q3TT`: magic, version u8, channel-count u8, then repeated
// little-endian u64 time_ps followed by u8 channel.
inline constexpr std::uint8_t kQ3ttVersion = 1;
void write_binary(std::ostream& out, const TimeTagSeries& s);
TimeTagSeries read_binary(std::istream& in);

void save(const std::string& path, const TimeTagSeries& s);
TimeTagSeries load(const std::string& path);

}  // namespace q3
