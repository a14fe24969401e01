#include "q3/timetag.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "q3/error.hpp"

namespace q3 {

bool TimeTagSeries::is_sorted() const noexcept {
    return std::is_sorted(times_.begin(), times_.end());
}

std::size_t TimeTagSeries::count(std::uint8_t channel) const noexcept {
    return static_cast<std::size_t>(std::count(channels_.begin(), channels_.end(), channel));
}

void TimeTagSeries::validate() const {
    if (times_.size() != channels_.size())
        fail(ErrorKind::Data, "time-tag columns have different lengths");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (i > 0 && times_[i] < times_[i - 1])
            fail(ErrorKind::Data, "time tags not sorted at index " + std::to_string(i));
        if (times_[i] > duration_)
            fail(ErrorKind::Data, "time tag " + std::to_string(times_[i]) +
                                      " ps exceeds series duration " + std::to_string(duration_));
        if (channels_[i] >= channel_count_)
            fail(ErrorKind::Data, "channel " + std::to_string(channels_[i]) +
                                      " outside declared channel count " +
                                      std::to_string(channel_count_));
    }
}

TimeTagSeries TimeTagSeries::relabelled(std::uint8_t channel, std::uint8_t channel_count) const {
    TimeTagSeries out = *this;
    std::fill(out.channels_.begin(), out.channels_.end(), channel);
    out.channel_count_ = channel_count;
    return out;
}

TimeTagSeries TimeTagSeries::select(std::uint8_t channel) const {
    TimeTagSeries out(duration_, origin_, channel_count_);
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (channels_[i] == channel) out.push_back(times_[i], channel);
    return out;
}

TimeTagSeries TimeTagSeries::restrict(Picoseconds begin, Picoseconds end) const {
    TimeTagSeries out(duration_, origin_, channel_count_);
    auto lo = std::lower_bound(times_.begin(), times_.end(), begin);
    auto hi = std::lower_bound(lo, times_.end(), end);
    const auto first = static_cast<std::size_t>(lo - times_.begin());
    const auto last = static_cast<std::size_t>(hi - times_.begin());
    out.times_.assign(times_.begin() + first, times_.begin() + last);
    out.channels_.assign(channels_.begin() + first, channels_.begin() + last);
    return out;
}

void TimeTagSeries::sort() {
    if (is_sorted()) return;
    std::vector<std::size_t> idx(times_.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return times_[a] < times_[b]; });
    std::vector<Picoseconds> t(times_.size());
    std::vector<std::uint8_t> c(channels_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        t[i] = times_[idx[i]];
        c[i] = channels_[idx[i]];
    }
    times_ = std::move(t);
    channels_ = std::move(c);
}

TimeTagSeries merge(const TimeTagSeries& a, const TimeTagSeries& b) {
    TimeTagSeries out(std::max(a.duration(), b.duration()), a.origin(),
                      std::max(a.channel_count(), b.channel_count()));
    out.reserve(a.size() + b.size());
    auto ta = a.times(), tb = b.times();
    auto ca = a.channels(), cb = b.channels();
    std::size_t i = 0, j = 0;
    while (i < ta.size() && j < tb.size()) {
        if (tb[j] < ta[i]) {
            out.push_back(tb[j], cb[j]);
            ++j;
        } else {
            out.push_back(ta[i], ca[i]);
            ++i;
        }
    }
    for (; i < ta.size(); ++i) out.push_back(ta[i], ca[i]);
    for (; j < tb.size(); ++j) out.push_back(tb[j], cb[j]);
    return out;
}

void write_csv(std::ostream& out, const TimeTagSeries& s) {
    out << "time_ps,channel\n";
    auto t = s.times();
    auto c = s.channels();
    for (std::size_t i = 0; i < t.size(); ++i) out << t[i] << ',' << unsigned{c[i]} << '\n';
}

TimeTagSeries read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_ps,channel", 0) != 0)
        fail(ErrorKind::Data, "time-tag CSV must start with header 'time_ps,channel'");
    TimeTagSeries s(0, Origin::Detected, 1);
    unsigned max_channel = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::istringstream ls(line);
        unsigned long long t = 0;
        unsigned ch = 0;
        char comma = 0;
        if (!(ls >> t >> comma >> ch) || comma != ',' || ch > 255)
            fail(ErrorKind::Data, "malformed time-tag CSV at line " + std::to_string(lineno));
        s.push_back(t, static_cast<std::uint8_t>(ch));
        max_channel = std::max(max_channel, ch);
    }
    s.set_channel_count(static_cast<std::uint8_t>(std::min(255u, max_channel + 1)));
    if (!s.empty()) s.set_duration(s.times().back());
    s.validate();
    return s;
}

void write_binary(std::ostream& out, const TimeTagSeries& s) {
    out.write("Q3TT", 4);
    const char header[2] = {static_cast<char>(kQ3ttVersion), static_cast<char>(s.channel_count())};
    out.write(header, 2);
    auto t = s.times();
    auto c = s.channels();
    std::array<char, 9> rec{};
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t v = t[i];
        for (int b = 0; b < 8; ++b) rec[b] = static_cast<char>((v >> (8 * b)) & 0xFF);
        rec[8] = static_cast<char>(c[i]);
        out.write(rec.data(), rec.size());
    }
}

TimeTagSeries read_binary(std::istream& in) {
    char header[6];
    if (!in.read(header, 6) || std::string(header, 4) != "Q3TT")
        fail(ErrorKind::Data, "missing Q3TT magic");
    const auto version = static_cast<std::uint8_t>(header[4]);
    if (version != kQ3ttVersion)
        fail(ErrorKind::Data, "unsupported Q3TT version " + std::to_string(version));
    TimeTagSeries s(0, Origin::Detected, static_cast<std::uint8_t>(header[5]));
    std::array<unsigned char, 9> rec{};
    while (in.read(reinterpret_cast<char*>(rec.data()), rec.size())) {
        std::uint64_t v = 0;
        for (int b = 7; b >= 0; --b) v = (v << 8) | rec[b];
        s.push_back(v, rec[8]);
    }
    if (in.gcount() != 0) fail(ErrorKind::Data, "truncated Q3TT record");
    if (!s.empty()) s.set_duration(s.times().back());
    s.validate();
    return s;
}

namespace {
bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

void save(const std::string& path, const TimeTagSeries& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
    if (ends_with(path, ".csv"))
        write_csv(out, s);
    else
        write_binary(out, s);
    if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

TimeTagSeries load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
    return ends_with(path, ".csv") ? read_csv(in) : read_binary(in);
}

}  // namespace q3
