#include "q3/report.hpp"

#include <fstream>
#include <system_error>

#include "q3/error.hpp"

namespace q3 {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string escape(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

ReportFormat parse_format(const std::string& name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    throw ValidationError("format: expected json or csv, got '" + name + "'");
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) fail(ErrorKind::Io, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::Io, "cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string to_csv(const CsvTable& t) {
    std::string s;
    for (std::size_t i = 0; i < t.header.size(); ++i) s += (i ? "," : "") + escape(t.header[i]);
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + escape(row[i]);
        s += '\n';
    }
    return s;
}

std::vector<fs::path> emit_report(const Report& report, const fs::path& dir, ReportFormat format) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    std::vector<fs::path> written;
    auto put = [&](const fs::path& p, const std::string& content) {
        write_atomic(p, content);
        written.push_back(p);
    };
    const json doc = report.to_json();
    if (format == ReportFormat::Json) {
        put(dir / "report.json", doc.dump(2) + "\n");
        for (const auto& t : report.tables)
            if (t.name.rfind("passes_", 0) == 0) put(dir / (t.name + ".csv"), to_csv(t));
        return written;
    }
    for (const auto& t : report.tables) put(dir / (t.name + ".csv"), to_csv(t));
    CsvTable summary{"summary", {"key", "value"}, {}};
    const json flat = doc.flatten();
    for (auto it = flat.begin(); it != flat.end(); ++it) {
        if (it.key().rfind("/scenario", 0) == 0) continue;
        // Per-bin arrays and traces live in their own tables.
        const auto& k = it.key();
        if (k.find("/g2_values/") != std::string::npos || k.find("/stderr/") != std::string::npos ||
            k.find("/tau_bins_ps/") != std::string::npos || k.find("/scan_trace/") != std::string::npos ||
            k.find("/passes/") != std::string::npos)
            continue;
        summary.rows.push_back({k, scalar(*it)});
    }
    put(dir / "summary.csv", to_csv(summary));
    put(dir / "scenario.json", doc.at("scenario").dump(2) + "\n");
    return written;
}

}  // namespace q3
