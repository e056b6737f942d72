#include "entrovol/ingest.hpp"

#include <charconv>
#include <cmath>

#include "entrovol/error.hpp"
#include "entrovol/io.hpp"

namespace entrovol::ingest {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

}  // namespace

FredTable parse_fred_csv(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw EmptyFile("no header line");

    FredTable table;
    const auto header = split_commas(lines.front());
    if (header.size() != 2) throw MalformedRow(1, "header must have 2 columns");
    table.series_id = std::string(header[1]);

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto fields = split_commas(lines[i]);
        if (fields.size() != 2) {
            throw MalformedRow(line_no, "expected 2 fields, got " + std::to_string(fields.size()));
        }
        const auto date = Date::parse(fields[0]);
        if (!date) throw MalformedRow(line_no, "bad date '" + std::string(fields[0]) + "'");

        RawObservation obs{*date, std::nullopt};
        const auto v = fields[1];
        if (!v.empty() && v != ".") {
            double parsed = 0.0;
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
            if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(parsed)) {
                throw MalformedRow(line_no, "bad value '" + std::string(v) + "'");
            }
            obs.value = parsed;
        }
        table.rows.push_back(obs);
    }
    if (table.rows.empty()) throw EmptyFile("no data rows");
    return table;
}

CleanedSeries clean_series(std::span<const RawObservation> raw, std::string source_id) {
    if (raw.empty()) throw TooShort("no observations to clean");
    CleanedSeries out;
    out.series.source_id = std::move(source_id);
    out.report.input_rows = raw.size();
    auto& kept = out.series.observations;
    for (const auto& obs : raw) {
        if (!obs.value) {
            ++out.report.dropped_missing;
            continue;
        }
        // log returns are undefined at p <= 0 (WTI settled at -37.63 on 2020-04-20)
        if (!(*obs.value > 0.0)) {
            ++out.report.dropped_nonpositive;
            out.report.nonpositive_dates.push_back(obs.date);
            continue;
        }
        if (!kept.empty() && !(kept.back().date < obs.date)) {
            throw NonMonotonicDates(obs.date.iso() + " does not follow " + kept.back().date.iso());
        }
        kept.push_back({obs.date, *obs.value});
    }
    out.report.kept = kept.size();
    if (kept.size() < 2) {
        throw TooShort("only " + std::to_string(kept.size()) + " usable prices after cleaning");
    }
    return out;
}

std::string render_series_csv(std::span<const DatedValue> series) {
    std::string out = "date,value\n";
    out.reserve(out.size() + series.size() * 28);
    for (const auto& p : series) {
        out += p.date.iso();
        out += ',';
        out += io::format_value(p.value);
        out += '\n';
    }
    return out;
}

void write_series_csv(std::span<const DatedValue> series, const std::filesystem::path& destination) {
    io::write_text_atomic(destination, render_series_csv(series));
}

DatedSeries read_series_csv(const std::filesystem::path& source) {
    const auto table = parse_fred_csv(io::read_text_file(source));
    DatedSeries out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (!row.value) throw MalformedRow(i + 2, "missing value in " + source.string());
        out.push_back({row.date, *row.value});
    }
    return out;
}

}  // namespace entrovol::ingest
