#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entrovol/date.hpp"

namespace entrovol {

struct DatedValue {
    Date date;
    double value = 0.0;

    bool operator==(const DatedValue&) const = default;
};

using DatedSeries = std::vector<DatedValue>;

namespace ingest {

/// One FRED data row. `value` is empty for the "." missing-marker.
struct RawObservation {
    Date date;
    std::optional<double> value;
};

struct FredTable {
    std::string series_id;  // second header column, e.g. "DCOILWTICO"
    std::vector<RawObservation> rows;
};

/// Cleaned daily prices. Dates strictly increasing, prices finite and > 0, size >= 2.
struct PriceSeries {
    DatedSeries observations;
    std::string source_id;

    std::size_t size() const { return observations.size(); }
};

struct CleaningReport {
    std::size_t input_rows = 0;
    std::size_t kept = 0;
    std::size_t dropped_missing = 0;
    std::size_t dropped_nonpositive = 0;
    std::vector<Date> nonpositive_dates;

    std::size_t dropped() const { return dropped_missing + dropped_nonpositive; }
};

struct CleanedSeries {
    PriceSeries series;
    CleaningReport report;
};

/// Parses "DATE,<ID>" followed by "YYYY-MM-DD,<value>" rows. "." or an empty
/// value is missing. Throws MalformedRow (1-based line) or EmptyFile.
FredTable parse_fred_csv(std::string_view text);

/// Drops missing and non-positive rows. Throws NonMonotonicDates, TooShort.
CleanedSeries clean_series(std::span<const RawObservation> raw, std::string source_id = {});

/// "date,value" CSV, one row per point, see io::format_value.
void write_series_csv(std::span<const DatedValue> series, const std::filesystem::path& destination);
std::string render_series_csv(std::span<const DatedValue> series);

/// Reads a two-column CSV (FRED or canonical). Missing values are an error.
DatedSeries read_series_csv(const std::filesystem::path& source);

}  // namespace ingest
}  // namespace entrovol
