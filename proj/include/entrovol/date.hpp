#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace entrovol {

/// Calendar date, ordered and comparable. Stored as days since the civil epoch.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::year_month_day ymd) : days_(std::chrono::sys_days{ymd}) {}
    Date(int y, unsigned m, unsigned d)
        : Date(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                           std::chrono::day{d}}) {}

    /// Strict YYYY-MM-DD; nullopt for anything else, including 2021-02-30.
    static std::optional<Date> parse(std::string_view text);

    std::string iso() const;
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
    long days_since_epoch() const { return days_.time_since_epoch().count(); }

    Date operator+(int days) const {
        Date out;
        out.days_ = days_ + std::chrono::days{days};
        return out;
    }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace entrovol
