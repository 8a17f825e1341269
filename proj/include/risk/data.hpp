#pragma once

#include "risk/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdio>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace risk {

/// Calendar date, compared as an opaque ordinal. No business-day logic.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

    /// Parses strict ISO-8601 `YYYY-MM-DD`.
    static Date parse(std::string_view text) {
        auto fail = [&] { return DataError("unparseable date '" + std::string(text) + "'"); };
        if (text.size() != 10 || text[4] != '-' || text[7] != '-')
            throw fail();
        auto field = [&](std::size_t pos, std::size_t len) {
            int v = 0;
            auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
            if (ec != std::errc{} || ptr != text.data() + pos + len)
                throw fail();
            return v;
        };
        Date d{field(0, 4), field(5, 2), field(8, 2)};
        static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > kDays[d.month - 1])
            throw fail();
        const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
        if (d.month == 2 && d.day == 29 && !leap)
            throw fail();
        return d;
    }

    [[nodiscard]] std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
        return buf;
    }
};

enum class ValueKind { price, returns };

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Dated univariate observations. Holds returns, or prices awaiting conversion.
class ReturnSeries {
public:
    ReturnSeries() = default;

    ReturnSeries(std::vector<Date> dates, std::vector<double> values, std::string label = {},
                 ValueKind kind = ValueKind::returns)
        : dates_(std::move(dates)), values_(std::move(values)), label_(std::move(label)), kind_(kind) {
        if (dates_.size() != values_.size())
            throw AlignmentError("dates and values differ in length");
        for (std::size_t i = 1; i < dates_.size(); ++i)
            if (!(dates_[i - 1] < dates_[i]))
                throw DataError("dates not strictly increasing at " + dates_[i].iso());
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw DataError("non-finite value on " + dates_[i].iso());
    }

    /// Undated convenience constructor; assigns consecutive ordinal dates from 2000-01-01.
    static ReturnSeries from_values(std::vector<double> values, std::string label = {}) {
        std::vector<Date> dates;
        dates.reserve(values.size());
        int y = 2000, m = 1, d = 1;
        for (std::size_t i = 0; i < values.size(); ++i) {
            dates.push_back({y, m, d});
            if (++d > 28) {
                d = 1;
                if (++m > 12) {
                    m = 1;
                    ++y;
                }
            }
        }
        return {std::move(dates), std::move(values), std::move(label)};
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
    [[nodiscard]] std::span<const Date> dates() const noexcept { return dates_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    [[nodiscard]] ValueKind kind() const noexcept { return kind_; }

private:
    std::vector<Date> dates_;
    std::vector<double> values_;
    std::string label_;
    ValueKind kind_ = ValueKind::returns;
};

/// N return series sharing one date index.
struct MultiSeries {
    std::vector<Date> dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    [[nodiscard]] std::size_t rows() const noexcept { return dates.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return columns.size(); }

    void validate() const {
        if (names.size() != columns.size())
            throw AlignmentError("column names and columns differ in count");
        for (const auto& c : columns)
            if (c.size() != dates.size())
                throw AlignmentError("column length differs from date index");
        for (std::size_t i = 1; i < dates.size(); ++i)
            if (!(dates[i - 1] < dates[i]))
                throw DataError("dates not strictly increasing at " + dates[i].iso());
    }
};

struct CsvSchema {
    std::string date_column = "date";
    std::string value_column = "return";
    ValueKind kind = ValueKind::returns;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline double parse_number(std::string_view text, std::size_t row) {
    double v = 0.0;
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v))
        throw DataError("unparseable number '" + std::string(text) + "' at row " + std::to_string(row));
    return v;
}

inline std::size_t column_index(const std::vector<std::string_view>& header, std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw SchemaError("missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
}

struct RawTable {
    std::vector<std::string> lines; // owns storage for the views below
    std::vector<std::string_view> header;
    std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows; // (1-based data row, fields)
};

inline RawTable read_table(std::istream& in) {
    RawTable t;
    std::string line;
    while (std::getline(in, line))
        t.lines.push_back(std::move(line));
    // skip leading blank lines; strip UTF-8 BOM
    std::size_t i = 0;
    while (i < t.lines.size() && trim(t.lines[i]).empty())
        ++i;
    if (i == t.lines.size())
        throw SchemaError("missing header row");
    if (t.lines[i].starts_with("\xEF\xBB\xBF"))
        t.lines[i].erase(0, 3);
    t.header = split(t.lines[i]);
    std::size_t row = 0;
    for (++i; i < t.lines.size(); ++i) {
        if (trim(t.lines[i]).empty())
            continue;
        ++row;
        auto fields = split(t.lines[i]);
        if (fields.size() != t.header.size())
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(t.header.size()));
        t.rows.emplace_back(row, std::move(fields));
    }
    if (t.rows.empty())
        throw DataError("no observations");
    return t;
}

template <class Payload>
void sort_by_date(std::vector<Date>& dates, std::vector<Payload>& payload) {
    std::vector<std::size_t> order(dates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dates[a] < dates[b]; });
    std::vector<Date> d;
    std::vector<Payload> p;
    d.reserve(order.size());
    p.reserve(order.size());
    for (auto i : order) {
        d.push_back(dates[i]);
        p.push_back(std::move(payload[i]));
    }
    for (std::size_t i = 1; i < d.size(); ++i)
        if (d[i] == d[i - 1])
            throw DataError("duplicate date " + d[i].iso());
    dates = std::move(d);
    payload = std::move(p);
}

} // namespace detail

/// Reads a dated single-value CSV. Rows may appear in any order; output is date-sorted.
inline ReturnSeries read_csv(std::istream& in, const CsvSchema& schema, std::string label = {}) {
    auto table = detail::read_table(in);
    const auto di = detail::column_index(table.header, schema.date_column);
    const auto vi = detail::column_index(table.header, schema.value_column);
    std::vector<Date> dates;
    std::vector<double> values;
    for (const auto& [row, fields] : table.rows) {
        try {
            dates.push_back(Date::parse(fields[di]));
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at row " + std::to_string(row));
        }
        values.push_back(detail::parse_number(fields[vi], row));
    }
    detail::sort_by_date(dates, values);
    if (label.empty())
        label = schema.value_column;
    return {std::move(dates), std::move(values), std::move(label), schema.kind};
}

inline ReturnSeries load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    return read_csv(in, schema);
}

/// Writes `date,<value_column>` rows at full round-trip precision.
inline void write_csv(std::ostream& out, const ReturnSeries& s, std::string_view value_column = "return") {
    out << "date," << value_column << '\n';
    for (std::size_t i = 0; i < s.size(); ++i)
        out << s.dates()[i].iso() << ',' << format_double(s[i]) << '\n';
}

/// Reads `date,<name1>,<name2>,...`; every non-date column becomes a series.
inline MultiSeries read_multi_csv(std::istream& in, std::string_view date_column = "date") {
    auto table = detail::read_table(in);
    const auto di = detail::column_index(table.header, date_column);
    MultiSeries ms;
    std::vector<std::size_t> value_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (c != di) {
            value_cols.push_back(c);
            ms.names.emplace_back(table.header[c]);
        }
    std::vector<std::vector<double>> rows;
    for (const auto& [row, fields] : table.rows) {
        try {
            ms.dates.push_back(Date::parse(fields[di]));
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at row " + std::to_string(row));
        }
        std::vector<double> r;
        for (auto c : value_cols)
            r.push_back(detail::parse_number(fields[c], row));
        rows.push_back(std::move(r));
    }
    detail::sort_by_date(ms.dates, rows);
    ms.columns.assign(value_cols.size(), std::vector<double>(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t c = 0; c < value_cols.size(); ++c)
            ms.columns[c][t] = rows[t][c];
    ms.validate();
    return ms;
}

inline MultiSeries load_multi_csv(const std::string& path, std::string_view date_column = "date") {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path + "'");
    return read_multi_csv(in, date_column);
}

inline void write_multi_csv(std::ostream& out, const MultiSeries& ms) {
    out << "date";
    for (const auto& n : ms.names)
        out << ',' << n;
    out << '\n';
    for (std::size_t t = 0; t < ms.rows(); ++t) {
        out << ms.dates[t].iso();
        for (const auto& c : ms.columns)
            out << ',' << format_double(c[t]);
        out << '\n';
    }
}

/// Log returns ln(p[i+1]/p[i]), dated at the later observation of each pair.
inline ReturnSeries to_log_returns(const ReturnSeries& prices) {
    if (prices.kind() != ValueKind::price)
        throw DataError("series '" + prices.label() + "' does not hold prices");
    if (prices.size() < 2)
        throw DataError("need at least two prices");
    for (std::size_t i = 0; i < prices.size(); ++i)
        if (!(prices[i] > 0.0))
            throw DataError("nonpositive price on " + prices.dates()[i].iso());
    std::vector<Date> dates(prices.dates().begin() + 1, prices.dates().end());
    std::vector<double> r(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i)
        r[i] = std::log(prices[i + 1] / prices[i]);
    return {std::move(dates), std::move(r), prices.label(), ValueKind::returns};
}

/// The m observations strictly before index t: [t-m, t).
inline std::span<const double> window(std::span<const double> values, std::size_t t, std::size_t m) {
    if (m == 0 || t < m)
        throw WindowError("window of " + std::to_string(m) + " needs t >= m, got t=" + std::to_string(t));
    if (t > values.size())
        throw WindowError("t=" + std::to_string(t) + " beyond series length " + std::to_string(values.size()));
    return values.subspan(t - m, m);
}

inline std::span<const double> window(const ReturnSeries& s, std::size_t t, std::size_t m) {
    return window(s.values(), t, m);
}

} // namespace risk
