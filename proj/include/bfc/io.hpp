// io.hpp - CSV serialisation with round-trip-exact number formatting.
#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bfc/design.hpp"
#include "bfc/noise.hpp"

namespace bfc {

// Parse failure with the 1-based line it occurred on.
struct ParseError : std::runtime_error {
    ParseError(std::size_t line_number, const std::string& what_arg)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + what_arg), line(line_number) {}
    std::size_t line;
};

// Shortest decimal form that parses back to the identical double.
[[nodiscard]] inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ParseError(line, "bad number '" + std::string(field) + "'");
    return v;
}

inline std::int64_t parse_count(std::string_view field, std::size_t line) {
    std::int64_t v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ParseError(line, "bad count '" + std::string(field) + "'");
    return v;
}

// Splits one CSV line at commas; tolerates a trailing carriage return.
inline std::vector<std::string_view> split_fields(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

}  // namespace detail

// Columns: axis,expected[,counts]. The counts column appears only when the
// interferogram carries sampled data. Scan kind/arm and acquisition settings
// are not part of the CSV; they travel in the run metadata.
inline void write_interferogram_csv(std::ostream& os, const Interferogram& scan) {
    const bool with_counts = scan.has_counts();
    os << (with_counts ? "axis,expected,counts\n" : "axis,expected\n");
    for (std::size_t i = 0; i < scan.axis.size(); ++i) {
        os << format_double(scan.axis[i]) << ',' << format_double(scan.expected[i]);
        if (with_counts) os << ',' << scan.counts[i];
        os << '\n';
    }
}

[[nodiscard]] inline Interferogram read_interferogram_csv(std::istream& is) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line)) throw ParseError(1, "empty input");
    auto header = detail::split_fields(line);
    bool with_counts = false;
    if (header.size() == 3 && header[0] == "axis" && header[1] == "expected" && header[2] == "counts")
        with_counts = true;
    else if (!(header.size() == 2 && header[0] == "axis" && header[1] == "expected"))
        throw ParseError(1, "expected header 'axis,expected[,counts]'");

    Interferogram scan;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_fields(line);
        if (fields.size() != (with_counts ? 3u : 2u))
            throw ParseError(lineno, "expected " + std::to_string(with_counts ? 3 : 2) + " fields, got " +
                                         std::to_string(fields.size()));
        scan.axis.push_back(detail::parse_double(fields[0], lineno));
        scan.expected.push_back(detail::parse_double(fields[1], lineno));
        if (with_counts) scan.counts.push_back(detail::parse_count(fields[2], lineno));
    }
    if (scan.axis.empty()) throw ParseError(lineno, "no data rows");
    return scan;
}

// Columns: bin_center_ps,counts. Bin width is recovered from the centre
// spacing, so at least two bins are required.
inline void write_histogram_csv(std::ostream& os, const TimeTagHistogram& hist) {
    os << "bin_center_ps,counts\n";
    for (std::size_t i = 0; i < hist.bin_centers.size(); ++i)
        os << format_double(hist.bin_centers[i]) << ',' << hist.counts[i] << '\n';
}

[[nodiscard]] inline TimeTagHistogram read_histogram_csv(std::istream& is) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line)) throw ParseError(1, "empty input");
    {
        auto header = detail::split_fields(line);
        if (!(header.size() == 2 && header[0] == "bin_center_ps" && header[1] == "counts"))
            throw ParseError(1, "expected header 'bin_center_ps,counts'");
    }
    TimeTagHistogram hist;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_fields(line);
        if (fields.size() != 2)
            throw ParseError(lineno, "expected 2 fields, got " + std::to_string(fields.size()));
        hist.bin_centers.push_back(detail::parse_double(fields[0], lineno));
        hist.counts.push_back(detail::parse_count(fields[1], lineno));
    }
    if (hist.bin_centers.size() < 2) throw ParseError(lineno, "need at least two bins");
    hist.bin_width_ps = hist.bin_centers[1] - hist.bin_centers[0];
    if (!(hist.bin_width_ps > 0.0)) throw ParseError(2, "bin centres must increase");
    return hist;
}

// Long format, one row per grid cell: depth_signal_rad,depth_idler_rad,slope_per_ps.
inline void write_slope_map_csv(std::ostream& os, const SlopeMap& map) {
    os << "depth_signal_rad,depth_idler_rad,slope_per_ps\n";
    const std::size_t g = map.depths.size();
    for (std::size_t is = 0; is < g; ++is)
        for (std::size_t ii = 0; ii < g; ++ii)
            os << format_double(map.depths[is]) << ',' << format_double(map.depths[ii]) << ','
               << format_double(map.slopes[is * g + ii]) << '\n';
}

}  // namespace bfc
