#ifndef ASYNCBO_CSV_HPP
#define ASYNCBO_CSV_HPP

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <asyncbo/aggregate.hpp>

namespace asyncbo {

/// Thrown for any file-system failure; carries the offending path.
class IoError : public std::runtime_error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : std::runtime_error(path.string() + ": " + what), path_(path)
    {
    }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

inline constexpr std::string_view kCsvHeader
    = "policy,buffer_length,dimension,noise_std,experiment,effective_time,median_loss,q25,q75";

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

inline int parse_int(std::string_view s)
{
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

/// Long-format CSV text: one row per cell and experiment, sorted by
/// (policy, buffer_length, dimension, noise_std, experiment).
inline std::string to_csv(std::vector<AggregateCurves> curves)
{
    if (curves.empty())
        throw std::invalid_argument("write_csv: no curves to write");
    std::stable_sort(curves.begin(), curves.end(),
                     [](const AggregateCurves& a, const AggregateCurves& b) { return a.key < b.key; });
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& c : curves) {
        const std::string prefix = std::string(to_string(c.key.policy)) + "," + std::to_string(c.key.buffer_length) + ","
                                   + std::to_string(c.key.dimension) + "," + format_double(c.key.noise_std) + ",";
        for (std::size_t k = 0; k < c.size(); ++k) {
            out += prefix;
            out += std::to_string(k + 1);
            for (double v : {c.effective_time[k], c.median_loss[k], c.q25[k], c.q75[k]}) {
                out += ',';
                out += format_double(v);
            }
            out += '\n';
        }
    }
    return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError(path, "cannot open for writing");
    f << text;
    f.flush();
    if (!f)
        throw IoError(path, "write failed");
}

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError(path, "cannot open for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_csv(const std::vector<AggregateCurves>& curves, const std::filesystem::path& path)
{
    write_text_file(path, to_csv(curves));
}

/// Parses text produced by to_csv(). Rows of a cell must be contiguous and
/// numbered 1..budget.
inline std::vector<AggregateCurves> parse_csv(std::string_view text)
{
    std::vector<AggregateCurves> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size())
            return false;
        const std::size_t end = text.find('\n', pos);
        line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() : end + 1;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        ++line_no;
        return true;
    };

    std::string_view line;
    if (!next_line(line) || line != kCsvHeader)
        throw std::invalid_argument("CSV header mismatch");
    while (next_line(line)) {
        if (line.empty())
            continue;
        std::vector<std::string_view> f;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
        if (f.size() != 9)
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": expected 9 fields");
        const auto policy = parse_policy(f[0]);
        if (!policy)
            throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": unknown policy");
        const CellKey key{*policy, parse_int(f[1]), parse_int(f[2]), parse_double(f[3])};
        const int k = parse_int(f[4]);
        if (out.empty() || !(out.back().key == key) || static_cast<int>(out.back().size()) + 1 != k) {
            if (k != 1)
                throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": experiment index out of sequence");
            out.push_back({});
            out.back().key = key;
        }
        auto& c = out.back();
        c.effective_time.push_back(parse_double(f[5]));
        c.median_loss.push_back(parse_double(f[6]));
        c.q25.push_back(parse_double(f[7]));
        c.q75.push_back(parse_double(f[8]));
    }
    return out;
}

inline std::vector<AggregateCurves> read_csv(const std::filesystem::path& path)
{
    try {
        return parse_csv(read_text_file(path));
    } catch (const std::invalid_argument& e) {
        throw IoError(path, e.what());
    }
}

} // namespace asyncbo

#endif
