#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace isofdr::io {

/// Shortest round-trippable text for a double (17 significant digits at most).
std::string format_double(double v);
double parse_double(const std::string& text);

/// Reads one numeric column from a CSV file with a header row. `column` is a
/// header name or a 1-based index. Errors name the offending line.
std::vector<double> read_numeric_column(const std::filesystem::path& path, const std::string& column);
std::vector<double> read_numeric_column(std::istream& in, const std::string& column);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::filesystem::path& path);

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::filesystem::path path_;
    std::string buffer_;
};

}  // namespace isofdr::io
