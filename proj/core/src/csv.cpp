#include "isofdr/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "isofdr/error.hpp"

namespace isofdr::io {

namespace {

std::string trim_cell(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(trim_cell(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& text) {
    const std::string t = trim_cell(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw InputError("not a number: '" + text + "'");
    }
    return v;
}

std::vector<double> read_numeric_column(std::istream& in, const std::string& column) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("CSV input is empty (header row required)");
    const auto header = split(line);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == column) col = i;
    }
    if (col == header.size()) {
        std::size_t idx = 0;
        const auto [ptr, ec] = std::from_chars(column.data(), column.data() + column.size(), idx);
        if (ec == std::errc() && ptr == column.data() + column.size() && idx >= 1 && idx <= header.size()) {
            col = idx - 1;
        } else {
            throw InputError("CSV column '" + column + "' not found");
        }
    }
    std::vector<double> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_cell(line).empty()) continue;
        const auto cells = split(line);
        if (col >= cells.size()) {
            throw InputError("CSV line " + std::to_string(lineno) + ": missing column '" + column + "'");
        }
        try {
            const double v = parse_double(cells[col]);
            if (!std::isfinite(v)) throw InputError("non-finite");
            out.push_back(v);
        } catch (const InputError&) {
            throw InputError("CSV line " + std::to_string(lineno) + ": unparseable value '" + cells[col] + "'");
        }
    }
    return out;
}

std::vector<double> read_numeric_column(const std::filesystem::path& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    return read_numeric_column(in, column);
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw InputError("CSV input is empty");
    t.header = split(line);
    while (std::getline(in, line)) {
        if (trim_cell(line).empty()) continue;
        t.rows.push_back(split(line));
    }
    return t;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += cells[i];
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path_.string());
    out << buffer_;
    if (!out) throw Error("failed writing " + path_.string());
}

}  // namespace isofdr::io
