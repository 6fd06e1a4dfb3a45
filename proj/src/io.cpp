#include "aggpi/io.hpp"

#include "aggpi/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace aggpi::io {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& msg)
{
    throw Error(ErrorCode::IoError, path.string() + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

std::string format_double(double value)
{
    if (std::isnan(value)) return "NA";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

double parse_double(const std::string& token)
{
    const std::string t = trim(token);
    if (t == "NA" || t == "nan" || t == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (t == "inf" || t == "Inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf" || t == "-Inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw Error(ErrorCode::IoError, "not a number: '" + t + "'");
    return v;
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    CsvTable table;
    bool has_index = false;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (!have_header) {
            have_header = true;
            has_index = !fields.empty() && fields.front() == "t";
            table.header.assign(fields.begin() + (has_index ? 1 : 0), fields.end());
            continue;
        }
        const std::size_t expected = table.header.size() + (has_index ? 1 : 0);
        if (fields.size() != expected)
            fail(path, line_no, "expected " + std::to_string(expected) + " fields, found " + std::to_string(fields.size()));
        if (has_index) table.index.push_back(fields.front());
        std::vector<double> row;
        row.reserve(table.header.size());
        for (std::size_t j = has_index ? 1 : 0; j < fields.size(); ++j) {
            try {
                row.push_back(parse_double(fields[j]));
            } catch (const Error& e) {
                fail(path, line_no, e.what());
            }
        }
        rows.push_back(std::move(row));
    }
    if (!have_header || (table.header.empty() && !has_index)) throw Error(ErrorCode::IoError, path.string() + ": missing header row");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
    const bool has_index = !table.index.empty();
    if (has_index && table.index.size() != static_cast<std::size_t>(table.values.rows()))
        throw Error(ErrorCode::DimensionMismatch, "index length does not match row count");
    std::string text;
    std::string header = has_index ? "t" : "";
    for (const auto& name : table.header) {
        if (!header.empty()) header += ',';
        header += name;
    }
    text += header + '\n';
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        std::string row = has_index ? table.index[static_cast<std::size_t>(i)] : "";
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            if (has_index || j > 0) row += ',';
            row += format_double(table.values(i, j));
        }
        text += row + '\n';
    }
    write_text(path, text);
}

std::vector<double> read_series(const std::filesystem::path& path)
{
    const CsvTable table = read_csv(path);
    if (table.values.cols() != 1)
        throw Error(ErrorCode::IoError, path.string() + ": a series file needs exactly one value column");
    return {table.values.data(), table.values.data() + table.values.rows()};
}

void write_series(const std::filesystem::path& path, const std::vector<double>& y, std::size_t t0)
{
    CsvTable table;
    table.header = {"y"};
    table.values = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) table.index.push_back(std::to_string(t0 + i));
    write_csv(path, table);
}

DesignMatrix read_design(const std::filesystem::path& path)
{
    CsvTable table = read_csv(path);
    // an index-only file is a design with rows but no columns
    if (table.values.cols() == 0) table.values.resize(static_cast<Eigen::Index>(table.index.size()), 0);
    return DesignMatrix(std::move(table.values), std::move(table.header));
}

void write_design(const std::filesystem::path& path, const DesignMatrix& X, std::size_t t0)
{
    CsvTable table;
    table.header = X.col_names;
    table.values = X.raw_values();
    for (Eigen::Index i = 0; i < X.rows(); ++i) table.index.push_back(std::to_string(t0 + static_cast<std::size_t>(i)));
    write_csv(path, table);
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
        out << text;
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace aggpi::io
