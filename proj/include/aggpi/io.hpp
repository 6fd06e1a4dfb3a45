#pragma once

#include "aggpi/linmodel.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace aggpi::io {

/// "%.17g", so every double survives a round trip; NaN is written as NA.
std::string format_double(double value);

/// Parses a finite or "NA"/"nan"/"inf" token; throws IoError on junk.
double parse_double(const std::string& token);

/// Comma-separated table with a header row. An optional leading column named
/// "t" (integer index or ISO-8601 timestamp) is carried as text.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::string> index;
    Eigen::MatrixXd values;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Single-column series ("t,y"); reading accepts any one value column.
std::vector<double> read_series(const std::filesystem::path& path);
void write_series(const std::filesystem::path& path, const std::vector<double>& y, std::size_t t0 = 0);

/// Covariate matrix with named columns; reading keeps the header names.
DesignMatrix read_design(const std::filesystem::path& path);
void write_design(const std::filesystem::path& path, const DesignMatrix& X, std::size_t t0 = 0);

/// Writes to a temporary sibling, then renames.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace aggpi::io
