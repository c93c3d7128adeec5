#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace knotfit {

/// Shortest text form that parses back to the identical double (%.17g).
std::string format_double(double v);

/// Numeric table with a header row.  Parsing is strict: every data row must
/// have exactly one finite number per column; violations name the 1-based
/// data row and the offending column.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int cols() const { return static_cast<int>(header.size()); }
    int size() const { return static_cast<int>(rows.size()); }
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

void write_csv(const CsvTable& table, std::ostream& out);

/// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace knotfit
