#pragma once

// Minimal numeric CSV tables: one header line, comma-separated doubles.

#include <iosfwd>
#include <string>
#include <vector>

namespace snail {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Index of a column, or -1.
    int find(const std::string& name) const;
    /// Column values; throws std::runtime_error naming the missing column.
    std::vector<double> column(const std::string& name) const;
};

/// Parse CSV text. Blank lines and lines starting with '#' are skipped.
CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv(const std::string& path);

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv(const std::string& path, const CsvTable& table);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace snail
