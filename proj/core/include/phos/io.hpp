#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace phos::io {

/// Formats a double with enough digits to round-trip, '.' decimal separator,
/// locale independent.  All CSV/JSON output funnels through this so golden
/// files stay byte-stable.
std::string format_double(double x);

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::ofstream out_;
};

struct CsvCell {
    std::string text;
    int line = 0;  // 1-based source line, for diagnostics
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<CsvCell>> rows;

    int column_index(const std::string& name) const;  // -1 if absent
};

/// Reads a headered CSV file; throws with the file name on I/O failure.
CsvTable read_csv(const std::filesystem::path& path);

/// Parses a cell as double; on failure appends a line-numbered message to
/// `errors` and returns NaN.
double parse_double(const CsvCell& cell, const std::string& column, std::vector<std::string>& errors);

}  // namespace phos::io
