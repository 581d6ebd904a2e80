#include "phos/io.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace phos::io {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
}

void CsvWriter::header(const std::vector<std::string>& columns) { row(columns); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';  // LF endings, fixed for golden files
}

void CsvWriter::close() { out_.close(); }

int CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());

    CsvTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<CsvCell> cells;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) cells.push_back({field, lineno});
        if (!line.empty() && line.back() == ',') cells.push_back({"", lineno});
        if (table.columns.empty()) {
            for (auto& c : cells) table.columns.push_back(c.text);
        } else {
            if (cells.size() != table.columns.size())
                throw std::runtime_error(path.string() + ": line " + std::to_string(lineno) +
                                         ": expected " + std::to_string(table.columns.size()) +
                                         " fields, got " + std::to_string(cells.size()));
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

double parse_double(const CsvCell& cell, const std::string& column, std::vector<std::string>& errors) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell.text, &pos);
        if (pos != cell.text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        errors.push_back("line " + std::to_string(cell.line) + ": column '" + column +
                         "': cannot parse '" + cell.text + "' as a number");
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace phos::io
