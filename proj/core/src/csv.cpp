#include "gridlaa/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridlaa/errors.hpp"

namespace gridlaa {

namespace {

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string render_cell(const CsvTable::Cell& cell) {
    if (std::holds_alternative<std::string>(cell))
        return escape(std::get<std::string>(cell));
    if (std::holds_alternative<long long>(cell))
        return std::to_string(std::get<long long>(cell));
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", std::get<double>(cell));
    return buf;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<Cell> cells) {
    if (cells.size() != header_.size())
        throw ValidationError("csv row width does not match header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::render() const {
    std::ostringstream os;
    for (size_t i = 0; i < header_.size(); ++i) {
        if (i) os << ',';
        os << escape(header_[i]);
    }
    os << '\n';
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << render_cell(row[i]);
        }
        os << '\n';
    }
    return os.str();
}

void CsvTable::write(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot open " + path + " for writing");
    out << render();
}

}  // namespace gridlaa
