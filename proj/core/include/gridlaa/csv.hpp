#pragma once

#include <string>
#include <variant>
#include <vector>

namespace gridlaa {

/// Row-oriented table rendered as RFC-4180 style CSV: UTF-8, LF line ends,
/// fields quoted only when they contain a comma, quote or newline. Numeric
/// cells are printed with 9 significant digits so identical inputs produce
/// byte-identical artifacts.
class CsvTable {
public:
    using Cell = std::variant<std::string, double, long long>;

    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<Cell> cells);
    std::string render() const;
    /// Renders to a file, creating parent directories if needed.
    void write(const std::string& path) const;

    size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace gridlaa
