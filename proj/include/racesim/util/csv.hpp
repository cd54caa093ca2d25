#pragma once

#include <string>
#include <vector>

namespace racesim {

/// Columnar CSV document: one header row, float64 cells.
struct CsvDoc {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t col_index(const std::string &name) const; // throws IoError if absent
};

/// Format a double so that parsing it back yields the identical bits
/// (shortest round-trip representation).
std::string format_double(double v);

CsvDoc read_csv(const std::string &path);
void write_csv(const std::string &path, const CsvDoc &doc);

} // namespace racesim
