#include "racesim/util/csv.hpp"

#include "racesim/util/error.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace racesim {

std::size_t CsvDoc::col_index(const std::string &name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw IoError("CSV column not found: " + name);
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvDoc read_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open CSV file: " + path);
    }
    CsvDoc doc;
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("CSV file is empty: " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
        doc.header.push_back(cell);
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        row.reserve(doc.header.size());
        const char *p = line.c_str();
        const char *end = p + line.size();
        while (p <= end) {
            const char *comma = p;
            while (comma < end && *comma != ',') {
                ++comma;
            }
            double value = 0.0;
            auto res = std::from_chars(p, comma, value);
            if (res.ec != std::errc() || res.ptr != comma) {
                throw IoError(path + ":" + std::to_string(line_no) + ": bad numeric cell '" +
                              std::string(p, comma) + "'");
            }
            row.push_back(value);
            if (comma == end) {
                break;
            }
            p = comma + 1;
            if (p == end) { // trailing comma -> empty final cell
                throw IoError(path + ":" + std::to_string(line_no) + ": empty trailing cell");
            }
        }
        if (row.size() != doc.header.size()) {
            throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(doc.header.size()) + " cells, got " +
                          std::to_string(row.size()));
        }
        doc.rows.push_back(std::move(row));
    }
    return doc;
}

void write_csv(const std::string &path, const CsvDoc &doc) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open CSV file for writing: " + path);
    }
    for (std::size_t i = 0; i < doc.header.size(); ++i) {
        if (i) {
            out << ',';
        }
        out << doc.header[i];
    }
    out << '\n';
    for (const auto &row : doc.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                out << ',';
            }
            out << format_double(row[i]);
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

} // namespace racesim
