#include "racesim/telemetry/table.hpp"

#include "racesim/util/error.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace racesim::telemetry {

namespace fs = std::filesystem;

std::size_t TopicTable::col(const std::string &name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) {
            return i;
        }
    }
    throw IoError("column '" + name + "' not found in table for " + topic);
}

double TopicTable::max_frequency() const {
    if (rows.size() < 2) {
        return 0.0;
    }
    double span = rows.back()[0] - rows.front()[0];
    if (span <= 0.0) {
        return 0.0;
    }
    return static_cast<double>(rows.size() - 1) / span;
}

std::map<std::string, TopicTable> extract_tables(const simbus::RunTrace &trace) {
    std::map<std::string, TopicTable> tables;
    for (const auto &entry : trace.entries) {
        const auto &msg = entry.msg;
        auto it = tables.find(msg.topic);
        if (it == tables.end()) {
            TopicTable table;
            table.topic = msg.topic;
            table.columns.push_back("timestamp");
            for (const auto &name : msg.payload.flat_names()) {
                table.columns.push_back(name);
            }
            it = tables.emplace(msg.topic, std::move(table)).first;
        }
        std::vector<double> row;
        row.reserve(it->second.columns.size());
        row.push_back(msg.stamp());
        for (double v : msg.payload.flat_values()) {
            row.push_back(v);
        }
        if (row.size() != it->second.columns.size()) {
            throw IoError("message on " + msg.topic + " does not match its table layout");
        }
        it->second.rows.push_back(std::move(row));
    }
    // delayed deliveries can land out of stamp order; tables are stamp-sorted
    for (auto &[topic, table] : tables) {
        std::stable_sort(table.rows.begin(), table.rows.end(),
                         [](const auto &a, const auto &b) { return a[0] < b[0]; });
    }
    return tables;
}

std::string topic_csv_name(const std::string &topic) {
    // '__' keeps the mapping reversible for topics containing '_'
    std::string name;
    for (char c : topic.substr(topic.front() == '/' ? 1 : 0)) {
        if (c == '/') {
            name += "__";
        } else {
            name += c;
        }
    }
    return name + ".csv";
}

std::string csv_name_topic(const std::string &file_name) {
    std::string name = file_name;
    auto pos = name.rfind(".csv");
    if (pos != std::string::npos) {
        name.erase(pos);
    }
    std::string topic = "/";
    for (std::size_t i = 0; i < name.size(); ++i) {
        if (i + 1 < name.size() && name[i] == '_' && name[i + 1] == '_') {
            topic += '/';
            ++i;
        } else {
            topic += name[i];
        }
    }
    return topic;
}

void write_topic_csv(const TopicTable &table, const std::string &dir) {
    CsvDoc doc;
    doc.header = table.columns;
    doc.rows = table.rows;
    write_csv((fs::path(dir) / topic_csv_name(table.topic)).string(), doc);
}

std::map<std::string, TopicTable> read_topic_csvs(const std::string &dir) {
    std::map<std::string, TopicTable> tables;
    if (!fs::is_directory(dir)) {
        throw IoError("log directory not found: " + dir);
    }
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".csv") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto &f : files) {
        CsvDoc doc = read_csv(f.string());
        if (doc.header.empty() || doc.header[0] != "timestamp") {
            throw IoError("not a topic log (first column must be timestamp): " + f.string());
        }
        TopicTable table;
        table.topic = csv_name_topic(f.filename().string());
        table.columns = doc.header;
        table.rows = std::move(doc.rows);
        tables.emplace(table.topic, std::move(table));
    }
    return tables;
}

std::size_t MasterTable::index_of(const std::string &topic, const std::string &column) const {
    std::string key = topic + "|" + column;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == key) {
            return i;
        }
    }
    throw IoError("master table column not found: " + key);
}

bool MasterTable::has(const std::string &topic, const std::string &column) const {
    std::string key = topic + "|" + column;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == key) {
            return topic_present[i];
        }
    }
    return false;
}

const std::vector<double> &MasterTable::col(const std::string &topic,
                                            const std::string &column) const {
    return columns[index_of(topic, column)];
}

MasterTable merge_tables(const std::map<std::string, TopicTable> &tables,
                         const ColumnSelection &selection, double freq_bound) {
    MasterTable master;

    double max_freq = 0.0;
    double t_begin = std::numeric_limits<double>::infinity();
    double t_end = -std::numeric_limits<double>::infinity();
    for (const auto &[topic, cols] : selection) {
        auto it = tables.find(topic);
        if (it == tables.end() || it->second.rows.empty()) {
            continue;
        }
        max_freq = std::max(max_freq, it->second.max_frequency());
        t_begin = std::min(t_begin, it->second.rows.front()[0]);
        t_end = std::max(t_end, it->second.rows.back()[0]);
    }
    if (max_freq == 0.0 || t_end < t_begin) {
        return master; // nothing to merge
    }
    master.frequency = std::min(max_freq, freq_bound);
    double dt = 1.0 / master.frequency;
    std::size_t n = static_cast<std::size_t>(std::floor((t_end - t_begin) / dt)) + 1;
    master.t.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        master.t[i] = t_begin + static_cast<double>(i) * dt;
    }

    for (const auto &[topic, wanted] : selection) {
        auto it = tables.find(topic);
        bool present = it != tables.end() && !it->second.rows.empty();

        std::vector<std::string> col_names;
        if (present) {
            if (wanted.empty()) {
                col_names.assign(it->second.columns.begin() + 1, it->second.columns.end());
            } else {
                col_names = wanted;
            }
        } else {
            col_names = wanted; // keep requested layout with empty data
        }

        for (const auto &cname : col_names) {
            master.names.push_back(topic + "|" + cname);
            master.topic_present.push_back(present);
            std::vector<double> out(n, 0.0);
            if (present) {
                const TopicTable &table = it->second;
                std::size_t ci = table.col(cname);
                std::size_t j = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    double t = master.t[i];
                    // advance while the next row is strictly closer; on a tie
                    // the earlier row wins
                    while (j + 1 < table.rows.size() &&
                           std::abs(table.rows[j + 1][0] - t) < std::abs(table.rows[j][0] - t)) {
                        ++j;
                    }
                    out[i] = table.rows[j][ci];
                }
            }
            master.columns.push_back(std::move(out));
        }
    }
    return master;
}

} // namespace racesim::telemetry
