#pragma once

#include "racesim/simbus/message.hpp"
#include "racesim/util/csv.hpp"

#include <map>
#include <string>
#include <vector>

namespace racesim::telemetry {

/// Per-topic tabular log: timestamp column first, then the flattened
/// payload fields (vector leaves expanded with index suffixes).
struct TopicTable {
    std::string topic;
    std::vector<std::string> columns; // "timestamp", then dot-paths
    std::vector<std::vector<double>> rows;

    std::size_t col(const std::string &name) const; // throws IoError if absent
    double max_frequency() const;                   // observed rows/second
};

/// Extract one table per topic from a run trace, ordered by stamp.
std::map<std::string, TopicTable> extract_tables(const simbus::RunTrace &trace);

/// CSV round trip for the per-topic logs. File names derive from the topic
/// path with '/' replaced by '_' (leading slash stripped).
std::string topic_csv_name(const std::string &topic);
std::string csv_name_topic(const std::string &file_name);
void write_topic_csv(const TopicTable &table, const std::string &dir);
std::map<std::string, TopicTable> read_topic_csvs(const std::string &dir);

/// Column selection for the master table: topic -> column names (empty
/// vector selects every column of the topic).
using ColumnSelection = std::map<std::string, std::vector<std::string>>;

/// One merged table on a common time grid; every cell picked from its
/// source table by nearest timestamp (ties resolved to the earlier row).
struct MasterTable {
    double frequency = 0.0;
    std::vector<double> t;
    std::vector<std::string> names; // "topic|column"
    std::vector<std::vector<double>> columns;
    std::vector<bool> topic_present; // per column: source table had any rows

    std::size_t index_of(const std::string &topic, const std::string &column) const;
    const std::vector<double> &col(const std::string &topic, const std::string &column) const;
    bool has(const std::string &topic, const std::string &column) const;
    std::size_t rows() const { return t.size(); }
};

/// Merge the selected columns onto a grid at min(max observed topic
/// frequency, freq_bound) Hz.
MasterTable merge_tables(const std::map<std::string, TopicTable> &tables,
                         const ColumnSelection &selection, double freq_bound);

} // namespace racesim::telemetry
