#ifndef DHAZ_CSV_HPP
#define DHAZ_CSV_HPP

// Minimal CSV support: comma delimiter, header row, optional double quotes.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhaz {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a named column, -1 if absent.
    int column(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == name) return static_cast<int>(j);
        }
        return -1;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
    table.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != table.header.size()) {
            throw std::runtime_error("unparseable file: row with " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(table.header.size()) + " in " + path);
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j) out << ',';
        out << csv_quote(header[j]);
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << csv_quote(row[j]);
        }
        out << '\n';
    }
}

// Fixed 6-significant-digit rendering for tabular output.
inline std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace dhaz

#endif
