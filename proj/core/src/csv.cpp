#include "knotfit/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace knotfit {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("csv: missing header line");
    }
    for (const auto& h : split_line(line)) table.header.push_back(trim(h));
    if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty())) {
        throw std::invalid_argument("csv: empty header");
    }

    int row_number = 0;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != table.header.size()) {
            std::ostringstream msg;
            msg << "csv: row " << row_number << ": expected " << table.header.size()
                << " fields, got " << fields.size();
            throw std::invalid_argument(msg.str());
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string f = trim(fields[c]);
            if (f.empty()) {
                std::ostringstream msg;
                msg << "csv: row " << row_number << ", column '" << table.header[c]
                    << "': missing value";
                throw std::invalid_argument(msg.str());
            }
            errno = 0;
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0' || errno == ERANGE) {
                std::ostringstream msg;
                msg << "csv: row " << row_number << ", column '" << table.header[c]
                    << "': not a number: '" << f << "'";
                throw std::invalid_argument(msg.str());
            }
            row.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return read_csv(in);
}

void write_csv(const CsvTable& table, std::ostream& out) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c) out << ',';
        out << table.header[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << format_double(row[c]);
        }
        out << '\n';
    }
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << content;
        out.flush();
        if (!out) {
            std::remove(tmp.c_str());
            throw std::runtime_error("write failed: " + tmp);
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("rename failed: " + path);
    }
}

}  // namespace knotfit
