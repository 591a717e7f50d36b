#include "rvfuse/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rvfuse {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(line);
    while (std::getline(ss, tok, ',')) {
        while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
        std::size_t b = 0;
        while (b < tok.size() && tok[b] == ' ') ++b;
        out.push_back(tok.substr(b));
    }
    return out;
}

bool parse_double(const std::string& s, double* out) {
    if (s.empty()) return false;
    char* end = nullptr;
    *out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw domain_error("cannot open CSV file: " + path);
    std::string line;
    std::vector<std::vector<double>> rows;
    CsvTable table;
    bool first = true;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto toks = split_commas(line);
        std::vector<double> row(toks.size());
        bool numeric = true;
        for (std::size_t i = 0; i < toks.size(); ++i)
            numeric = numeric && parse_double(toks[i], &row[i]);
        if (first) {
            first = false;
            if (!numeric) {
                table.header = toks;
                width = toks.size();
                continue;
            }
            width = toks.size();
        }
        if (!numeric) throw domain_error("malformed CSV row in " + path + ": " + line);
        if (row.size() != width)
            throw domain_error("ragged CSV row in " + path + ": " + line);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw domain_error("CSV file has no data rows: " + path);
    table.values = Matrix(rows.size(), width);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c) table.values(r, c) = rows[r][c];
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values) {
    std::ofstream out(path);
    if (!out) throw domain_error("cannot open CSV file for writing: " + path);
    if (!header.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i)
            out << header[i] << (i + 1 < header.size() ? "," : "\n");
    }
    char buf[40];
    for (std::size_t r = 0; r < values.rows(); ++r) {
        for (std::size_t c = 0; c < values.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.12g", values(r, c));
            out << buf << (c + 1 < values.cols() ? "," : "\n");
        }
    }
}

}  // namespace rvfuse
