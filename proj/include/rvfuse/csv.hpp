#pragma once

#include <string>
#include <vector>

#include "rvfuse/common.hpp"

namespace rvfuse {

struct CsvTable {
    std::vector<std::string> header;  // empty if the file had no header row
    Matrix values;
};

// Reads a numeric CSV. A non-numeric first row is treated as the header.
CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& values);

}  // namespace rvfuse
