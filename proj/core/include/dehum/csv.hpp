#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace dehum {

// RFC-4180 style writer: fields containing comma, quote or newline are
// quoted, everything else is written verbatim. Rows always end in '\n'.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);

    void write_row(const std::vector<std::string>& fields);
    void close();

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

std::string csv_escape(std::string_view field);

// Parses a full CSV file into rows of fields, honoring quoted fields.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

} // namespace dehum
