#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace aetrace {

using CsvRow = std::vector<std::string>;

// RFC 4180 style: fields quoted when they contain the delimiter, a quote,
// or a line break; "" escapes a quote. Accepts \n and \r\n input.
std::vector<CsvRow> parse_csv(std::string_view text, char delim = ',');
std::vector<CsvRow> read_csv_file(const std::filesystem::path& path, char delim = ',');

std::string format_csv_field(std::string_view field, char delim = ',');
void write_csv_row(std::ostream& os, const CsvRow& row, char delim = ',');
std::string csv_to_string(const std::vector<CsvRow>& rows, char delim = ',');

// Header helper: maps a header cell name to its column index, -1 when absent.
int find_column(const CsvRow& header, std::string_view name);

} // namespace aetrace
