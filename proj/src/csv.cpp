#include "aetrace/csv.hpp"

#include <fstream>
#include <sstream>

#include "aetrace/errors.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

std::vector<CsvRow> parse_csv(std::string_view text, char delim) {
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    size_t i = 0;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == delim) {
            end_field();
        } else if (c == '\r') {
            // swallow; \r\n handled at \n
        } else if (c == '\n') {
            end_row();
        } else {
            field.push_back(c);
            field_started = true;
        }
        ++i;
    }
    if (in_quotes) throw ParseError("unterminated quoted CSV field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::vector<CsvRow> read_csv_file(const std::filesystem::path& path, char delim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CSV file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), delim);
}

std::string format_csv_field(std::string_view field, char delim) {
    bool needs_quote = false;
    for (char c : field) {
        if (c == delim || c == '"' || c == '\n' || c == '\r') {
            needs_quote = true;
            break;
        }
    }
    if (!needs_quote) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& os, const CsvRow& row, char delim) {
    for (size_t i = 0; i < row.size(); ++i) {
        if (i) os << delim;
        os << format_csv_field(row[i], delim);
    }
    os << '\n';
}

std::string csv_to_string(const std::vector<CsvRow>& rows, char delim) {
    std::ostringstream ss;
    for (const auto& row : rows) write_csv_row(ss, row, delim);
    return ss.str();
}

int find_column(const CsvRow& header, std::string_view name) {
    for (size_t i = 0; i < header.size(); ++i)
        if (equals_icase(trim(header[i]), trim(name))) return int(i);
    return -1;
}

} // namespace aetrace
