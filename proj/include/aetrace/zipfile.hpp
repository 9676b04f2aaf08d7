#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aetrace {

// Minimal zip archive writer, enough to produce office spreadsheet
// containers. Entries are stored uncompressed with zeroed timestamps so the
// same inputs always produce the same bytes.
class ZipWriter {
public:
    void add_entry(const std::string& name, const std::string& content);
    std::string finish() const;

private:
    struct Entry {
        std::string name;
        std::string content;
        std::uint32_t crc = 0;
    };
    std::vector<Entry> entries_;
};

} // namespace aetrace
