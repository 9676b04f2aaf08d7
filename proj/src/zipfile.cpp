#include "aetrace/zipfile.hpp"

#include <zlib.h>

namespace aetrace {

namespace {

void put16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

// 1980-01-01 00:00:00 in DOS date/time encoding.
constexpr std::uint16_t kDosDate = (1 << 5) | 1;
constexpr std::uint16_t kDosTime = 0;

} // namespace

void ZipWriter::add_entry(const std::string& name, const std::string& content) {
    Entry e;
    e.name = name;
    e.content = content;
    e.crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(content.data()),
              static_cast<uInt>(content.size())));
    entries_.push_back(std::move(e));
}

std::string ZipWriter::finish() const {
    std::string out;
    std::vector<std::uint32_t> offsets;

    for (const auto& e : entries_) {
        offsets.push_back(static_cast<std::uint32_t>(out.size()));
        put32(out, 0x04034b50);                              // local file header
        put16(out, 20);                                      // version needed
        put16(out, 0);                                       // flags
        put16(out, 0);                                       // method: stored
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, e.crc);
        put32(out, static_cast<std::uint32_t>(e.content.size())); // compressed
        put32(out, static_cast<std::uint32_t>(e.content.size())); // uncompressed
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0); // extra length
        out += e.name;
        out += e.content;
    }

    const std::uint32_t cd_start = static_cast<std::uint32_t>(out.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        put32(out, 0x02014b50); // central directory header
        put16(out, 20);         // version made by
        put16(out, 20);         // version needed
        put16(out, 0);
        put16(out, 0);
        put16(out, kDosTime);
        put16(out, kDosDate);
        put32(out, e.crc);
        put32(out, static_cast<std::uint32_t>(e.content.size()));
        put32(out, static_cast<std::uint32_t>(e.content.size()));
        put16(out, static_cast<std::uint16_t>(e.name.size()));
        put16(out, 0); // extra
        put16(out, 0); // comment
        put16(out, 0); // disk number
        put16(out, 0); // internal attrs
        put32(out, 0); // external attrs
        put32(out, offsets[i]);
        out += e.name;
    }
    const std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_start;

    put32(out, 0x06054b50); // end of central directory
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<std::uint16_t>(entries_.size()));
    put16(out, static_cast<std::uint16_t>(entries_.size()));
    put32(out, cd_size);
    put32(out, cd_start);
    put16(out, 0); // comment length
    return out;
}

} // namespace aetrace
