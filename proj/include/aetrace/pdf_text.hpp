#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace aetrace {

struct PdfTextResult {
    std::string text; // reading order, page boundaries marked with newline
    int page_count = 0;
    std::vector<std::string> warnings;
};

// Text extraction for classic-structure PDFs (plain or FlateDecode content
// streams, standard text operators). Encrypted or unparseable documents throw
// ExtractionError; a document with pages but no text operators comes back
// with empty text plus a warning (no OCR).
PdfTextResult extract_pdf_text(std::string_view pdf_bytes);

// zlib helpers, shared with the workbook writer.
std::string zlib_inflate(std::string_view data);
std::string zlib_deflate(std::string_view data);

} // namespace aetrace
