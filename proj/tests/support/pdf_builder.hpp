#pragma once

// Builds small, standards-shaped PDF files for tests and fixtures: catalog,
// page tree, one FlateDecode (or plain) content stream per page, xref and
// trailer. Text is emitted one line per Tj/T* pair.

#include <string>
#include <vector>

#include "aetrace/pdf_text.hpp"

namespace testpdf {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\\' || c == '(' || c == ')') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string content_stream(const std::vector<std::string>& lines) {
    std::string s = "BT\n/F1 11 Tf\n72 770 Td\n";
    for (const auto& line : lines) s += "(" + escape(line) + ") Tj\nT*\n";
    s += "ET";
    return s;
}

// One vector of lines per page.
inline std::string build_pdf(const std::vector<std::vector<std::string>>& pages,
                             bool compress = true) {
    std::vector<std::string> objects; // objects[i] = body of object i+1
    const int npages = static_cast<int>(pages.size());
    const int font_obj = 3 + 2 * npages;

    std::string kids;
    for (int i = 0; i < npages; ++i) {
        if (!kids.empty()) kids += " ";
        kids += std::to_string(3 + 2 * i) + " 0 R";
    }
    objects.push_back("<< /Type /Catalog /Pages 2 0 R >>");
    objects.push_back("<< /Type /Pages /Kids [" + kids + "] /Count " + std::to_string(npages) +
                      " >>");

    for (int i = 0; i < npages; ++i) {
        const int content_obj = 4 + 2 * i;
        objects.push_back("<< /Type /Page /Parent 2 0 R /MediaBox [0 0 595 842] "
                          "/Resources << /Font << /F1 " +
                          std::to_string(font_obj) + " 0 R >> >> /Contents " +
                          std::to_string(content_obj) + " 0 R >>");
        std::string data = content_stream(pages[static_cast<size_t>(i)]);
        std::string dict = "<< /Length ";
        if (compress) {
            data = aetrace::zlib_deflate(data);
            dict += std::to_string(data.size()) + " /Filter /FlateDecode >>";
        } else {
            dict += std::to_string(data.size()) + " >>";
        }
        objects.push_back(dict + "\nstream\n" + data + "\nendstream");
    }
    objects.push_back("<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>");

    std::string pdf = "%PDF-1.4\n%\xe2\xe3\xcf\xd3\n";
    std::vector<size_t> offsets;
    for (size_t i = 0; i < objects.size(); ++i) {
        offsets.push_back(pdf.size());
        pdf += std::to_string(i + 1) + " 0 obj\n" + objects[i] + "\nendobj\n";
    }

    const size_t xref_at = pdf.size();
    pdf += "xref\n0 " + std::to_string(objects.size() + 1) + "\n";
    pdf += "0000000000 65535 f \n";
    for (size_t off : offsets) {
        std::string n = std::to_string(off);
        pdf += std::string(10 - n.size(), '0') + n + " 00000 n \n";
    }
    pdf += "trailer\n<< /Size " + std::to_string(objects.size() + 1) + " /Root 1 0 R >>\n";
    pdf += "startxref\n" + std::to_string(xref_at) + "\n%%EOF\n";
    return pdf;
}

} // namespace testpdf
