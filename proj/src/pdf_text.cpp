#include "aetrace/pdf_text.hpp"

#include <zlib.h>

#include <cctype>
#include <map>
#include <optional>
#include <set>

#include "aetrace/errors.hpp"

namespace aetrace {

std::string zlib_inflate(std::string_view data) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw ExtractionError("zlib init failed");
    std::string out;
    char buf[16384];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = uInt(data.size());
    int ret = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw ExtractionError("corrupt deflate stream (zlib code " + std::to_string(ret) +
                                  ")");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (ret != Z_STREAM_END && zs.avail_in > 0);
    inflateEnd(&zs);
    return out;
}

std::string zlib_deflate(std::string_view data) {
    z_stream zs{};
    if (deflateInit(&zs, Z_BEST_COMPRESSION) != Z_OK)
        throw Error("zlib deflate init failed");
    std::string out;
    char buf[16384];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = uInt(data.size());
    int ret;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        ret = deflate(&zs, Z_FINISH);
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (ret != Z_STREAM_END);
    deflateEnd(&zs);
    return out;
}

namespace {

// --- tiny PDF object model -------------------------------------------------

struct PdfObj {
    enum class Kind { Null, Bool, Number, String, Name, Array, Dict, Ref } kind = Kind::Null;
    double number = 0;
    bool boolean = false;
    std::string text; // String payload or Name
    std::vector<PdfObj> array;
    std::map<std::string, PdfObj> dict;
    int ref_num = 0;

    bool is_name(std::string_view n) const { return kind == Kind::Name && text == n; }
    const PdfObj* find(const std::string& key) const {
        if (kind != Kind::Dict) return nullptr;
        auto it = dict.find(key);
        return it == dict.end() ? nullptr : &it->second;
    }
};

struct IndirectObject {
    PdfObj value;
    std::string stream; // raw bytes, empty when the object has no stream
    bool has_stream = false;
};

class Parser {
public:
    explicit Parser(std::string_view buf) : buf_(buf) {}

    size_t pos = 0;

    void skip_ws() {
        while (pos < buf_.size()) {
            char c = buf_[pos];
            if (c == '%') { // comment to end of line
                while (pos < buf_.size() && buf_[pos] != '\n' && buf_[pos] != '\r') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    bool match_keyword(std::string_view kw) {
        skip_ws();
        if (buf_.compare(pos, kw.size(), kw) == 0) {
            pos += kw.size();
            return true;
        }
        return false;
    }

    PdfObj parse_value() {
        skip_ws();
        if (pos >= buf_.size()) throw ExtractionError("unexpected end of PDF data");
        char c = buf_[pos];
        if (c == '/') return parse_name();
        if (c == '(') return parse_literal_string();
        if (c == '<') {
            if (pos + 1 < buf_.size() && buf_[pos + 1] == '<') return parse_dict();
            return parse_hex_string();
        }
        if (c == '[') return parse_array();
        if (buf_.compare(pos, 4, "true") == 0) {
            pos += 4;
            PdfObj o;
            o.kind = PdfObj::Kind::Bool;
            o.boolean = true;
            return o;
        }
        if (buf_.compare(pos, 5, "false") == 0) {
            pos += 5;
            PdfObj o;
            o.kind = PdfObj::Kind::Bool;
            return o;
        }
        if (buf_.compare(pos, 4, "null") == 0) {
            pos += 4;
            return {};
        }
        return parse_number_or_ref();
    }

    PdfObj parse_name() {
        PdfObj o;
        o.kind = PdfObj::Kind::Name;
        ++pos; // '/'
        while (pos < buf_.size()) {
            char c = buf_[pos];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '/' || c == '[' || c == ']' ||
                c == '(' || c == ')' || c == '<' || c == '>' || c == '%')
                break;
            if (c == '#' && pos + 2 < buf_.size()) {
                auto hex = [&](char h) -> int {
                    if (h >= '0' && h <= '9') return h - '0';
                    if (h >= 'a' && h <= 'f') return h - 'a' + 10;
                    if (h >= 'A' && h <= 'F') return h - 'A' + 10;
                    return -1;
                };
                int hi = hex(buf_[pos + 1]), lo = hex(buf_[pos + 2]);
                if (hi >= 0 && lo >= 0) {
                    o.text.push_back(char(hi * 16 + lo));
                    pos += 3;
                    continue;
                }
            }
            o.text.push_back(c);
            ++pos;
        }
        return o;
    }

    PdfObj parse_literal_string() {
        PdfObj o;
        o.kind = PdfObj::Kind::String;
        ++pos; // '('
        int depth = 1;
        while (pos < buf_.size()) {
            char c = buf_[pos++];
            if (c == '\\') {
                if (pos >= buf_.size()) break;
                char e = buf_[pos++];
                switch (e) {
                case 'n': o.text.push_back('\n'); break;
                case 'r': o.text.push_back('\r'); break;
                case 't': o.text.push_back('\t'); break;
                case 'b': o.text.push_back('\b'); break;
                case 'f': o.text.push_back('\f'); break;
                case '(': o.text.push_back('('); break;
                case ')': o.text.push_back(')'); break;
                case '\\': o.text.push_back('\\'); break;
                case '\r':
                    if (pos < buf_.size() && buf_[pos] == '\n') ++pos;
                    break; // line continuation
                case '\n': break;
                default:
                    if (e >= '0' && e <= '7') {
                        int val = e - '0';
                        for (int k = 0; k < 2 && pos < buf_.size() && buf_[pos] >= '0' &&
                                        buf_[pos] <= '7';
                             ++k)
                            val = val * 8 + (buf_[pos++] - '0');
                        o.text.push_back(char(val));
                    } else {
                        o.text.push_back(e);
                    }
                }
            } else if (c == '(') {
                ++depth;
                o.text.push_back(c);
            } else if (c == ')') {
                if (--depth == 0) return o;
                o.text.push_back(c);
            } else {
                o.text.push_back(c);
            }
        }
        throw ExtractionError("unterminated string in PDF");
    }

    PdfObj parse_hex_string() {
        PdfObj o;
        o.kind = PdfObj::Kind::String;
        ++pos; // '<'
        int hi = -1;
        auto hexval = [](char h) -> int {
            if (h >= '0' && h <= '9') return h - '0';
            if (h >= 'a' && h <= 'f') return h - 'a' + 10;
            if (h >= 'A' && h <= 'F') return h - 'A' + 10;
            return -1;
        };
        while (pos < buf_.size() && buf_[pos] != '>') {
            int v = hexval(buf_[pos++]);
            if (v < 0) continue;
            if (hi < 0) {
                hi = v;
            } else {
                o.text.push_back(char(hi * 16 + v));
                hi = -1;
            }
        }
        if (hi >= 0) o.text.push_back(char(hi * 16));
        if (pos < buf_.size()) ++pos; // '>'
        return o;
    }

    PdfObj parse_array() {
        PdfObj o;
        o.kind = PdfObj::Kind::Array;
        ++pos; // '['
        while (true) {
            skip_ws();
            if (pos >= buf_.size()) throw ExtractionError("unterminated array in PDF");
            if (buf_[pos] == ']') {
                ++pos;
                return o;
            }
            o.array.push_back(parse_value());
        }
    }

    PdfObj parse_dict() {
        PdfObj o;
        o.kind = PdfObj::Kind::Dict;
        pos += 2; // '<<'
        while (true) {
            skip_ws();
            if (pos >= buf_.size()) throw ExtractionError("unterminated dictionary in PDF");
            if (buf_.compare(pos, 2, ">>") == 0) {
                pos += 2;
                return o;
            }
            if (buf_[pos] != '/') throw ExtractionError("dictionary key is not a name");
            PdfObj key = parse_name();
            o.dict[key.text] = parse_value();
        }
    }

    PdfObj parse_number_or_ref() {
        size_t start = pos;
        auto read_number = [&]() -> std::optional<double> {
            skip_ws();
            size_t s = pos;
            if (pos < buf_.size() && (buf_[pos] == '+' || buf_[pos] == '-')) ++pos;
            bool digits = false;
            while (pos < buf_.size() &&
                   (std::isdigit(static_cast<unsigned char>(buf_[pos])) || buf_[pos] == '.')) {
                digits = digits || buf_[pos] != '.';
                ++pos;
            }
            if (!digits) {
                pos = s;
                return std::nullopt;
            }
            return std::stod(std::string(buf_.substr(s, pos - s)));
        };

        auto first = read_number();
        if (!first) throw ExtractionError("unparseable token in PDF at offset " +
                                          std::to_string(start));

        // "N G R" is an indirect reference
        size_t save = pos;
        auto second = read_number();
        if (second) {
            skip_ws();
            if (pos < buf_.size() && buf_[pos] == 'R' &&
                (pos + 1 >= buf_.size() ||
                 !std::isalnum(static_cast<unsigned char>(buf_[pos + 1])))) {
                ++pos;
                PdfObj o;
                o.kind = PdfObj::Kind::Ref;
                o.ref_num = int(*first);
                return o;
            }
        }
        pos = save;
        PdfObj o;
        o.kind = PdfObj::Kind::Number;
        o.number = *first;
        return o;
    }

    std::string_view buf() const { return buf_; }

private:
    std::string_view buf_;
};

class Document {
public:
    explicit Document(std::string_view bytes) : bytes_(bytes) {
        if (bytes_.substr(0, 5) != "%PDF-")
            throw ExtractionError("not a PDF document (missing %PDF header)");
        scan_objects();
        scan_trailers();
    }

    const std::map<int, IndirectObject>& objects() const { return objects_; }

    const PdfObj* resolve(const PdfObj* obj) const {
        while (obj && obj->kind == PdfObj::Kind::Ref) {
            auto it = objects_.find(obj->ref_num);
            if (it == objects_.end()) return nullptr;
            obj = &it->second.value;
        }
        return obj;
    }

    const IndirectObject* object(int num) const {
        auto it = objects_.find(num);
        return it == objects_.end() ? nullptr : &it->second;
    }

    bool encrypted() const { return encrypted_; }
    const PdfObj* root() const { return root_.kind == PdfObj::Kind::Null ? nullptr : &root_; }

private:
    // Sequential scan of "N G obj ... endobj" records; streams are skipped in
    // place so stream payloads are never re-scanned for object headers.
    void scan_objects() {
        Parser p(bytes_);
        while (p.pos < bytes_.size()) {
            size_t line_start = p.pos;
            p.skip_ws();
            size_t save = p.pos;
            int num = 0;
            if (!try_object_header(p, num)) {
                p.pos = save;
                skip_to_next_line(p);
                if (p.pos <= line_start) break;
                continue;
            }
            IndirectObject rec;
            try {
                rec.value = p.parse_value();
            } catch (const ExtractionError&) {
                skip_to_next_line(p);
                continue;
            }
            p.skip_ws();
            if (p.buf().compare(p.pos, 6, "stream") == 0) {
                p.pos += 6;
                if (p.pos < bytes_.size() && bytes_[p.pos] == '\r') ++p.pos;
                if (p.pos < bytes_.size() && bytes_[p.pos] == '\n') ++p.pos;
                size_t data_start = p.pos;
                size_t data_end;
                const PdfObj* len = resolve_in_scan(rec.value.find("Length"));
                if (len && len->kind == PdfObj::Kind::Number &&
                    data_start + size_t(len->number) <= bytes_.size()) {
                    data_end = data_start + size_t(len->number);
                } else {
                    data_end = bytes_.find("endstream", data_start);
                    if (data_end == std::string_view::npos)
                        throw ExtractionError("stream without endstream");
                    while (data_end > data_start &&
                           (bytes_[data_end - 1] == '\n' || bytes_[data_end - 1] == '\r'))
                        --data_end;
                }
                rec.stream = std::string(bytes_.substr(data_start, data_end - data_start));
                rec.has_stream = true;
                size_t es = bytes_.find("endstream", data_end);
                p.pos = es == std::string_view::npos ? bytes_.size() : es + 9;
            }
            p.match_keyword("endobj");
            objects_[num] = std::move(rec);
        }
    }

    // Length may be an indirect ref to an object that appears later; during
    // the scan only already-seen objects resolve, the fallback handles the rest.
    const PdfObj* resolve_in_scan(const PdfObj* obj) const {
        if (obj && obj->kind == PdfObj::Kind::Ref) {
            auto it = objects_.find(obj->ref_num);
            return it == objects_.end() ? nullptr : &it->second.value;
        }
        return obj;
    }

    static bool try_object_header(Parser& p, int& num_out) {
        p.skip_ws();
        size_t s = p.pos;
        auto sv = p.buf();
        size_t i = s;
        auto read_int = [&](int& out) {
            size_t b = i;
            while (i < sv.size() && std::isdigit(static_cast<unsigned char>(sv[i]))) ++i;
            if (i == b) return false;
            out = std::stoi(std::string(sv.substr(b, i - b)));
            return true;
        };
        int num = 0, gen = 0;
        if (!read_int(num)) return false;
        if (i >= sv.size() || !std::isspace(static_cast<unsigned char>(sv[i]))) return false;
        while (i < sv.size() && std::isspace(static_cast<unsigned char>(sv[i]))) ++i;
        if (!read_int(gen)) return false;
        while (i < sv.size() && std::isspace(static_cast<unsigned char>(sv[i]))) ++i;
        if (sv.compare(i, 3, "obj") != 0) return false;
        p.pos = i + 3;
        num_out = num;
        return true;
    }

    static void skip_to_next_line(Parser& p) {
        auto sv = p.buf();
        while (p.pos < sv.size() && sv[p.pos] != '\n') ++p.pos;
        if (p.pos < sv.size()) ++p.pos;
    }

    void scan_trailers() {
        size_t pos = 0;
        while ((pos = bytes_.find("trailer", pos)) != std::string::npos) {
            Parser p(bytes_);
            p.pos = pos + 7;
            try {
                PdfObj dict = p.parse_value();
                if (dict.kind == PdfObj::Kind::Dict) {
                    if (dict.find("Encrypt")) encrypted_ = true;
                    if (const PdfObj* r = dict.find("Root")) root_ = *r;
                }
            } catch (const ExtractionError&) {
                // tolerated; some producers append junk after the last xref
            }
            pos += 7;
        }
    }

    std::string_view bytes_;
    std::map<int, IndirectObject> objects_;
    bool encrypted_ = false;
    PdfObj root_;
};

// --- content stream text assembly -------------------------------------------

void append_line_break(std::string& out) {
    if (!out.empty() && out.back() != '\n') out.push_back('\n');
}

void extract_from_content(const std::string& content, std::string& out) {
    Parser p(content);
    std::vector<PdfObj> operands;

    while (true) {
        p.skip_ws();
        if (p.pos >= content.size()) break;
        char c = content[p.pos];
        if (c == '/' || c == '(' || c == '<' || c == '[' || c == '+' || c == '-' || c == '.' ||
            std::isdigit(static_cast<unsigned char>(c))) {
            try {
                operands.push_back(p.parse_value());
            } catch (const ExtractionError&) {
                ++p.pos;
                operands.clear();
            }
            continue;
        }
        // operator token
        size_t start = p.pos;
        while (p.pos < content.size() &&
               !std::isspace(static_cast<unsigned char>(content[p.pos])) &&
               content[p.pos] != '/' && content[p.pos] != '(' && content[p.pos] != '[' &&
               content[p.pos] != '<')
            ++p.pos;
        std::string op(content.substr(start, p.pos - start));

        if (op == "Tj" || op == "'" || op == "\"") {
            if (op != "Tj") append_line_break(out);
            if (!operands.empty() && operands.back().kind == PdfObj::Kind::String)
                out += operands.back().text;
        } else if (op == "TJ") {
            if (!operands.empty() && operands.back().kind == PdfObj::Kind::Array) {
                for (const auto& el : operands.back().array) {
                    if (el.kind == PdfObj::Kind::String) out += el.text;
                    else if (el.kind == PdfObj::Kind::Number && el.number < -200 &&
                             !out.empty() && out.back() != ' ' && out.back() != '\n')
                        out.push_back(' '); // large kern gap reads as a space
                }
            }
        } else if (op == "Td" || op == "TD" || op == "T*" || op == "Tm") {
            append_line_break(out);
        }
        operands.clear();
    }
}

} // namespace

PdfTextResult extract_pdf_text(std::string_view pdf_bytes) {
    Document doc(pdf_bytes);
    if (doc.encrypted()) throw ExtractionError("document is encrypted; no text extraction");
    if (doc.objects().empty()) throw ExtractionError("no objects found in PDF");

    PdfTextResult result;

    // Page order: walk the catalog's page tree; fall back to file order when
    // the tree is absent or broken.
    std::vector<const IndirectObject*> pages;
    std::set<int> visited;
    auto collect = [&](auto&& self, const PdfObj* node_ref) -> void {
        int num = node_ref && node_ref->kind == PdfObj::Kind::Ref ? node_ref->ref_num : -1;
        const PdfObj* node = doc.resolve(node_ref);
        if (!node || node->kind != PdfObj::Kind::Dict) return;
        const PdfObj* type = node->find("Type");
        if (type && type->is_name("Page")) {
            if (num >= 0 && visited.insert(num).second) pages.push_back(doc.object(num));
            return;
        }
        if (const PdfObj* kids = doc.resolve(node->find("Kids"))) {
            if (kids->kind == PdfObj::Kind::Array)
                for (const auto& kid : kids->array) self(self, &kid);
        }
    };

    const PdfObj* catalog = doc.resolve(doc.root());
    if (!catalog) {
        for (const auto& [num, obj] : doc.objects()) {
            const PdfObj* type = obj.value.find("Type");
            if (type && type->is_name("Catalog")) {
                catalog = &obj.value;
                break;
            }
        }
    }
    if (catalog) collect(collect, catalog->find("Pages"));
    if (pages.empty()) {
        for (const auto& [num, obj] : doc.objects()) {
            const PdfObj* type = obj.value.find("Type");
            if (type && type->is_name("Page")) pages.push_back(&obj);
        }
    }
    if (pages.empty()) throw ExtractionError("PDF has no pages");
    result.page_count = int(pages.size());

    auto decode_stream = [&](const IndirectObject& obj) -> std::string {
        if (!obj.has_stream) return "";
        const PdfObj* filter = doc.resolve(obj.value.find("Filter"));
        if (!filter) return obj.stream;
        auto is_flate = [](const PdfObj& f) { return f.is_name("FlateDecode"); };
        if (filter->kind == PdfObj::Kind::Name) {
            if (is_flate(*filter)) return zlib_inflate(obj.stream);
            throw ExtractionError("unsupported stream filter /" + filter->text);
        }
        if (filter->kind == PdfObj::Kind::Array) {
            std::string data = obj.stream;
            for (const auto& f : filter->array) {
                if (!is_flate(f))
                    throw ExtractionError("unsupported stream filter /" + f.text);
                data = zlib_inflate(data);
            }
            return data;
        }
        return obj.stream;
    };

    std::string text;
    for (const IndirectObject* page : pages) {
        std::string page_text;
        const PdfObj* contents = page->value.find("Contents");
        std::vector<const PdfObj*> parts;
        const PdfObj* resolved = doc.resolve(contents);
        if (resolved && resolved->kind == PdfObj::Kind::Array) {
            for (const auto& el : resolved->array) parts.push_back(&el);
        } else if (contents) {
            parts.push_back(contents);
        }
        for (const PdfObj* part : parts) {
            // locate the indirect object that owns the stream
            const IndirectObject* holder = nullptr;
            if (part->kind == PdfObj::Kind::Ref) holder = doc.object(part->ref_num);
            if (holder && holder->has_stream)
                extract_from_content(decode_stream(*holder), page_text);
        }
        while (!page_text.empty() && page_text.back() == '\n') page_text.pop_back();
        if (!text.empty()) text.push_back('\n');
        text += page_text;
    }
    while (!text.empty() && text.back() == '\n') text.pop_back();

    result.text = text;
    if (text.empty())
        result.warnings.push_back("document yielded no text (image-only or empty pages)");
    return result;
}

} // namespace aetrace
