// SPDX-License-Identifier: Apache-2.0
#include "safepdf/extract/extract.hpp"

#include "safepdf/pdf/object.hpp"

namespace safepdf::extract {

namespace {

constexpr char32_t replacement = 0xFFFD;

// 0x18-0x1F
constexpr char32_t low_table[8] = { 0x02D8, 0x02C7, 0x02C6, 0x02D9, 0x02DD, 0x02DB, 0x02DA, 0x02DC };
// 0x80-0xA0
constexpr char32_t high_table[33] = {
    0x2022, 0x2020, 0x2021, 0x2026, 0x2014, 0x2013, 0x0192, 0x2044, 0x2039, 0x203A, 0x2212,
    0x2030, 0x201E, 0x201C, 0x201D, 0x2018, 0x2019, 0x201A, 0x2122, 0xFB01, 0xFB02, 0x0141,
    0x0152, 0x0160, 0x0178, 0x017D, 0x0131, 0x0142, 0x0153, 0x0161, 0x017E, replacement, 0x20AC,
};

}

char32_t pdfdoc_code_point(unsigned char byte)
{
    if (byte >= 0x18 && byte <= 0x1f)
        return low_table[byte - 0x18];
    if (byte >= 0x80 && byte <= 0xa0)
        return high_table[byte - 0x80];
    if (byte == 0x7f || byte == 0xad)
        return replacement;
    return byte;
}

void append_utf8(std::string& out, char32_t cp)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

static size_t decode_utf16be(std::string_view bytes, std::string& out)
{
    size_t bad = 0;
    size_t i = 0;
    auto unit = [&](size_t at) {
        return static_cast<char16_t>((static_cast<unsigned char>(bytes[at]) << 8) | static_cast<unsigned char>(bytes[at + 1]));
    };
    for (; i + 1 < bytes.size(); i += 2) {
        char16_t u = unit(i);
        if (u >= 0xD800 && u <= 0xDBFF) {
            if (i + 3 < bytes.size()) {
                char16_t low = unit(i + 2);
                if (low >= 0xDC00 && low <= 0xDFFF) {
                    append_utf8(out, 0x10000 + ((static_cast<char32_t>(u) - 0xD800) << 10) + (low - 0xDC00));
                    i += 2;
                    continue;
                }
            }
            append_utf8(out, replacement);
            ++bad;
        } else if (u >= 0xDC00 && u <= 0xDFFF) {
            append_utf8(out, replacement);
            ++bad;
        } else {
            append_utf8(out, u);
        }
    }
    if (i < bytes.size()) {
        append_utf8(out, replacement);
        ++bad;
    }
    return bad;
}

static size_t decode_utf8(std::string_view bytes, std::string& out)
{
    size_t bad = 0;
    size_t i = 0;
    while (i < bytes.size()) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        int len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : (c >> 3) == 30 ? 4 : 0;
        char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
        bool ok = len > 0 && i + static_cast<size_t>(len) <= bytes.size();
        for (int k = 1; ok && k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(bytes[i + static_cast<size_t>(k)]);
            ok = (cc & 0xC0) == 0x80;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (ok) {
            char32_t min = len == 2 ? 0x80 : len == 3 ? 0x800 : len == 4 ? 0x10000 : 0;
            ok = cp >= min && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
        }
        if (!ok) {
            append_utf8(out, replacement);
            ++bad;
            ++i;
            continue;
        }
        append_utf8(out, cp);
        i += static_cast<size_t>(len);
    }
    return bad;
}

DecodedText decode_text_string(std::string_view raw, Container container)
{
    DecodedText result;
    std::string bytes;
    switch (container) {
    case Container::LiteralString: bytes = pdf::unescape_literal(raw); break;
    case Container::HexString: bytes = pdf::decode_hex(raw); break;
    case Container::Stream: bytes = std::string(raw); break;
    }
    size_t bad = 0;
    std::string_view view(bytes);
    if (view.size() >= 2 && static_cast<unsigned char>(view[0]) == 0xFE && static_cast<unsigned char>(view[1]) == 0xFF) {
        result.encoding = TextEncoding::HexUtf16BE;
        bad = decode_utf16be(view.substr(2), result.text);
    } else if (view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") {
        result.encoding = TextEncoding::Utf8;
        bad = decode_utf8(view.substr(3), result.text);
    } else {
        result.encoding = container == Container::LiteralString ? TextEncoding::Literal
            : container == Container::HexString                 ? TextEncoding::HexLatin
                                                                : TextEncoding::PdfDocEncoding;
        for (unsigned char c : view) {
            char32_t cp = pdfdoc_code_point(c);
            if (cp == replacement)
                ++bad;
            append_utf8(result.text, cp);
        }
    }
    if (bad > 0)
        result.notes.push_back({ pdf::RecoveryKind::TextDecodeError, 0,
                                 std::to_string(bad) + " undecodable code units replaced" });
    return result;
}

std::string_view entry_kind_name(EntryKind kind)
{
    switch (kind) {
    case EntryKind::DocumentOpen: return "DocumentOpen";
    case EntryKind::PageAction: return "PageAction";
    case EntryKind::NamedScript: return "NamedScript";
    case EntryKind::FieldAction: return "FieldAction";
    case EntryKind::AnnotationAction: return "AnnotationAction";
    case EntryKind::XfaEvent: return "XfaEvent";
    }
    return "Unknown";
}

std::string_view encoding_name(TextEncoding encoding)
{
    switch (encoding) {
    case TextEncoding::Literal: return "Literal";
    case TextEncoding::HexUtf16BE: return "HexUtf16BE";
    case TextEncoding::HexLatin: return "HexLatin";
    case TextEncoding::Utf8: return "Utf8";
    case TextEncoding::PdfDocEncoding: return "PdfDocEncoding";
    }
    return "Unknown";
}

static std::vector<char32_t> utf8_code_points(std::string_view utf8)
{
    std::string decoded;
    decode_utf8(utf8, decoded);
    std::vector<char32_t> out;
    for (size_t i = 0; i < decoded.size();) {
        unsigned char c = static_cast<unsigned char>(decoded[i]);
        int len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : 4;
        char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
        for (int k = 1; k < len; ++k)
            cp = (cp << 6) | (static_cast<unsigned char>(decoded[i + static_cast<size_t>(k)]) & 0x3F);
        out.push_back(cp);
        i += static_cast<size_t>(len);
    }
    return out;
}

static std::optional<unsigned char> pdfdoc_byte(char32_t cp)
{
    for (int b = 0; b < 256; ++b) {
        if (pdfdoc_code_point(static_cast<unsigned char>(b)) == cp && cp != replacement)
            return static_cast<unsigned char>(b);
    }
    return std::nullopt;
}

Container container_for(TextEncoding encoding)
{
    switch (encoding) {
    case TextEncoding::Literal: return Container::LiteralString;
    case TextEncoding::HexUtf16BE:
    case TextEncoding::HexLatin: return Container::HexString;
    case TextEncoding::Utf8:
    case TextEncoding::PdfDocEncoding: return Container::Stream;
    }
    return Container::Stream;
}

std::optional<std::string> encode_text_string(std::string_view utf8, TextEncoding encoding)
{
    auto cps = utf8_code_points(utf8);
    std::string bytes;
    switch (encoding) {
    case TextEncoding::HexUtf16BE: {
        bytes = "\xFE\xFF";
        auto unit = [&](char32_t u) {
            bytes.push_back(static_cast<char>((u >> 8) & 0xff));
            bytes.push_back(static_cast<char>(u & 0xff));
        };
        for (char32_t cp : cps) {
            if (cp >= 0x10000) {
                unit(0xD800 + ((cp - 0x10000) >> 10));
                unit(0xDC00 + ((cp - 0x10000) & 0x3FF));
            } else {
                unit(cp);
            }
        }
        return pdf::encode_hex(bytes);
    }
    case TextEncoding::Utf8: {
        std::string out = "\xEF\xBB\xBF";
        for (char32_t cp : cps)
            append_utf8(out, cp);
        return out;
    }
    case TextEncoding::Literal:
    case TextEncoding::HexLatin:
    case TextEncoding::PdfDocEncoding:
        for (char32_t cp : cps) {
            auto b = pdfdoc_byte(cp);
            if (!b)
                return std::nullopt;
            bytes.push_back(static_cast<char>(*b));
        }
        // a leading BOM-like byte pair would change the decoding
        if (bytes.starts_with("\xFE\xFF") || bytes.starts_with("\xEF\xBB\xBF"))
            return std::nullopt;
        if (encoding == TextEncoding::Literal)
            return pdf::escape_literal(bytes);
        if (encoding == TextEncoding::HexLatin)
            return pdf::encode_hex(bytes);
        return bytes;
    }
    return std::nullopt;
}

}
