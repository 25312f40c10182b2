// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/pdf/document.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace safepdf::extract {

using pdf::RecoveryNote;

enum class EntryKind { DocumentOpen, PageAction, NamedScript, FieldAction, AnnotationAction, XfaEvent };
enum class TextEncoding { Literal, HexUtf16BE, HexLatin, Utf8, PdfDocEncoding };
enum class Container { LiteralString, HexString, Stream };

std::string_view entry_kind_name(EntryKind kind);
std::string_view encoding_name(TextEncoding encoding);

struct ScriptOrigin {
    std::optional<uint32_t> object_number;
    // key path from the trailer, e.g. /Root/OpenAction/JS
    std::string path;
};

struct ExtractedScript {
    std::string source_text; // UTF-8
    EntryKind entry_kind = EntryKind::DocumentOpen;
    std::string event; // event name for handler kinds, name-tree key for NamedScript
    ScriptOrigin origin;
    TextEncoding encoding_used = TextEncoding::Literal;
};

struct XfaNode {
    std::string name;
    std::vector<XfaNode> children;
    std::vector<ExtractedScript> scripts;
    std::optional<std::string> field_kind;
};

// A /JS entry whose value is neither a string nor a stream.
struct InvalidScript {
    ScriptOrigin origin;
    std::string kind;
};

struct AnalysisUnit {
    std::vector<ExtractedScript> preamble;
    std::vector<ExtractedScript> handlers;
    std::optional<XfaNode> xfa_tree;
    std::vector<InvalidScript> invalid_scripts;
    // Non-JavaScript actions seen while walking (recorded, not analyzed).
    std::vector<std::string> other_actions;
    std::vector<RecoveryNote> notes;

    size_t script_count() const { return preamble.size() + handlers.size(); }
};

struct DecodedText {
    std::string text; // UTF-8
    TextEncoding encoding = TextEncoding::Literal;
    std::vector<RecoveryNote> notes;
};

// `raw` is the literal payload with escapes unresolved, the hex digits, or
// the decoded stream bytes, matching `container`.
DecodedText decode_text_string(std::string_view raw, Container container);

// Inverse of decode_text_string: the raw payload for `encoding`'s container.
// Code points without a PDFDocEncoding byte make the Literal, HexLatin and
// PdfDocEncoding modes return nullopt.
std::optional<std::string> encode_text_string(std::string_view utf8, TextEncoding encoding);
Container container_for(TextEncoding encoding);

// PDFDocEncoding byte to code point; U+FFFD where the encoding leaves it undefined.
char32_t pdfdoc_code_point(unsigned char byte);

void append_utf8(std::string& out, char32_t cp);

AnalysisUnit extract_scripts(pdf::Document const& doc);

// Lenient XML reading of an XFA packet. Throws ExtractionError when no
// element can be recovered from non-empty input.
XfaNode parse_xfa(std::string_view xml, std::vector<RecoveryNote>& notes);

}
