// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/pdf/document.hpp"
#include "safepdf/pdf/object.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace safepdf::pdf {

bool is_pdf_whitespace(unsigned char c);
bool is_pdf_delimiter(unsigned char c);
inline bool is_pdf_regular(unsigned char c) { return !is_pdf_whitespace(c) && !is_pdf_delimiter(c); }

enum class TokenType {
    Eof,
    Number,
    Integer,
    LiteralString,
    HexString,
    Name,
    ArrayOpen,
    ArrayClose,
    DictOpen,
    DictClose,
    Keyword,
};

struct Token {
    TokenType type = TokenType::Eof;
    std::string text; // raw payload for strings, resolved name, keyword text
    double number = 0;
    size_t start = 0;
    size_t end = 0;
};

// Byte-level tokenizer. Comments are skipped and counted so callers can
// record the comment-tolerance recoveries.
class Tokenizer {
public:
    explicit Tokenizer(std::string_view data, size_t pos = 0)
        : m_data(data)
        , m_pos(pos)
    {
    }

    size_t pos() const { return m_pos; }
    void seek(size_t pos) { m_pos = pos < m_data.size() ? pos : m_data.size(); }
    bool at_end() const { return m_pos >= m_data.size(); }
    std::string_view data() const { return m_data; }

    // Returns the number of comments skipped.
    int skip_space();
    Token next();
    Token peek();

    int comments_seen() const { return m_comments; }

private:
    Token lex_literal_string(size_t start);
    Token lex_hex_string(size_t start);
    Token lex_name(size_t start);

    std::string_view m_data;
    size_t m_pos = 0;
    int m_comments = 0;
};

struct IndirectObject {
    ObjectRef ref;
    Object object;
    size_t start = 0;
    size_t end = 0;
};

// Lenient object parser; every tolerated deviation appends to `notes`.
class ObjectParser {
public:
    ObjectParser(std::string_view data, std::vector<RecoveryNote>& notes)
        : m_data(data)
        , m_notes(notes)
    {
    }

    // Parse one direct object at `pos`; updates `pos` to the end.
    std::optional<Object> parse_direct(size_t& pos);
    // Parse "N G obj ... endobj" starting at `pos`.
    std::optional<IndirectObject> parse_indirect(size_t pos);

    static constexpr int max_depth = 256;

private:
    std::optional<Object> parse_value(Tokenizer& tok, Token first, int depth);
    Object parse_stream_body(Tokenizer& tok, Dictionary dict, size_t stream_kw_end);

    std::string_view m_data;
    std::vector<RecoveryNote>& m_notes;
};

// Objects stored in a decoded object stream.
std::vector<IndirectObject> parse_object_stream(std::string_view decoded, Dictionary const& dict,
                                                std::vector<RecoveryNote>& notes);

}
