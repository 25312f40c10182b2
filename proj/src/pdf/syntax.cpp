// SPDX-License-Identifier: Apache-2.0
#include "safepdf/pdf/syntax.hpp"

#include <cmath>
#include <cstring>

namespace safepdf::pdf {

bool is_pdf_whitespace(unsigned char c)
{
    return c == 0 || c == '\t' || c == '\n' || c == '\f' || c == '\r' || c == ' ';
}

bool is_pdf_delimiter(unsigned char c)
{
    return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' || c == '}' || c == '/'
        || c == '%';
}

int Tokenizer::skip_space()
{
    int comments = 0;
    while (m_pos < m_data.size()) {
        unsigned char c = m_data[m_pos];
        if (is_pdf_whitespace(c)) {
            ++m_pos;
        } else if (c == '%') {
            ++comments;
            while (m_pos < m_data.size() && m_data[m_pos] != '\n' && m_data[m_pos] != '\r')
                ++m_pos;
        } else {
            break;
        }
    }
    m_comments += comments;
    return comments;
}

static bool parse_number_text(std::string_view text, double& out, bool& integral)
{
    if (text.empty())
        return false;
    size_t i = 0;
    bool negative = false;
    // Repeated signs ("--5") show up in broken writers; the last one wins.
    while (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        negative = text[i] == '-' ? !negative : negative;
        ++i;
    }
    bool digits = false;
    bool dot = false;
    double value = 0;
    double scale = 1;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c >= '0' && c <= '9') {
            digits = true;
            if (dot) {
                scale /= 10;
                value += (c - '0') * scale;
            } else {
                value = value * 10 + (c - '0');
            }
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            return false;
        }
    }
    if (!digits)
        return false;
    out = negative ? -value : value;
    integral = !dot;
    return true;
}

Token Tokenizer::next()
{
    skip_space();
    Token tok;
    tok.start = m_pos;
    if (m_pos >= m_data.size()) {
        tok.type = TokenType::Eof;
        tok.end = m_pos;
        return tok;
    }
    unsigned char c = m_data[m_pos];
    switch (c) {
    case '(': return lex_literal_string(m_pos);
    case '<':
        if (m_pos + 1 < m_data.size() && m_data[m_pos + 1] == '<') {
            m_pos += 2;
            tok.type = TokenType::DictOpen;
            tok.end = m_pos;
            return tok;
        }
        return lex_hex_string(m_pos);
    case '>':
        if (m_pos + 1 < m_data.size() && m_data[m_pos + 1] == '>') {
            m_pos += 2;
            tok.type = TokenType::DictClose;
        } else {
            // stray '>' is treated as a one-character keyword
            ++m_pos;
            tok.type = TokenType::Keyword;
            tok.text = ">";
        }
        tok.end = m_pos;
        return tok;
    case '[':
        ++m_pos;
        tok.type = TokenType::ArrayOpen;
        tok.end = m_pos;
        return tok;
    case ']':
        ++m_pos;
        tok.type = TokenType::ArrayClose;
        tok.end = m_pos;
        return tok;
    case '/': return lex_name(m_pos);
    case '{':
    case '}':
    case ')':
        ++m_pos;
        tok.type = TokenType::Keyword;
        tok.text = std::string(1, static_cast<char>(c));
        tok.end = m_pos;
        return tok;
    default: break;
    }
    size_t start = m_pos;
    while (m_pos < m_data.size() && is_pdf_regular(static_cast<unsigned char>(m_data[m_pos])))
        ++m_pos;
    std::string_view text = m_data.substr(start, m_pos - start);
    tok.end = m_pos;
    double value = 0;
    bool integral = false;
    if (parse_number_text(text, value, integral)) {
        tok.type = integral ? TokenType::Integer : TokenType::Number;
        tok.number = value;
        tok.text = std::string(text);
        return tok;
    }
    tok.type = TokenType::Keyword;
    tok.text = std::string(text);
    return tok;
}

Token Tokenizer::peek()
{
    size_t saved = m_pos;
    int saved_comments = m_comments;
    Token t = next();
    m_pos = saved;
    m_comments = saved_comments;
    return t;
}

Token Tokenizer::lex_literal_string(size_t start)
{
    Token tok;
    tok.type = TokenType::LiteralString;
    tok.start = start;
    size_t i = start + 1;
    int depth = 1;
    while (i < m_data.size()) {
        char c = m_data[i];
        if (c == '\\') {
            i += 2;
            continue;
        }
        if (c == '(')
            ++depth;
        else if (c == ')' && --depth == 0)
            break;
        ++i;
    }
    size_t content_end = i < m_data.size() ? i : m_data.size();
    tok.text = std::string(m_data.substr(start + 1, content_end - start - 1));
    m_pos = i < m_data.size() ? i + 1 : m_data.size();
    tok.end = m_pos;
    return tok;
}

Token Tokenizer::lex_hex_string(size_t start)
{
    Token tok;
    tok.type = TokenType::HexString;
    tok.start = start;
    size_t i = start + 1;
    while (i < m_data.size() && m_data[i] != '>')
        ++i;
    tok.text = std::string(m_data.substr(start + 1, (i < m_data.size() ? i : m_data.size()) - start - 1));
    m_pos = i < m_data.size() ? i + 1 : m_data.size();
    tok.end = m_pos;
    return tok;
}

static int hex_digit(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

Token Tokenizer::lex_name(size_t start)
{
    Token tok;
    tok.type = TokenType::Name;
    tok.start = start;
    size_t i = start + 1;
    std::string name;
    while (i < m_data.size() && is_pdf_regular(static_cast<unsigned char>(m_data[i]))) {
        char c = m_data[i];
        if (c == '#' && i + 2 < m_data.size() && hex_digit(m_data[i + 1]) >= 0 && hex_digit(m_data[i + 2]) >= 0) {
            name.push_back(static_cast<char>(hex_digit(m_data[i + 1]) * 16 + hex_digit(m_data[i + 2])));
            i += 3;
            continue;
        }
        name.push_back(c);
        ++i;
    }
    tok.text = std::move(name);
    m_pos = i;
    tok.end = i;
    return tok;
}

std::optional<Object> ObjectParser::parse_direct(size_t& pos)
{
    Tokenizer tok(m_data, pos);
    Token first = tok.next();
    if (first.type == TokenType::Eof)
        return std::nullopt;
    auto obj = parse_value(tok, std::move(first), 0);
    pos = tok.pos();
    return obj;
}

std::optional<Object> ObjectParser::parse_value(Tokenizer& tok, Token first, int depth)
{
    if (depth > max_depth) {
        m_notes.push_back({ RecoveryKind::NestingTooDeep, first.start, "nesting depth limit" });
        return Object::null();
    }
    switch (first.type) {
    case TokenType::Eof: return std::nullopt;
    case TokenType::Integer: {
        // "N G R" reference lookahead
        size_t saved = tok.pos();
        Token second = tok.next();
        if (second.type == TokenType::Integer && first.number >= 0 && second.number >= 0) {
            Token third = tok.next();
            if (third.type == TokenType::Keyword && third.text == "R") {
                ObjectRef ref { static_cast<uint32_t>(std::min(first.number, 4294967295.0)),
                                static_cast<uint32_t>(std::min(second.number, 65535.0)) };
                return Object::reference(ref);
            }
        }
        tok.seek(saved);
        return Object::number(first.number);
    }
    case TokenType::Number: return Object::number(first.number);
    case TokenType::LiteralString: return Object::literal_string(std::move(first.text));
    case TokenType::HexString: return Object::hex_string(std::move(first.text));
    case TokenType::Name: return Object::name(std::move(first.text));
    case TokenType::ArrayOpen: {
        Array items;
        int comments_before = tok.comments_seen();
        while (true) {
            Token t = tok.next();
            if (t.type == TokenType::ArrayClose || t.type == TokenType::Eof)
                break;
            if (t.type == TokenType::DictClose || (t.type == TokenType::Keyword && (t.text == "endobj" || t.text == "stream"))) {
                // unterminated array: stop at the enclosing construct
                tok.seek(t.start);
                break;
            }
            auto v = parse_value(tok, std::move(t), depth + 1);
            if (!v)
                break;
            items.push_back(std::move(*v));
        }
        if (tok.comments_seen() > comments_before)
            m_notes.push_back({ RecoveryKind::CommentInDictionary, first.start, "comment in array" });
        return Object::array(std::move(items));
    }
    case TokenType::DictOpen: {
        Dictionary dict;
        int comments_before = tok.comments_seen();
        while (true) {
            Token key = tok.next();
            if (key.type == TokenType::DictClose || key.type == TokenType::Eof)
                break;
            if (key.type == TokenType::Keyword && (key.text == "endobj" || key.text == "stream" || key.text == "obj")) {
                tok.seek(key.start);
                break;
            }
            if (key.type != TokenType::Name) {
                // junk where a key is expected is skipped
                continue;
            }
            Token value_tok = tok.next();
            if (value_tok.type == TokenType::DictClose) {
                dict.set(std::move(key.text), Object::null());
                break;
            }
            auto value = parse_value(tok, std::move(value_tok), depth + 1);
            if (!value)
                break;
            dict.set(std::move(key.text), std::move(*value));
        }
        if (tok.comments_seen() > comments_before)
            m_notes.push_back({ RecoveryKind::CommentInDictionary, first.start, "comment in dictionary" });
        return Object::dictionary(std::move(dict));
    }
    case TokenType::ArrayClose:
    case TokenType::DictClose: return Object::null();
    case TokenType::Keyword:
        if (first.text == "true")
            return Object::boolean(true);
        if (first.text == "false")
            return Object::boolean(false);
        if (first.text == "null")
            return Object::null();
        // unknown keywords in value position decay to null
        return Object::null();
    }
    return std::nullopt;
}

static bool starts_with_at(std::string_view data, size_t pos, std::string_view what)
{
    return pos <= data.size() && data.substr(pos, what.size()) == what;
}

Object ObjectParser::parse_stream_body(Tokenizer& tok, Dictionary dict, size_t stream_kw_end)
{
    size_t data_start = stream_kw_end;
    // spaces before the EOL are tolerated
    while (data_start < m_data.size() && (m_data[data_start] == ' ' || m_data[data_start] == '\t'))
        ++data_start;
    if (starts_with_at(m_data, data_start, "\r\n"))
        data_start += 2;
    else if (data_start < m_data.size() && (m_data[data_start] == '\n' || m_data[data_start] == '\r'))
        ++data_start;

    auto is_ws = [](char c) { return is_pdf_whitespace(static_cast<unsigned char>(c)); };

    std::optional<size_t> data_end;
    size_t resume = 0;
    auto const& length_obj = dict.get("Length");
    if (length_obj.is_number()) {
        int64_t length = length_obj.as_int(-1);
        if (length >= 0 && data_start + static_cast<uint64_t>(length) <= m_data.size()) {
            size_t candidate = data_start + static_cast<size_t>(length);
            size_t p = candidate;
            while (p < m_data.size() && is_ws(m_data[p]))
                ++p;
            if (starts_with_at(m_data, p, "endstream")) {
                data_end = candidate;
                resume = p + 9;
                size_t gap = p - candidate;
                bool single_eol = gap == 0 || (gap == 1 && (m_data[candidate] == '\n' || m_data[candidate] == '\r'))
                    || (gap == 2 && m_data.substr(candidate, 2) == "\r\n");
                if (!single_eol)
                    m_notes.push_back({ RecoveryKind::TrailingWhitespaceInStream, candidate, "whitespace before endstream" });
            }
        }
    }
    if (!data_end) {
        size_t found = m_data.find("endstream", data_start);
        if (found != std::string_view::npos) {
            resume = found + 9;
            size_t end = found;
            size_t stripped = 0;
            while (end > data_start && is_ws(m_data[end - 1])) {
                --end;
                ++stripped;
            }
            // keep data bytes that happen to be whitespace when only one EOL precedes endstream
            if (stripped <= 2) {
                end = found;
                if (end > data_start && m_data[end - 1] == '\n')
                    --end;
                if (end > data_start && m_data[end - 1] == '\r')
                    --end;
            } else {
                m_notes.push_back({ RecoveryKind::TrailingWhitespaceInStream, end, "whitespace before endstream" });
            }
            data_end = end;
            if (length_obj.is_number())
                m_notes.push_back({ RecoveryKind::BadStreamLength, data_start, "stream /Length does not match data" });
        } else {
            size_t endobj = m_data.find("endobj", data_start);
            data_end = endobj == std::string_view::npos ? m_data.size() : endobj;
            resume = *data_end;
            m_notes.push_back({ RecoveryKind::MissingEndstream, data_start, "stream without endstream" });
        }
    }
    std::string data(m_data.substr(data_start, *data_end - data_start));
    tok.seek(resume);
    return Object::stream(std::move(dict), std::move(data));
}

std::optional<IndirectObject> ObjectParser::parse_indirect(size_t pos)
{
    Tokenizer tok(m_data, pos);
    Token num = tok.next();
    if (num.type != TokenType::Integer || num.number < 0)
        return std::nullopt;
    Token gen = tok.next();
    if (gen.type != TokenType::Integer || gen.number < 0)
        return std::nullopt;
    Token kw = tok.next();
    if (kw.type != TokenType::Keyword || !kw.text.starts_with("obj"))
        return std::nullopt;
    if (kw.text != "obj")
        m_notes.push_back({ RecoveryKind::InvalidObjectKeyword, kw.start, "object keyword '" + kw.text + "'" });

    IndirectObject result;
    result.ref = { static_cast<uint32_t>(std::min(num.number, 4294967295.0)),
                   static_cast<uint32_t>(std::min(gen.number, 65535.0)) };
    result.start = num.start;

    Token first = tok.next();
    if (first.type == TokenType::Keyword && first.text.starts_with("endobj")) {
        result.object = Object::null();
        result.end = first.end;
        return result;
    }
    auto value = parse_value(tok, std::move(first), 0);
    result.object = value ? std::move(*value) : Object::null();

    size_t after_value = tok.pos();
    Token next = tok.next();
    if (result.object.is_dictionary() && next.type == TokenType::Keyword && next.text == "stream") {
        result.object = parse_stream_body(tok, result.object.as_dictionary(), next.end);
        after_value = tok.pos();
        next = tok.next();
    }
    if (next.type == TokenType::Keyword && next.text == "endobj") {
        result.end = next.end;
        return result;
    }
    if (next.type == TokenType::Keyword && next.text.starts_with("endobj")) {
        m_notes.push_back({ RecoveryKind::InvalidObjectKeyword, next.start, "end keyword '" + next.text + "'" });
        result.end = next.end;
        return result;
    }
    // missing or misspelled endobj: the object ends after its value
    m_notes.push_back({ RecoveryKind::InvalidObjectKeyword, after_value,
                        next.type == TokenType::Keyword ? "end keyword '" + next.text + "'" : "missing endobj" });
    if (next.type == TokenType::Keyword && next.text != "endstream" && next.text != "xref" && next.text != "trailer"
        && next.text != "startxref")
        result.end = next.end;
    else
        result.end = after_value;
    return result;
}

std::vector<IndirectObject> parse_object_stream(std::string_view decoded, Dictionary const& dict,
                                                std::vector<RecoveryNote>& notes)
{
    std::vector<IndirectObject> out;
    int64_t count = dict.get("N").as_int(0);
    int64_t first = dict.get("First").as_int(-1);
    if (count <= 0 || count > 1000000)
        return out;
    Tokenizer tok(decoded);
    std::vector<std::pair<uint32_t, int64_t>> header;
    for (int64_t i = 0; i < count; ++i) {
        Token n = tok.next();
        Token off = tok.next();
        if (n.type != TokenType::Integer || off.type != TokenType::Integer)
            break;
        header.emplace_back(static_cast<uint32_t>(n.number), static_cast<int64_t>(off.number));
    }
    if (first < 0 || static_cast<size_t>(first) > decoded.size()) {
        notes.push_back({ RecoveryKind::ObjectStreamError, 0, "bad /First in object stream" });
        first = static_cast<int64_t>(tok.pos());
    }
    ObjectParser parser(decoded, notes);
    size_t sequential = static_cast<size_t>(first);
    for (auto const& [number, offset] : header) {
        size_t pos = static_cast<size_t>(first + offset);
        std::optional<Object> obj;
        if (offset >= 0 && pos < decoded.size()) {
            size_t p = pos;
            obj = parser.parse_direct(p);
            sequential = p;
        }
        if (!obj) {
            notes.push_back({ RecoveryKind::ObjectStreamError, pos, "bad offset in object stream" });
            size_t p = sequential;
            obj = parser.parse_direct(p);
            sequential = p;
        }
        if (!obj)
            break;
        out.push_back({ ObjectRef { number, 0 }, std::move(*obj), pos, pos });
    }
    return out;
}

}
