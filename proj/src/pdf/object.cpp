// SPDX-License-Identifier: Apache-2.0
#include "safepdf/pdf/object.hpp"

#include <cmath>
#include <stdexcept>

namespace safepdf::pdf {

std::string_view kind_name(ObjectKind kind)
{
    switch (kind) {
    case ObjectKind::Null: return "null";
    case ObjectKind::Boolean: return "boolean";
    case ObjectKind::Number: return "number";
    case ObjectKind::LiteralString: return "literal-string";
    case ObjectKind::HexString: return "hex-string";
    case ObjectKind::Name: return "name";
    case ObjectKind::Array: return "array";
    case ObjectKind::Dictionary: return "dictionary";
    case ObjectKind::Stream: return "stream";
    case ObjectKind::Reference: return "reference";
    }
    return "?";
}

Object Object::boolean(bool value) { return Object(Value(std::in_place_index<1>, value)); }
Object Object::number(double value) { return Object(Value(std::in_place_index<2>, value)); }
Object Object::literal_string(std::string raw)
{
    return Object(Value(std::in_place_index<3>, StringPayload { std::move(raw) }));
}
Object Object::hex_string(std::string raw)
{
    return Object(Value(std::in_place_index<4>, StringPayload { std::move(raw) }));
}
Object Object::name(std::string name) { return Object(Value(std::in_place_index<5>, NamePayload { std::move(name) })); }
Object Object::array(Array items)
{
    return Object(Value(std::in_place_index<6>, std::make_shared<const Array>(std::move(items))));
}
Object Object::dictionary(Dictionary dict)
{
    return Object(Value(std::in_place_index<7>, std::make_shared<const Dictionary>(std::move(dict))));
}
Object Object::stream(Dictionary dict, std::string data)
{
    return Object(Value(std::in_place_index<8>,
                        std::make_shared<const StreamPayload>(StreamPayload { std::move(dict), std::move(data) })));
}
Object Object::reference(ObjectRef ref) { return Object(Value(std::in_place_index<9>, ref)); }

bool Object::as_bool() const
{
    if (kind() != ObjectKind::Boolean)
        return false;
    return std::get<1>(m_value);
}

double Object::as_number() const
{
    if (kind() != ObjectKind::Number)
        return 0;
    return std::get<2>(m_value);
}

int64_t Object::as_int(int64_t fallback) const
{
    if (kind() != ObjectKind::Number)
        return fallback;
    double v = std::get<2>(m_value);
    if (!std::isfinite(v) || std::fabs(v) > 9e15)
        return fallback;
    return static_cast<int64_t>(v);
}

const std::string& Object::raw_string() const
{
    if (kind() == ObjectKind::LiteralString)
        return std::get<3>(m_value).raw;
    if (kind() == ObjectKind::HexString)
        return std::get<4>(m_value).raw;
    static const std::string empty;
    return empty;
}

const std::string& Object::as_name() const
{
    if (kind() == ObjectKind::Name)
        return std::get<5>(m_value).name;
    static const std::string empty;
    return empty;
}

const Array& Object::as_array() const
{
    if (kind() == ObjectKind::Array)
        return *std::get<6>(m_value);
    static const Array empty;
    return empty;
}

const Dictionary& Object::as_dictionary() const
{
    if (kind() == ObjectKind::Dictionary)
        return *std::get<7>(m_value);
    static const Dictionary empty;
    return empty;
}

const Dictionary& Object::dict() const
{
    if (kind() == ObjectKind::Stream)
        return std::get<8>(m_value)->dict;
    return as_dictionary();
}

const std::string& Object::stream_data() const
{
    if (kind() == ObjectKind::Stream)
        return std::get<8>(m_value)->data;
    static const std::string empty;
    return empty;
}

ObjectRef Object::as_reference() const
{
    if (kind() == ObjectKind::Reference)
        return std::get<9>(m_value);
    return {};
}

std::string Object::string_bytes() const
{
    if (kind() == ObjectKind::LiteralString)
        return unescape_literal(raw_string());
    if (kind() == ObjectKind::HexString)
        return decode_hex(raw_string());
    return {};
}

bool Object::operator==(const Object& other) const
{
    if (kind() != other.kind())
        return false;
    switch (kind()) {
    case ObjectKind::Null: return true;
    case ObjectKind::Boolean: return as_bool() == other.as_bool();
    case ObjectKind::Number: return as_number() == other.as_number();
    case ObjectKind::LiteralString:
    case ObjectKind::HexString: return raw_string() == other.raw_string();
    case ObjectKind::Name: return as_name() == other.as_name();
    case ObjectKind::Array: return as_array() == other.as_array();
    case ObjectKind::Dictionary: return as_dictionary() == other.as_dictionary();
    case ObjectKind::Stream: return dict() == other.dict() && stream_data() == other.stream_data();
    case ObjectKind::Reference: return as_reference() == other.as_reference();
    }
    return false;
}

Dictionary::Dictionary(std::initializer_list<Entry> entries)
{
    for (auto const& [k, v] : entries)
        set(k, v);
}

void Dictionary::set(std::string key, Object value)
{
    for (auto& entry : m_entries) {
        if (entry.first == key) {
            entry.second = std::move(value);
            return;
        }
    }
    m_entries.emplace_back(std::move(key), std::move(value));
}

void Dictionary::erase(std::string_view key)
{
    std::erase_if(m_entries, [&](Entry const& e) { return e.first == key; });
}

const Object* Dictionary::find(std::string_view key) const
{
    for (auto const& entry : m_entries)
        if (entry.first == key)
            return &entry.second;
    return nullptr;
}

const Object& Dictionary::get(std::string_view key) const
{
    static const Object null_object;
    auto const* found = find(key);
    return found ? *found : null_object;
}

bool Dictionary::operator==(const Dictionary& other) const
{
    if (size() != other.size())
        return false;
    for (auto const& [k, v] : m_entries) {
        auto const* o = other.find(k);
        if (!o || !(*o == v))
            return false;
    }
    return true;
}

std::string unescape_literal(std::string_view raw)
{
    std::string out;
    out.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\r') {
            // bare CR or CRLF inside a literal both mean LF
            out.push_back('\n');
            if (i + 1 < raw.size() && raw[i + 1] == '\n')
                ++i;
            continue;
        }
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        if (++i >= raw.size())
            break;
        c = raw[i];
        switch (c) {
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '(':
        case ')':
        case '\\': out.push_back(c); break;
        case '\r':
            if (i + 1 < raw.size() && raw[i + 1] == '\n')
                ++i;
            break;
        case '\n': break;
        default:
            if (c >= '0' && c <= '7') {
                int value = c - '0';
                for (int n = 0; n < 2 && i + 1 < raw.size() && raw[i + 1] >= '0' && raw[i + 1] <= '7'; ++n)
                    value = value * 8 + (raw[++i] - '0');
                out.push_back(static_cast<char>(value & 0xff));
            } else {
                // unknown escape: the backslash is ignored
                out.push_back(c);
            }
        }
    }
    return out;
}

std::string escape_literal(std::string_view bytes)
{
    std::string out;
    out.reserve(bytes.size() + 8);
    for (unsigned char c : bytes) {
        if (c == '(' || c == ')' || c == '\\') {
            out.push_back('\\');
            out.push_back(static_cast<char>(c));
        } else if (c < 0x20 || c >= 0x7f) {
            static constexpr char digits[] = "01234567";
            out.push_back('\\');
            out.push_back(digits[(c >> 6) & 7]);
            out.push_back(digits[(c >> 3) & 7]);
            out.push_back(digits[c & 7]);
        } else {
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

static int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

std::string decode_hex(std::string_view raw)
{
    std::string out;
    out.reserve(raw.size() / 2 + 1);
    int pending = -1;
    for (char c : raw) {
        int v = hex_value(c);
        if (v < 0)
            continue;
        if (pending < 0) {
            pending = v;
        } else {
            out.push_back(static_cast<char>((pending << 4) | v));
            pending = -1;
        }
    }
    if (pending >= 0)
        out.push_back(static_cast<char>(pending << 4));
    return out;
}

std::string encode_hex(std::string_view bytes, bool upper)
{
    static constexpr char upper_digits[] = "0123456789ABCDEF";
    static constexpr char lower_digits[] = "0123456789abcdef";
    const char* digits = upper ? upper_digits : lower_digits;
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 15]);
    }
    return out;
}

}
