// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace safepdf::pdf {

enum class ObjectKind {
    Null,
    Boolean,
    Number,
    LiteralString,
    HexString,
    Name,
    Array,
    Dictionary,
    Stream,
    Reference,
};

std::string_view kind_name(ObjectKind kind);

struct ObjectRef {
    uint32_t number = 0;
    uint32_t generation = 0;

    auto operator<=>(const ObjectRef&) const = default;
};

class Object;
class Dictionary;

using Array = std::vector<Object>;

// Raw string payload: the bytes between the delimiters exactly as they appear
// in the file (escapes and hex digits unresolved).
struct StringPayload {
    std::string raw;
};

struct NamePayload {
    std::string name; // without the leading solidus, #xx escapes resolved
};

struct StreamPayload;

class Object {
public:
    Object() = default;

    static Object null() { return {}; }
    static Object boolean(bool value);
    static Object number(double value);
    static Object literal_string(std::string raw);
    static Object hex_string(std::string raw);
    static Object name(std::string name);
    static Object array(Array items);
    static Object dictionary(Dictionary dict);
    static Object stream(Dictionary dict, std::string data);
    static Object reference(ObjectRef ref);

    ObjectKind kind() const { return static_cast<ObjectKind>(m_value.index()); }

    bool is_null() const { return kind() == ObjectKind::Null; }
    bool is_number() const { return kind() == ObjectKind::Number; }
    bool is_string() const { return kind() == ObjectKind::LiteralString || kind() == ObjectKind::HexString; }
    bool is_name() const { return kind() == ObjectKind::Name; }
    bool is_name(std::string_view n) const { return is_name() && as_name() == n; }
    bool is_array() const { return kind() == ObjectKind::Array; }
    bool is_dictionary() const { return kind() == ObjectKind::Dictionary; }
    bool is_stream() const { return kind() == ObjectKind::Stream; }
    bool is_reference() const { return kind() == ObjectKind::Reference; }

    bool as_bool() const;
    double as_number() const;
    // Lenient integer view of a number; non-numbers yield the fallback.
    int64_t as_int(int64_t fallback = 0) const;
    const std::string& raw_string() const;
    const std::string& as_name() const;
    const Array& as_array() const;
    const Dictionary& as_dictionary() const;
    // Stream dictionary; for Dictionary objects returns the dictionary itself.
    const Dictionary& dict() const;
    const std::string& stream_data() const;
    ObjectRef as_reference() const;

    // Escape-resolved bytes of a literal or hex string.
    std::string string_bytes() const;

    bool operator==(const Object& other) const;

private:
    using Value = std::variant<std::monostate,
                               bool,
                               double,
                               StringPayload,
                               StringPayload,
                               NamePayload,
                               std::shared_ptr<const Array>,
                               std::shared_ptr<const Dictionary>,
                               std::shared_ptr<const StreamPayload>,
                               ObjectRef>;
    explicit Object(Value v) : m_value(std::move(v)) { }

    Value m_value;
};

// Insertion-ordered dictionary; a repeated key replaces the earlier value.
class Dictionary {
public:
    using Entry = std::pair<std::string, Object>;

    Dictionary() = default;
    Dictionary(std::initializer_list<Entry> entries);

    void set(std::string key, Object value);
    void erase(std::string_view key);
    const Object* find(std::string_view key) const;
    bool contains(std::string_view key) const { return find(key) != nullptr; }
    // Null object when absent.
    const Object& get(std::string_view key) const;

    const std::vector<Entry>& entries() const { return m_entries; }
    bool empty() const { return m_entries.empty(); }
    size_t size() const { return m_entries.size(); }

    bool operator==(const Dictionary&) const;

private:
    std::vector<Entry> m_entries;
};

struct StreamPayload {
    Dictionary dict;
    std::string data;
};

// Literal-string escape resolution (\n, \ooo, line continuation, ...).
std::string unescape_literal(std::string_view raw);
// Produce a raw literal-string payload that unescapes back to `bytes`.
std::string escape_literal(std::string_view bytes);
// Hex nibble decoding; whitespace skipped, odd final nibble padded with 0.
std::string decode_hex(std::string_view raw);
std::string encode_hex(std::string_view bytes, bool upper = true);

}
