// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/domain/values.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace safepdf::model {

class ConfigError : public std::runtime_error {
public:
    ConfigError(size_t line, std::string const& message)
        : std::runtime_error("registry line " + std::to_string(line) + ": " + message), m_line(line)
    {
    }
    size_t line() const { return m_line; }

private:
    size_t m_line;
};

// Whitelisted/Vulnerable/EvalLike entries are functions; Value entries are
// data properties; Object entries are plain containers for other paths.
enum class Safety : uint8_t { Whitelisted, Vulnerable, EvalLike, Value, Object };

std::string_view safety_name(Safety s);
bool is_function(Safety s);

// One registry line. `model` is the third column verbatim:
//  - functions: a value template (`⊤Str`, `undef`, ...) or `builtin:<name>`
//  - values: a value template
//  - objects: empty, or flags `summary` and `proto=<path>` separated by commas
// Paths starting with `@` are templates that are not bound as globals; the
// root `this` names the Doc object.
struct ApiEntry {
    std::string path;
    Safety safety = Safety::Value;
    std::string model;

    bool operator==(ApiEntry const&) const = default;
};

class Registry {
public:
    Registry() = default;
    explicit Registry(std::vector<ApiEntry> entries);

    std::vector<ApiEntry> const& entries() const { return m_entries; }
    ApiEntry const* find(std::string_view path) const;
    // Replaces an existing path or appends a new one.
    void set(ApiEntry entry);
    // Stable text identifying the contents, for report fingerprints.
    std::string fingerprint() const;

    bool operator==(Registry const& other) const { return m_entries == other.m_entries; }

private:
    std::vector<ApiEntry> m_entries;
    std::map<std::string, size_t, std::less<>> m_index;
};

// Throws ConfigError on malformed lines, unknown safety levels, duplicate
// paths, unknown built-ins, unparsable templates, or a path whose parent is
// not declared.
Registry parse_registry(std::string_view text);
Registry load_registry_file(std::string const& path);
std::string serialize_registry(Registry const& registry);

std::string_view default_registry_text();
Registry const& default_registry();

// Names accepted after `builtin:`.
std::vector<std::string_view> const& builtin_names();

}
