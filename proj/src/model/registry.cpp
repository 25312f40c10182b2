// SPDX-License-Identifier: Apache-2.0
#include "safepdf/model/registry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace safepdf::model {

extern char const* const default_registry_source;

std::string_view safety_name(Safety s)
{
    switch (s) {
    case Safety::Whitelisted: return "whitelisted";
    case Safety::Vulnerable: return "vulnerable";
    case Safety::EvalLike: return "evallike";
    case Safety::Value: return "value";
    case Safety::Object: return "object";
    }
    return "value";
}

bool is_function(Safety s) { return s == Safety::Whitelisted || s == Safety::Vulnerable || s == Safety::EvalLike; }

Registry::Registry(std::vector<ApiEntry> entries)
{
    for (auto& e : entries)
        set(std::move(e));
}

ApiEntry const* Registry::find(std::string_view path) const
{
    auto it = m_index.find(path);
    return it == m_index.end() ? nullptr : &m_entries[it->second];
}

void Registry::set(ApiEntry entry)
{
    auto it = m_index.find(entry.path);
    if (it != m_index.end()) {
        m_entries[it->second] = std::move(entry);
        return;
    }
    m_index.emplace(entry.path, m_entries.size());
    m_entries.push_back(std::move(entry));
}

std::string Registry::fingerprint() const
{
    // FNV-1a over the serialized form
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : serialize_registry(*this)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string_view> const& builtin_names()
{
    static std::vector<std::string_view> const names = {
        "eval", "Function", "call", "apply", "parseInt", "parseFloat", "isNaN", "isFinite", "escape", "unescape",
        "Object", "objectToString", "valueOf", "String", "fromCharCode", "charAt", "charCodeAt", "indexOf",
        "lastIndexOf", "substr", "substring", "slice", "toUpperCase", "toLowerCase", "concat", "split", "replace",
        "match", "Number", "toFixed", "numberToString", "Boolean", "Array", "push", "pop", "shift", "unshift", "join",
        "arrayConcat", "arraySlice", "reverse", "sort", "abs", "floor", "ceil", "round", "max", "min", "pow", "sqrt",
        "Date", "RegExp", "Error", "timer", "getField", "getAnnot", "resolveNode",
    };
    return names;
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string_view next_field(std::string_view& rest)
{
    rest = trim(rest);
    size_t end = rest.find_first_of(" \t");
    std::string_view field = rest.substr(0, end);
    rest = end == std::string_view::npos ? std::string_view {} : rest.substr(end);
    return field;
}

std::optional<Safety> parse_safety(std::string_view s)
{
    for (auto v : { Safety::Whitelisted, Safety::Vulnerable, Safety::EvalLike, Safety::Value, Safety::Object })
        if (s == safety_name(v))
            return v;
    return std::nullopt;
}

bool valid_path(std::string_view path)
{
    if (path.empty() || path.front() == '.' || path.back() == '.' || path.find("..") != std::string_view::npos)
        return false;
    for (size_t i = 0; i < path.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(path[i]);
        if (!(std::isalnum(c) || c == '_' || c == '$' || c == '.' || (c == '@' && i == 0)))
            return false;
    }
    return true;
}

void check_model(ApiEntry const& e, size_t line)
{
    std::string_view m = e.model;
    if (e.safety == Safety::Object) {
        std::string_view rest = m;
        while (!rest.empty()) {
            size_t comma = rest.find(',');
            std::string_view flag = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view {} : rest.substr(comma + 1);
            if (flag == "summary")
                continue;
            if (flag.substr(0, 6) == "proto=" && valid_path(flag.substr(6)))
                continue;
            throw ConfigError(line, "unknown object flag '" + std::string(flag) + "'");
        }
        return;
    }
    if (m.empty())
        throw ConfigError(line, "missing model for " + e.path);
    if (m.substr(0, 8) == "builtin:") {
        if (!is_function(e.safety))
            throw ConfigError(line, "built-ins apply to functions only");
        auto const& names = builtin_names();
        if (std::find(names.begin(), names.end(), m.substr(8)) == names.end())
            throw ConfigError(line, "unknown built-in '" + std::string(m.substr(8)) + "'");
        return;
    }
    if (m.substr(0, 4) == "ref:") {
        if (e.safety != Safety::Value || !valid_path(m.substr(4)))
            throw ConfigError(line, "bad reference '" + std::string(m) + "'");
        return;
    }
    if (!domain::parse_value(m))
        throw ConfigError(line, "unparsable value template '" + std::string(m) + "'");
}

}

Registry parse_registry(std::string_view text)
{
    Registry reg;
    size_t line_no = 0;
    while (!text.empty()) {
        size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view {} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        std::string_view rest = line;
        ApiEntry e;
        e.path = std::string(next_field(rest));
        std::string_view safety = next_field(rest);
        e.model = std::string(trim(rest));
        if (!valid_path(e.path))
            throw ConfigError(line_no, "invalid path '" + e.path + "'");
        auto s = parse_safety(safety);
        if (!s)
            throw ConfigError(line_no, "unknown safety level '" + std::string(safety) + "'");
        e.safety = *s;
        if (e.model.find_first_of(" \t") != std::string::npos)
            throw ConfigError(line_no, "unexpected text after model");
        check_model(e, line_no);
        if (reg.find(e.path))
            throw ConfigError(line_no, "duplicate path " + e.path);
        size_t dot = e.path.rfind('.');
        if (dot != std::string::npos) {
            ApiEntry const* parent = reg.find(std::string_view(e.path).substr(0, dot));
            if (!parent || parent->safety == Safety::Value)
                throw ConfigError(line_no, "parent of " + e.path + " is not a declared object or function");
        }
        reg.set(std::move(e));
    }
    for (auto const& e : reg.entries()) {
        if (e.model.substr(0, 4) == "ref:" && !reg.find(std::string_view(e.model).substr(4)))
            throw ConfigError(0, e.path + " references undeclared " + e.model.substr(4));
    }
    return reg;
}

Registry load_registry_file(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(0, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_registry(ss.str());
}

std::string serialize_registry(Registry const& registry)
{
    std::string out;
    for (auto const& e : registry.entries()) {
        out += e.path;
        out.append(e.path.size() < 28 ? 28 - e.path.size() : 1, ' ');
        std::string_view s = safety_name(e.safety);
        out += s;
        if (!e.model.empty()) {
            out.append(s.size() < 13 ? 13 - s.size() : 1, ' ');
            out += e.model;
        }
        out += '\n';
    }
    return out;
}

std::string_view default_registry_text() { return default_registry_source; }

Registry const& default_registry()
{
    static Registry const reg = parse_registry(default_registry_text());
    return reg;
}

}
