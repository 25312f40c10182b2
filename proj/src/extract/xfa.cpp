// SPDX-License-Identifier: Apache-2.0
#include "safepdf/extract/extract.hpp"

#include <map>
#include <memory>

namespace safepdf::extract {

namespace {

struct XmlElement {
    std::string tag; // local name, namespace prefix dropped
    std::map<std::string, std::string> attributes;
    std::vector<std::unique_ptr<XmlElement>> children;
    std::string text;
};

std::string local_name(std::string_view name)
{
    auto colon = name.rfind(':');
    return std::string(colon == std::string_view::npos ? name : name.substr(colon + 1));
}

std::string decode_entities(std::string_view s)
{
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        size_t semi = s.find(';', i);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back('&');
            continue;
        }
        std::string_view name = s.substr(i + 1, semi - i - 1);
        if (name == "lt")
            out.push_back('<');
        else if (name == "gt")
            out.push_back('>');
        else if (name == "amp")
            out.push_back('&');
        else if (name == "quot")
            out.push_back('"');
        else if (name == "apos")
            out.push_back('\'');
        else if (name.size() > 1 && name[0] == '#') {
            char32_t cp = 0;
            bool hex = name[1] == 'x' || name[1] == 'X';
            bool ok = name.size() > (hex ? 2u : 1u);
            for (size_t k = hex ? 2 : 1; ok && k < name.size(); ++k) {
                char c = name[k];
                int d = c >= '0' && c <= '9' ? c - '0'
                    : hex && c >= 'a' && c <= 'f' ? c - 'a' + 10
                    : hex && c >= 'A' && c <= 'F' ? c - 'A' + 10
                                                  : -1;
                ok = d >= 0 && cp < 0x110000;
                cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(d);
            }
            if (!ok || cp > 0x10FFFF) {
                out.push_back('&');
                continue;
            }
            append_utf8(out, cp);
        } else {
            out.push_back('&');
            continue;
        }
        i = semi;
    }
    return out;
}

class XmlReader {
public:
    XmlReader(std::string_view data, std::vector<RecoveryNote>& notes)
        : m_data(data)
        , m_notes(notes)
    {
    }

    std::unique_ptr<XmlElement> read()
    {
        auto root = std::make_unique<XmlElement>();
        std::vector<XmlElement*> stack { root.get() };
        size_t i = 0;
        while (i < m_data.size()) {
            if (m_data[i] != '<') {
                size_t next = m_data.find('<', i);
                if (next == std::string_view::npos)
                    next = m_data.size();
                stack.back()->text += decode_entities(m_data.substr(i, next - i));
                i = next;
                continue;
            }
            if (m_data.substr(i, 4) == "<!--") {
                i = skip_past(i, "-->");
                continue;
            }
            if (m_data.substr(i, 9) == "<![CDATA[") {
                size_t end = m_data.find("]]>", i + 9);
                size_t stop = end == std::string_view::npos ? m_data.size() : end;
                stack.back()->text += m_data.substr(i + 9, stop - i - 9);
                i = end == std::string_view::npos ? m_data.size() : end + 3;
                continue;
            }
            if (m_data.substr(i, 2) == "<?") {
                i = skip_past(i, "?>");
                continue;
            }
            if (m_data.substr(i, 2) == "<!") {
                i = skip_past(i, ">");
                continue;
            }
            if (m_data.substr(i, 2) == "</") {
                size_t end = m_data.find('>', i);
                if (end == std::string_view::npos)
                    end = m_data.size();
                std::string name = local_name(trim(m_data.substr(i + 2, end - i - 2)));
                close(stack, name, i);
                i = end + 1;
                continue;
            }
            i = open_tag(stack, i);
        }
        if (stack.size() > 1) {
            m_notes.push_back({ pdf::RecoveryKind::XfaRecovered, m_data.size(),
                                std::to_string(stack.size() - 1) + " unclosed XFA elements at end of packet" });
        }
        return root;
    }

private:
    static std::string_view trim(std::string_view s)
    {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
            s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
            s.remove_suffix(1);
        return s;
    }

    size_t skip_past(size_t from, std::string_view terminator)
    {
        size_t end = m_data.find(terminator, from);
        return end == std::string_view::npos ? m_data.size() : end + terminator.size();
    }

    void close(std::vector<XmlElement*>& stack, std::string const& name, size_t offset)
    {
        for (size_t k = stack.size(); k-- > 1;) {
            if (stack[k]->tag == name) {
                if (k + 1 != stack.size())
                    m_notes.push_back({ pdf::RecoveryKind::XfaRecovered, offset, "closed unterminated XFA elements before </" + name + ">" });
                stack.resize(k);
                return;
            }
        }
        m_notes.push_back({ pdf::RecoveryKind::XfaRecovered, offset, "stray </" + name + "> ignored" });
    }

    size_t open_tag(std::vector<XmlElement*>& stack, size_t i)
    {
        size_t p = i + 1;
        auto is_name_char = [](char c) {
            return !std::isspace(static_cast<unsigned char>(c)) && c != '>' && c != '/' && c != '=' && c != '<';
        };
        size_t name_start = p;
        while (p < m_data.size() && is_name_char(m_data[p]))
            ++p;
        if (p == name_start) {
            // a lone '<' is text
            stack.back()->text.push_back('<');
            return i + 1;
        }
        auto element = std::make_unique<XmlElement>();
        element->tag = local_name(m_data.substr(name_start, p - name_start));
        bool self_closing = false;
        while (p < m_data.size()) {
            char c = m_data[p];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++p;
                continue;
            }
            if (c == '>') {
                ++p;
                break;
            }
            if (c == '/') {
                self_closing = true;
                ++p;
                continue;
            }
            if (c == '<') {
                m_notes.push_back({ pdf::RecoveryKind::XfaRecovered, p, "unterminated start tag" });
                break;
            }
            size_t attr_start = p;
            while (p < m_data.size() && is_name_char(m_data[p]))
                ++p;
            std::string attr = local_name(m_data.substr(attr_start, p - attr_start));
            if (p == attr_start) {
                ++p;
                continue;
            }
            while (p < m_data.size() && std::isspace(static_cast<unsigned char>(m_data[p])))
                ++p;
            std::string value;
            if (p < m_data.size() && m_data[p] == '=') {
                ++p;
                while (p < m_data.size() && std::isspace(static_cast<unsigned char>(m_data[p])))
                    ++p;
                if (p < m_data.size() && (m_data[p] == '"' || m_data[p] == '\'')) {
                    char quote = m_data[p];
                    size_t end = m_data.find(quote, p + 1);
                    if (end == std::string_view::npos)
                        end = m_data.size();
                    value = decode_entities(m_data.substr(p + 1, end - p - 1));
                    p = end + 1;
                } else {
                    size_t v = p;
                    while (p < m_data.size() && is_name_char(m_data[p]))
                        ++p;
                    value = std::string(m_data.substr(v, p - v));
                }
            }
            element->attributes[attr] = value;
            self_closing = false;
        }
        XmlElement* raw = element.get();
        stack.back()->children.push_back(std::move(element));
        if (!self_closing)
            stack.push_back(raw);
        return p;
    }

    std::string_view m_data;
    std::vector<RecoveryNote>& m_notes;
};

bool has_elements(XmlElement const& e) { return !e.children.empty(); }

std::optional<std::string> field_kind_of(XmlElement const& e)
{
    if (e.tag != "field")
        return e.tag == "subform" || e.tag == "exclGroup" || e.tag == "draw" ? std::optional<std::string>(e.tag) : std::nullopt;
    for (auto const& child : e.children) {
        if (child->tag == "ui" && !child->children.empty())
            return child->children.front()->tag;
    }
    return std::string("field");
}

void add_script(XmlElement const& e, std::string const& event, std::string const& path, XfaNode& node)
{
    ExtractedScript script;
    script.source_text = e.text;
    script.entry_kind = EntryKind::XfaEvent;
    script.event = event;
    script.origin.path = path;
    script.encoding_used = TextEncoding::Utf8;
    node.scripts.push_back(std::move(script));
}

void collect_scripts(XmlElement const& e, std::string const& event, std::string const& path, XfaNode& node)
{
    for (auto const& child : e.children) {
        if (child->tag == "script") {
            add_script(*child, event, path, node);
        } else {
            collect_scripts(*child, event, path, node);
        }
    }
}

void build(XmlElement const& e, XfaNode& node, std::string const& path)
{
    for (auto const& child : e.children) {
        XmlElement const& c = *child;
        if (c.tag == "event") {
            std::string activity = c.attributes.contains("activity") ? c.attributes.at("activity") : "event";
            collect_scripts(c, activity, path, node);
            continue;
        }
        if (c.tag == "variables" || c.tag == "calculate" || c.tag == "validate") {
            collect_scripts(c, c.tag, path, node);
            continue;
        }
        if (c.tag == "script") {
            add_script(c, "script", path, node);
            continue;
        }
        auto name = c.attributes.find("name");
        if (name != c.attributes.end() && !name->second.empty()) {
            XfaNode child_node;
            child_node.name = name->second;
            child_node.field_kind = field_kind_of(c);
            build(c, child_node, path + "/" + name->second);
            node.children.push_back(std::move(child_node));
        } else {
            build(c, node, path);
        }
    }
}

}

XfaNode parse_xfa(std::string_view xml, std::vector<RecoveryNote>& notes)
{
    XfaNode root;
    root.name = "xfa";
    if (xml.find_first_not_of(" \t\r\n\f") == std::string_view::npos)
        return root;
    XmlReader reader(xml, notes);
    auto doc = reader.read();
    if (!has_elements(*doc))
        throw pdf::ExtractionError("XFA packet contains no XML elements");
    build(*doc, root, "/Root/AcroForm/XFA");
    return root;
}

}
