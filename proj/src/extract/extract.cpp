// SPDX-License-Identifier: Apache-2.0
#include "safepdf/extract/extract.hpp"

#include "safepdf/pdf/filters.hpp"

#include <algorithm>
#include <set>

namespace safepdf::extract {

using pdf::Dictionary;
using pdf::Object;
using pdf::ObjectKind;
using pdf::RecoveryKind;

namespace {

constexpr int max_walk_depth = 64;

std::string event_name(std::string_view key)
{
    static const std::pair<std::string_view, std::string_view> names[] = {
        { "K", "Keystroke" },   { "F", "Format" },        { "V", "Validate" },      { "C", "Calculate" },
        { "E", "MouseEnter" },  { "X", "MouseExit" },     { "D", "MouseDown" },     { "U", "MouseUp" },
        { "Fo", "Focus" },      { "Bl", "Blur" },         { "PO", "PageOpen" },     { "PC", "PageClose" },
        { "PV", "PageVisible" }, { "PI", "PageInvisible" }, { "O", "Open" },         { "WC", "WillClose" },
        { "WS", "WillSave" },   { "DS", "DidSave" },      { "WP", "WillPrint" },    { "DP", "DidPrint" },
    };
    for (auto const& [k, v] : names) {
        if (k == key)
            return std::string(v);
    }
    return std::string(key);
}

class Walker {
public:
    explicit Walker(pdf::Document const& doc)
        : m_doc(doc)
    {
    }

    AnalysisUnit run();

private:
    struct Named {
        std::string key;
        Object value;
        std::string path;
    };

    void action(Object const& obj, std::string const& path, std::optional<uint32_t> objnum, EntryKind kind,
                std::string const& event, bool preamble, int depth);
    void javascript(Object const& js, std::string const& path, std::optional<uint32_t> objnum, EntryKind kind,
                    std::string const& event, bool preamble);
    void additional_actions(Object const& aa, std::string const& path, std::optional<uint32_t> objnum, EntryKind kind);
    void name_tree(Object const& node, std::string const& path, std::vector<Named>& out, int depth);
    void fields(Object const& list, std::string const& path, int depth);
    void pages(Object const& node, std::string const& path, int depth);
    void annotation(Object const& annot, std::string const& path, std::optional<uint32_t> objnum);
    void orphans();
    void find_orphans(Object const& obj, uint32_t objnum, std::string const& path, int depth, size_t& found);
    void xfa(Object const& value);

    static std::optional<uint32_t> number_of(Object const& obj, std::optional<uint32_t> fallback)
    {
        return obj.is_reference() ? std::optional<uint32_t>(obj.as_reference().number) : fallback;
    }

    pdf::Document const& m_doc;
    AnalysisUnit m_unit;
    std::set<const void*> m_visited;
    std::set<const void*> m_visited_nodes;
};

void Walker::javascript(Object const& js_entry, std::string const& path, std::optional<uint32_t> objnum, EntryKind kind,
                        std::string const& event, bool preamble)
{
    Object js = m_doc.resolve(js_entry);
    ExtractedScript script;
    script.entry_kind = kind;
    script.event = event;
    script.origin = { number_of(js_entry, objnum), path };
    DecodedText text;
    switch (js.kind()) {
    case ObjectKind::LiteralString: text = decode_text_string(js.raw_string(), Container::LiteralString); break;
    case ObjectKind::HexString: text = decode_text_string(js.raw_string(), Container::HexString); break;
    case ObjectKind::Stream: {
        auto decoded = pdf::decode_stream(m_doc, js);
        for (auto& note : decoded.notes)
            m_unit.notes.push_back(std::move(note));
        text = decode_text_string(decoded.bytes, Container::Stream);
        break;
    }
    default:
        m_unit.invalid_scripts.push_back({ script.origin, std::string(pdf::kind_name(js.kind())) });
        return;
    }
    for (auto& note : text.notes)
        m_unit.notes.push_back(std::move(note));
    script.source_text = std::move(text.text);
    script.encoding_used = text.encoding;
    (preamble ? m_unit.preamble : m_unit.handlers).push_back(std::move(script));
}

void Walker::action(Object const& entry, std::string const& path, std::optional<uint32_t> objnum, EntryKind kind,
                    std::string const& event, bool preamble, int depth)
{
    if (depth > max_walk_depth)
        return;
    Object obj = m_doc.resolve(entry);
    objnum = number_of(entry, objnum);
    if (obj.is_array()) {
        // /Next may hold an array of actions
        auto const& items = obj.as_array();
        for (size_t i = 0; i < items.size(); ++i)
            action(items[i], path + "[" + std::to_string(i) + "]", objnum, kind, event, preamble, depth + 1);
        return;
    }
    if (!obj.is_dictionary())
        return;
    Dictionary const& d = obj.as_dictionary();
    if (!m_visited.insert(&d).second)
        return;
    Object type = m_doc.resolve(d.get("S"));
    if (d.contains("JS") || type.is_name("JavaScript")) {
        javascript(d.get("JS"), path + "/JS", objnum, kind, event, preamble);
    } else if (type.is_name()) {
        m_unit.other_actions.push_back(type.as_name() + " at " + path);
    }
    if (d.contains("Next"))
        action(d.get("Next"), path + "/Next", objnum, kind, event, preamble, depth + 1);
}

void Walker::additional_actions(Object const& aa_entry, std::string const& path, std::optional<uint32_t> objnum, EntryKind kind)
{
    Object aa = m_doc.resolve(aa_entry);
    if (!aa.is_dictionary())
        return;
    objnum = number_of(aa_entry, objnum);
    for (auto const& [key, value] : aa.as_dictionary().entries())
        action(value, path + "/" + key, objnum, kind, event_name(key), false, 0);
}

void Walker::name_tree(Object const& entry, std::string const& path, std::vector<Named>& out, int depth)
{
    if (depth > max_walk_depth)
        return;
    Object node = m_doc.resolve(entry);
    if (!node.is_dictionary() || !m_visited_nodes.insert(&node.as_dictionary()).second)
        return;
    Object names = m_doc.resolve(node.dict().get("Names"));
    if (names.is_array()) {
        auto const& items = names.as_array();
        for (size_t i = 0; i + 1 < items.size(); i += 2) {
            Object key = m_doc.resolve(items[i]);
            std::string text = key.is_string() ? key.string_bytes() : key.is_name() ? key.as_name() : std::string();
            out.push_back({ text, items[i + 1], path + "/Names[" + std::to_string(i + 1) + "]" });
        }
    }
    Object kids = m_doc.resolve(node.dict().get("Kids"));
    if (kids.is_array()) {
        auto const& items = kids.as_array();
        for (size_t i = 0; i < items.size(); ++i)
            name_tree(items[i], path + "/Kids[" + std::to_string(i) + "]", out, depth + 1);
    }
}

void Walker::fields(Object const& list_entry, std::string const& path, int depth)
{
    if (depth > max_walk_depth)
        return;
    Object list = m_doc.resolve(list_entry);
    if (!list.is_array())
        return;
    auto const& items = list.as_array();
    for (size_t i = 0; i < items.size(); ++i) {
        std::string here = path + "[" + std::to_string(i) + "]";
        Object field = m_doc.resolve(items[i]);
        if (!field.is_dictionary() || !m_visited_nodes.insert(&field.as_dictionary()).second)
            continue;
        auto objnum = number_of(items[i], std::nullopt);
        Dictionary const& d = field.as_dictionary();
        if (d.contains("A"))
            action(d.get("A"), here + "/A", objnum, EntryKind::FieldAction, "Activate", false, 0);
        if (d.contains("AA"))
            additional_actions(d.get("AA"), here + "/AA", objnum, EntryKind::FieldAction);
        if (d.contains("Kids"))
            fields(d.get("Kids"), here + "/Kids", depth + 1);
    }
}

void Walker::annotation(Object const& entry, std::string const& path, std::optional<uint32_t> objnum)
{
    Object annot = m_doc.resolve(entry);
    if (!annot.is_dictionary())
        return;
    objnum = number_of(entry, objnum);
    Dictionary const& d = annot.as_dictionary();
    if (d.contains("A"))
        action(d.get("A"), path + "/A", objnum, EntryKind::AnnotationAction, "Activate", false, 0);
    if (d.contains("AA"))
        additional_actions(d.get("AA"), path + "/AA", objnum, EntryKind::AnnotationAction);
}

void Walker::pages(Object const& entry, std::string const& path, int depth)
{
    if (depth > max_walk_depth)
        return;
    Object node = m_doc.resolve(entry);
    if (!node.is_dictionary() || !m_visited_nodes.insert(&node.as_dictionary()).second)
        return;
    Dictionary const& d = node.as_dictionary();
    auto objnum = number_of(entry, std::nullopt);
    if (d.contains("AA"))
        additional_actions(d.get("AA"), path + "/AA", objnum, EntryKind::PageAction);
    Object annots = m_doc.resolve(d.get("Annots"));
    if (annots.is_array()) {
        auto const& items = annots.as_array();
        for (size_t i = 0; i < items.size(); ++i)
            annotation(items[i], path + "/Annots[" + std::to_string(i) + "]", objnum);
    }
    Object kids = m_doc.resolve(d.get("Kids"));
    if (kids.is_array()) {
        auto const& items = kids.as_array();
        for (size_t i = 0; i < items.size(); ++i)
            pages(items[i], path + "/Kids[" + std::to_string(i) + "]", depth + 1);
    }
}

void Walker::find_orphans(Object const& obj, uint32_t objnum, std::string const& path, int depth, size_t& found)
{
    if (depth > max_walk_depth)
        return;
    if (obj.is_array()) {
        auto const& items = obj.as_array();
        for (size_t i = 0; i < items.size(); ++i)
            find_orphans(items[i], objnum, path + "[" + std::to_string(i) + "]", depth + 1, found);
        return;
    }
    if (!obj.is_dictionary())
        return;
    Dictionary const& d = obj.as_dictionary();
    if (d.contains("JS") && !m_visited.contains(&d)) {
        size_t before = m_unit.handlers.size() + m_unit.invalid_scripts.size();
        action(obj, path, objnum, EntryKind::AnnotationAction, "orphan", false, 0);
        found += m_unit.handlers.size() + m_unit.invalid_scripts.size() - before;
        return;
    }
    for (auto const& [key, value] : d.entries())
        find_orphans(value, objnum, path + "/" + key, depth + 1, found);
}

void Walker::orphans()
{
    std::vector<std::pair<size_t, pdf::ObjectRef>> order;
    for (auto const& [ref, origin] : m_doc.origins())
        order.emplace_back(origin.offset, ref);
    std::sort(order.begin(), order.end());
    size_t found = 0;
    for (auto const& [offset, ref] : order) {
        Object const* obj = m_doc.find(ref);
        if (!obj || obj->is_stream())
            continue;
        find_orphans(*obj, ref.number, "obj " + std::to_string(ref.number), 0, found);
    }
    if (found > 1)
        m_unit.notes.push_back({ RecoveryKind::UnorderedSnippets, 0,
                                 std::to_string(found) + " unreferenced scripts ordered by file position" });
}

void Walker::xfa(Object const& entry)
{
    Object value = m_doc.resolve(entry);
    std::string xml;
    auto append = [&](Object const& part) {
        Object stream = m_doc.resolve(part);
        if (stream.is_stream()) {
            auto decoded = pdf::decode_stream(m_doc, stream);
            for (auto& note : decoded.notes)
                m_unit.notes.push_back(std::move(note));
            xml += decoded.bytes;
        } else if (stream.is_string()) {
            xml += stream.string_bytes();
        }
    };
    if (value.is_array()) {
        auto const& items = value.as_array();
        for (size_t i = 1; i < items.size(); i += 2)
            append(items[i]);
    } else {
        append(value);
    }
    if (xml.empty())
        return;
    XfaNode tree = parse_xfa(xml, m_unit.notes);
    std::vector<XfaNode const*> work { &tree };
    while (!work.empty()) {
        XfaNode const* node = work.back();
        work.pop_back();
        for (auto const& script : node->scripts)
            m_unit.handlers.push_back(script);
        for (auto it = node->children.rbegin(); it != node->children.rend(); ++it)
            work.push_back(&*it);
    }
    m_unit.xfa_tree = std::move(tree);
}

AnalysisUnit Walker::run()
{
    Dictionary catalog = m_doc.catalog();
    Object names = m_doc.resolve(catalog.get("Names"));
    if (names.is_dictionary() && names.dict().contains("JavaScript")) {
        std::vector<Named> named;
        name_tree(names.dict().get("JavaScript"), "/Root/Names/JavaScript", named, 0);
        std::stable_sort(named.begin(), named.end(), [](Named const& a, Named const& b) { return a.key < b.key; });
        for (auto const& n : named) {
            Object value = m_doc.resolve(n.value);
            if (value.is_string() || value.is_stream())
                javascript(n.value, n.path, std::nullopt, EntryKind::NamedScript, n.key, true);
            else
                action(n.value, n.path, std::nullopt, EntryKind::NamedScript, n.key, true, 0);
        }
    }
    if (catalog.contains("OpenAction"))
        action(catalog.get("OpenAction"), "/Root/OpenAction", number_of(m_doc.trailer().get("Root"), std::nullopt),
               EntryKind::DocumentOpen, "Open", true, 0);
    if (catalog.contains("AA"))
        additional_actions(catalog.get("AA"), "/Root/AA", number_of(m_doc.trailer().get("Root"), std::nullopt),
                           EntryKind::DocumentOpen);
    Object acroform = m_doc.resolve(catalog.get("AcroForm"));
    if (acroform.is_dictionary()) {
        fields(acroform.dict().get("Fields"), "/Root/AcroForm/Fields", 0);
        if (acroform.dict().contains("XFA"))
            xfa(acroform.dict().get("XFA"));
    }
    pages(catalog.get("Pages"), "/Root/Pages", 0);
    orphans();
    return std::move(m_unit);
}

}

AnalysisUnit extract_scripts(pdf::Document const& doc)
{
    Walker walker(doc);
    return walker.run();
}

}
