// SPDX-License-Identifier: Apache-2.0
#include "safepdf/pdf/document.hpp"

#include "safepdf/pdf/filters.hpp"
#include "safepdf/pdf/security.hpp"
#include "safepdf/pdf/syntax.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace safepdf::pdf {

std::string_view recovery_kind_name(RecoveryKind kind)
{
    switch (kind) {
    case RecoveryKind::CommentInTrailer: return "CommentInTrailer";
    case RecoveryKind::CommentInDictionary: return "CommentInDictionary";
    case RecoveryKind::TrailingWhitespaceInStream: return "TrailingWhitespaceInStream";
    case RecoveryKind::BadStreamLength: return "BadStreamLength";
    case RecoveryKind::MissingEndstream: return "MissingEndstream";
    case RecoveryKind::InvalidObjectKeyword: return "InvalidObjectKeyword";
    case RecoveryKind::NullReference: return "NullReference";
    case RecoveryKind::MissingXref: return "MissingXref";
    case RecoveryKind::BrokenXref: return "BrokenXref";
    case RecoveryKind::MissingTrailer: return "MissingTrailer";
    case RecoveryKind::DuplicateObject: return "DuplicateObject";
    case RecoveryKind::ObjectStreamError: return "ObjectStreamError";
    case RecoveryKind::OrphanedEncryption: return "OrphanedEncryption";
    case RecoveryKind::PartialFlate: return "PartialFlate";
    case RecoveryKind::UnknownFilter: return "UnknownFilter";
    case RecoveryKind::FilterError: return "FilterError";
    case RecoveryKind::AesShortPayload: return "AesShortPayload";
    case RecoveryKind::AesBadPadding: return "AesBadPadding";
    case RecoveryKind::TextDecodeError: return "TextDecodeError";
    case RecoveryKind::NestingTooDeep: return "NestingTooDeep";
    case RecoveryKind::XfaRecovered: return "XfaRecovered";
    case RecoveryKind::UnorderedSnippets: return "UnorderedSnippets";
    }
    return "Unknown";
}

std::string_view cipher_name(Cipher cipher)
{
    switch (cipher) {
    case Cipher::RC4: return "RC4";
    case Cipher::AesCbc128: return "AES-CBC-128";
    case Cipher::AesCbc256: return "AES-CBC-256";
    case Cipher::Identity: return "Identity";
    }
    return "Unknown";
}

const Object* Document::find(ObjectRef ref) const
{
    auto it = m_objects.find(ref);
    if (it != m_objects.end())
        return &it->second;
    it = m_objects.lower_bound(ObjectRef { ref.number, 0 });
    if (it != m_objects.end() && it->first.number == ref.number)
        return &it->second;
    return nullptr;
}

Object Document::resolve(ObjectRef ref) const { return resolve(Object::reference(ref)); }

Object Document::resolve(const Object& obj) const
{
    if (!obj.is_reference())
        return obj;
    std::set<ObjectRef> visited;
    Object current = obj;
    for (int hop = 0; hop < max_reference_hops && current.is_reference(); ++hop) {
        ObjectRef ref = current.as_reference();
        if (!visited.insert(ref).second)
            return Object::null();
        const Object* target = find(ref);
        if (!target)
            return Object::null();
        current = *target;
    }
    if (current.is_reference())
        return Object::null();
    return current;
}

Dictionary Document::catalog() const
{
    Object root = resolve(m_trailer.get("Root"));
    if (root.is_dictionary())
        return root.as_dictionary();
    return {};
}

class DocumentBuilder {
public:
    DocumentBuilder(std::string_view data, ParseOptions const& options)
        : m_data(data)
        , m_options(options)
    {
    }

    Document build();

private:
    void scan_objects();
    void scan_trailers();
    void read_xref_chain();
    bool read_xref_table(size_t offset, std::optional<Dictionary>& trailer, int& bad_entries);
    bool read_xref_stream(size_t offset, std::optional<Dictionary>& trailer, int& bad_entries);
    bool offset_holds_object(size_t offset, uint32_t number) const;
    void choose_trailer(bool final);
    void setup_encryption();
    void decrypt_all();
    Object decrypt_strings(Object const& obj, ObjectRef ref);
    void expand_object_streams();
    void note_null_references();
    void store(ObjectRef ref, Object obj, size_t order, ObjectOrigin origin);

    std::string_view m_data;
    ParseOptions const& m_options;
    Document m_doc;
    std::map<ObjectRef, size_t> m_order;
    std::vector<Dictionary> m_scanned_trailers;
    std::optional<Dictionary> m_xref_trailer;
    std::optional<Dictionary> m_xref_stream_dict;
};

void DocumentBuilder::store(ObjectRef ref, Object obj, size_t order, ObjectOrigin origin)
{
    auto it = m_order.find(ref);
    if (it != m_order.end()) {
        m_doc.m_notes.push_back({ RecoveryKind::DuplicateObject, origin.offset,
                                  "object " + std::to_string(ref.number) + " " + std::to_string(ref.generation)
                                      + " defined more than once" });
        if (it->second > order)
            return;
    }
    m_order[ref] = order;
    m_doc.m_objects[ref] = std::move(obj);
    m_doc.m_origins[ref] = origin;
}

static bool is_digit(char c) { return c >= '0' && c <= '9'; }

void DocumentBuilder::scan_objects()
{
    ObjectParser parser(m_data, m_doc.m_notes);
    size_t pos = 0;
    while (true) {
        size_t kw = m_data.find("obj", pos);
        if (kw == std::string_view::npos)
            break;
        pos = kw + 3;
        // backtrack over "<num> <gen> "
        size_t j = kw;
        size_t ws = 0;
        while (j > 0 && is_pdf_whitespace(static_cast<unsigned char>(m_data[j - 1]))) {
            --j;
            ++ws;
        }
        if (ws == 0)
            continue;
        size_t gen_end = j;
        while (j > 0 && is_digit(m_data[j - 1]))
            --j;
        if (j == gen_end)
            continue;
        ws = 0;
        while (j > 0 && is_pdf_whitespace(static_cast<unsigned char>(m_data[j - 1]))) {
            --j;
            ++ws;
        }
        if (ws == 0)
            continue;
        size_t num_end = j;
        while (j > 0 && is_digit(m_data[j - 1]))
            --j;
        if (j == num_end)
            continue;
        if (j > 0 && is_pdf_regular(static_cast<unsigned char>(m_data[j - 1])))
            continue;
        auto obj = parser.parse_indirect(j);
        if (!obj)
            continue;
        store(obj->ref, std::move(obj->object), obj->start, ObjectOrigin { obj->start, std::nullopt });
        pos = std::max(pos, obj->end);
    }
}

void DocumentBuilder::scan_trailers()
{
    size_t pos = 0;
    while (true) {
        size_t kw = m_data.find("trailer", pos);
        if (kw == std::string_view::npos)
            break;
        pos = kw + 7;
        if (kw > 0 && is_pdf_regular(static_cast<unsigned char>(m_data[kw - 1])))
            continue;
        Tokenizer tok(m_data, pos);
        int comments = tok.skip_space();
        std::vector<RecoveryNote> local;
        ObjectParser parser(m_data, local);
        size_t p = tok.pos();
        auto dict = parser.parse_direct(p);
        if (!dict || !dict->is_dictionary())
            continue;
        bool commented = comments > 0;
        for (auto& note : local) {
            if (note.kind == RecoveryKind::CommentInDictionary)
                commented = true;
            else
                m_doc.m_notes.push_back(note);
        }
        if (commented)
            m_doc.m_notes.push_back({ RecoveryKind::CommentInTrailer, kw, "comment in trailer" });
        m_scanned_trailers.push_back(dict->as_dictionary());
        pos = p;
    }
}

bool DocumentBuilder::offset_holds_object(size_t offset, uint32_t number) const
{
    if (offset >= m_data.size())
        return false;
    Tokenizer tok(m_data, offset);
    Token n = tok.next();
    if (n.type != TokenType::Integer || static_cast<uint32_t>(n.number) != number)
        return false;
    Token g = tok.next();
    Token kw = tok.next();
    return g.type == TokenType::Integer && kw.type == TokenType::Keyword && kw.text.starts_with("obj");
}

bool DocumentBuilder::read_xref_table(size_t offset, std::optional<Dictionary>& trailer, int& bad_entries)
{
    Tokenizer tok(m_data, offset);
    Token kw = tok.next();
    if (kw.type != TokenType::Keyword || kw.text != "xref")
        return false;
    while (true) {
        Token t = tok.next();
        if (t.type == TokenType::Keyword && t.text == "trailer")
            break;
        if (t.type != TokenType::Integer)
            return false;
        Token count_tok = tok.next();
        if (count_tok.type != TokenType::Integer)
            return false;
        auto start = static_cast<uint32_t>(t.number);
        auto count = static_cast<int64_t>(count_tok.number);
        for (int64_t i = 0; i < count; ++i) {
            Token off = tok.next();
            Token gen = tok.next();
            Token type = tok.next();
            if (off.type != TokenType::Integer || gen.type != TokenType::Integer || type.type != TokenType::Keyword)
                return false;
            if (type.text == "n" && !offset_holds_object(static_cast<size_t>(off.number), start + static_cast<uint32_t>(i)))
                ++bad_entries;
        }
    }
    std::vector<RecoveryNote> local;
    ObjectParser parser(m_data, local);
    size_t p = tok.pos();
    auto dict = parser.parse_direct(p);
    if (!dict || !dict->is_dictionary())
        return false;
    trailer = dict->as_dictionary();
    return true;
}

bool DocumentBuilder::read_xref_stream(size_t offset, std::optional<Dictionary>& trailer, int& bad_entries)
{
    std::vector<RecoveryNote> local;
    ObjectParser parser(m_data, local);
    auto obj = parser.parse_indirect(offset);
    if (!obj || !obj->object.is_stream() || !obj->object.dict().get("Type").is_name("XRef"))
        return false;
    Dictionary const& dict = obj->object.dict();
    DecodeResult decoded;
    try {
        decoded = decode_stream(m_doc, obj->object);
    } catch (ExtractionError const&) {
        return false;
    }
    auto const& w = dict.get("W").as_array();
    if (w.size() != 3)
        return false;
    int widths[3];
    for (int i = 0; i < 3; ++i) {
        widths[i] = static_cast<int>(w[static_cast<size_t>(i)].as_int(0));
        if (widths[i] < 0 || widths[i] > 8)
            return false;
    }
    std::vector<std::pair<int64_t, int64_t>> sections;
    auto const& index = dict.get("Index").as_array();
    for (size_t i = 0; i + 1 < index.size(); i += 2)
        sections.emplace_back(index[i].as_int(0), index[i + 1].as_int(0));
    if (sections.empty())
        sections.emplace_back(0, dict.get("Size").as_int(0));
    size_t row = static_cast<size_t>(widths[0] + widths[1] + widths[2]);
    std::string_view bytes(decoded.bytes);
    size_t pos = 0;
    auto field = [&](int width, uint64_t fallback) {
        if (width == 0)
            return fallback;
        uint64_t v = 0;
        for (int i = 0; i < width; ++i)
            v = (v << 8) | static_cast<unsigned char>(bytes[pos++]);
        return v;
    };
    for (auto const& [start, count] : sections) {
        for (int64_t i = 0; i < count && row > 0 && pos + row <= bytes.size(); ++i) {
            uint64_t type = field(widths[0], 1);
            uint64_t f2 = field(widths[1], 0);
            field(widths[2], 0);
            if (type == 1 && !offset_holds_object(static_cast<size_t>(f2), static_cast<uint32_t>(start + i)))
                ++bad_entries;
        }
    }
    Dictionary t = dict;
    for (auto key : { "Length", "Filter", "DecodeParms", "W", "Index", "Type" })
        t.erase(key);
    trailer = t;
    if (!m_xref_stream_dict)
        m_xref_stream_dict = t;
    return true;
}

void DocumentBuilder::read_xref_chain()
{
    size_t kw = m_data.rfind("startxref");
    if (kw == std::string_view::npos) {
        m_doc.m_notes.push_back({ RecoveryKind::MissingXref, m_data.size(), "no startxref" });
        return;
    }
    Tokenizer tok(m_data, kw + 9);
    Token off = tok.next();
    if (off.type != TokenType::Integer) {
        m_doc.m_notes.push_back({ RecoveryKind::MissingXref, kw, "startxref without offset" });
        return;
    }
    std::optional<Dictionary> merged;
    std::set<size_t> visited;
    int bad_entries = 0;
    bool broken = false;
    auto next = std::optional<size_t>(static_cast<size_t>(std::max(0.0, off.number)));
    while (next && visited.insert(*next).second) {
        size_t offset = *next;
        next.reset();
        std::optional<Dictionary> section_trailer;
        bool ok = offset < m_data.size()
            && (read_xref_table(offset, section_trailer, bad_entries)
                || read_xref_stream(offset, section_trailer, bad_entries));
        if (!ok) {
            broken = true;
            break;
        }
        if (!merged) {
            merged = *section_trailer;
        } else {
            for (auto const& [key, value] : section_trailer->entries()) {
                if (!merged->contains(key))
                    merged->set(key, value);
            }
        }
        Object const& prev = section_trailer->get("Prev");
        if (prev.is_number())
            next = static_cast<size_t>(std::max<int64_t>(0, prev.as_int(0)));
    }
    if (broken || bad_entries > 0) {
        m_doc.m_notes.push_back({ RecoveryKind::BrokenXref, static_cast<size_t>(std::max(0.0, off.number)),
                                  broken ? "cross-reference section unreadable"
                                         : std::to_string(bad_entries) + " cross-reference entries point elsewhere" });
    }
    if (merged)
        m_xref_trailer = std::move(merged);
}

void DocumentBuilder::choose_trailer(bool final)
{
    auto usable = [&](Dictionary const& d) {
        Object root = m_doc.resolve(d.get("Root"));
        return root.is_dictionary();
    };
    if (m_xref_trailer && usable(*m_xref_trailer)) {
        m_doc.m_trailer = *m_xref_trailer;
        return;
    }
    if (!m_scanned_trailers.empty()) {
        Dictionary merged = m_scanned_trailers.back();
        for (auto it = m_scanned_trailers.rbegin() + 1; it != m_scanned_trailers.rend(); ++it) {
            for (auto const& [key, value] : it->entries()) {
                if (!merged.contains(key))
                    merged.set(key, value);
            }
        }
        if (usable(merged)) {
            m_doc.m_trailer = std::move(merged);
            return;
        }
    }
    if (m_xref_stream_dict && usable(*m_xref_stream_dict)) {
        m_doc.m_trailer = *m_xref_stream_dict;
        return;
    }
    // scanned XRef streams can still carry a usable trailer
    for (auto it = m_doc.m_objects.rbegin(); it != m_doc.m_objects.rend(); ++it) {
        if (it->second.is_stream() && it->second.dict().get("Type").is_name("XRef") && usable(it->second.dict())) {
            Dictionary t = it->second.dict();
            for (auto key : { "Length", "Filter", "DecodeParms", "W", "Index", "Type" })
                t.erase(key);
            m_doc.m_trailer = std::move(t);
            return;
        }
    }
    std::optional<ObjectRef> catalog;
    for (auto const& [ref, obj] : m_doc.m_objects) {
        if (obj.is_dictionary() && obj.dict().get("Type").is_name("Catalog")) {
            if (!catalog || m_order[ref] > m_order[*catalog])
                catalog = ref;
        }
    }
    Dictionary synthesized;
    if (m_xref_trailer)
        synthesized = *m_xref_trailer;
    else if (!m_scanned_trailers.empty())
        synthesized = m_scanned_trailers.back();
    if (catalog)
        synthesized.set("Root", Object::reference(*catalog));
    if (final)
        m_doc.m_notes.push_back({ RecoveryKind::MissingTrailer, m_data.size(),
                                  catalog ? "trailer rebuilt from scanned catalog" : "no trailer and no catalog" });
    m_doc.m_trailer = std::move(synthesized);
}

static bool looks_like_encrypt_dict(Object const& obj)
{
    if (!obj.is_dictionary())
        return false;
    Dictionary const& d = obj.as_dictionary();
    return d.contains("Filter") && d.contains("O") && d.contains("U") && (d.contains("R") || d.contains("V"));
}

void DocumentBuilder::setup_encryption()
{
    Object const* entry = m_doc.m_trailer.find("Encrypt");
    Object encrypt;
    if (entry) {
        if (entry->is_reference())
            m_doc.m_encrypt_ref = entry->as_reference();
        encrypt = m_doc.resolve(*entry);
    }
    if (!encrypt.is_dictionary()) {
        std::optional<ObjectRef> found;
        for (auto const& [ref, obj] : m_doc.m_objects) {
            if (looks_like_encrypt_dict(obj) && obj.dict().get("Filter").is_name("Standard")) {
                if (!found || m_order[ref] > m_order[*found])
                    found = ref;
            }
        }
        if (!found)
            return;
        m_doc.m_encrypt_ref = found;
        encrypt = *m_doc.find(*found);
        m_doc.m_notes.push_back({ RecoveryKind::OrphanedEncryption, m_order[*found],
                                  "encryption dictionary " + std::to_string(found->number) + " located by scan" });
    }
    // resolve indirect entries (e.g. /O 7 0 R, /CF dictionaries)
    Dictionary resolved;
    for (auto const& [key, value] : encrypt.as_dictionary().entries())
        resolved.set(key, m_doc.resolve(value));
    m_doc.m_encryption = derive_file_key(m_doc.m_trailer, resolved, m_options.password);
}

Object DocumentBuilder::decrypt_strings(Object const& obj, ObjectRef ref)
{
    auto const& ctx = *m_doc.m_encryption;
    switch (obj.kind()) {
    case ObjectKind::LiteralString: {
        std::string plain = decrypt_object(ctx, ref, obj.string_bytes(), PayloadKind::String, &m_doc.m_notes);
        return Object::literal_string(escape_literal(plain));
    }
    case ObjectKind::HexString: {
        std::string plain = decrypt_object(ctx, ref, obj.string_bytes(), PayloadKind::String, &m_doc.m_notes);
        return Object::hex_string(encode_hex(plain));
    }
    case ObjectKind::Array: {
        Array items;
        items.reserve(obj.as_array().size());
        for (auto const& item : obj.as_array())
            items.push_back(decrypt_strings(item, ref));
        return Object::array(std::move(items));
    }
    case ObjectKind::Dictionary: {
        Dictionary d;
        for (auto const& [key, value] : obj.as_dictionary().entries())
            d.set(key, decrypt_strings(value, ref));
        return Object::dictionary(std::move(d));
    }
    default: return obj;
    }
}

static bool has_identity_crypt_filter(Document const& doc, Dictionary const& dict)
{
    Object filters = doc.resolve(dict.get("Filter"));
    Object params = doc.resolve(dict.get("DecodeParms"));
    auto check = [&](Object const& name, Object const& param) {
        if (!name.is_name("Crypt"))
            return false;
        Object p = doc.resolve(param);
        Object n = p.is_dictionary() ? doc.resolve(p.dict().get("Name")) : Object::null();
        return n.is_null() || n.is_name("Identity");
    };
    if (filters.is_name())
        return check(filters, params);
    if (filters.is_array()) {
        auto const& items = filters.as_array();
        for (size_t i = 0; i < items.size(); ++i) {
            Object param = params.is_array() && i < params.as_array().size() ? params.as_array()[i] : Object::null();
            if (check(doc.resolve(items[i]), param))
                return true;
        }
    }
    return false;
}

void DocumentBuilder::decrypt_all()
{
    auto const& ctx = *m_doc.m_encryption;
    for (auto& [ref, obj] : m_doc.m_objects) {
        if (m_doc.m_encrypt_ref && ref == *m_doc.m_encrypt_ref)
            continue;
        if (obj.is_stream()) {
            Dictionary const& d = obj.dict();
            if (d.get("Type").is_name("XRef"))
                continue;
            Object dict_obj = decrypt_strings(Object::dictionary(d), ref);
            std::string data = obj.stream_data();
            bool skip = has_identity_crypt_filter(m_doc, d)
                || (!ctx.metadata_encrypted && d.get("Type").is_name("Metadata"));
            if (!skip)
                data = decrypt_object(ctx, ref, data, PayloadKind::Stream, &m_doc.m_notes);
            obj = Object::stream(dict_obj.as_dictionary(), std::move(data));
        } else {
            obj = decrypt_strings(obj, ref);
        }
    }
}

void DocumentBuilder::expand_object_streams()
{
    std::vector<std::pair<ObjectRef, Object>> streams;
    for (auto const& [ref, obj] : m_doc.m_objects) {
        if (obj.is_stream() && obj.dict().get("Type").is_name("ObjStm"))
            streams.emplace_back(ref, obj);
    }
    for (auto const& [ref, stream] : streams) {
        DecodeResult decoded;
        try {
            decoded = decode_stream(m_doc, stream);
        } catch (ExtractionError const& e) {
            m_doc.m_notes.push_back({ RecoveryKind::ObjectStreamError, m_doc.m_origins[ref].offset,
                                      "object stream " + std::to_string(ref.number) + ": " + e.what() });
            continue;
        }
        for (auto& note : decoded.notes)
            m_doc.m_notes.push_back(std::move(note));
        Dictionary resolved_dict;
        for (auto const& [key, value] : stream.dict().entries())
            resolved_dict.set(key, m_doc.resolve(value));
        auto contents = parse_object_stream(decoded.bytes, resolved_dict, m_doc.m_notes);
        size_t order = m_order[ref];
        for (auto& item : contents) {
            if (item.object.is_stream())
                continue;
            // objects inside the stream sort just after the stream itself
            auto existing = m_order.find(item.ref);
            if (existing != m_order.end() && existing->second > order)
                continue;
            m_order[item.ref] = order;
            m_doc.m_objects[item.ref] = std::move(item.object);
            m_doc.m_origins[item.ref] = ObjectOrigin { m_doc.m_origins[ref].offset, ref };
        }
    }
}

void DocumentBuilder::note_null_references()
{
    std::set<ObjectRef> seen;
    std::set<ObjectRef> reported;
    std::deque<Object> work { Object::dictionary(m_doc.m_trailer) };
    while (!work.empty()) {
        Object obj = std::move(work.front());
        work.pop_front();
        switch (obj.kind()) {
        case ObjectKind::Reference: {
            ObjectRef ref = obj.as_reference();
            if (!seen.insert(ref).second)
                break;
            const Object* target = m_doc.find(ref);
            if (!target) {
                if (reported.insert(ref).second)
                    m_doc.m_notes.push_back({ RecoveryKind::NullReference, 0,
                                              "reference to absent object " + std::to_string(ref.number) + " "
                                                  + std::to_string(ref.generation) });
            } else {
                work.push_back(*target);
            }
            break;
        }
        case ObjectKind::Array:
            for (auto const& item : obj.as_array())
                work.push_back(item);
            break;
        case ObjectKind::Dictionary:
        case ObjectKind::Stream:
            for (auto const& [key, value] : obj.dict().entries())
                work.push_back(value);
            break;
        default: break;
        }
    }
}

Document DocumentBuilder::build()
{
    if (m_data.empty())
        throw ExtractionError("empty input");
    scan_objects();
    scan_trailers();
    read_xref_chain();
    if (m_doc.m_objects.empty() && !m_xref_trailer && m_scanned_trailers.empty())
        throw ExtractionError("no PDF objects or trailer found");
    // Object streams cannot be expanded before decryption, but the catalog may
    // live inside one: choose provisionally, then again once all are visible.
    choose_trailer(false);
    setup_encryption();
    if (m_doc.m_encryption)
        decrypt_all();
    expand_object_streams();
    choose_trailer(true);
    note_null_references();
    return std::move(m_doc);
}

Document parse_document(std::span<const uint8_t> bytes, ParseOptions const& options)
{
    std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    return parse_document(view, options);
}

Document parse_document(std::string_view bytes, ParseOptions const& options)
{
    DocumentBuilder builder(bytes, options);
    return builder.build();
}

}
