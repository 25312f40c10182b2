// SPDX-License-Identifier: Apache-2.0
#include "safepdf/pdf/writer.hpp"

#include "safepdf/pdf/filters.hpp"
#include "safepdf/pdf/syntax.hpp"

#include <cmath>
#include <cstdio>

namespace safepdf::pdf {

std::string escape_name(std::string_view name)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : name) {
        if (c < 0x21 || c > 0x7e || c == '#' || is_pdf_delimiter(c)) {
            out.push_back('#');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        } else {
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

static std::string format_number(double v)
{
    char buf[64];
    if (std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 1e15) {
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
        return buf;
    }
    if (!std::isfinite(v))
        return "0";
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0')
        s.pop_back();
    if (!s.empty() && s.back() == '.')
        s.pop_back();
    return s;
}

static void serialize_into(std::string& out, Object const& obj)
{
    switch (obj.kind()) {
    case ObjectKind::Null: out += "null"; break;
    case ObjectKind::Boolean: out += obj.as_bool() ? "true" : "false"; break;
    case ObjectKind::Number: out += format_number(obj.as_number()); break;
    case ObjectKind::LiteralString:
        out += '(';
        out += obj.raw_string();
        out += ')';
        break;
    case ObjectKind::HexString:
        out += '<';
        out += obj.raw_string();
        out += '>';
        break;
    case ObjectKind::Name:
        out += '/';
        out += escape_name(obj.as_name());
        break;
    case ObjectKind::Array: {
        out += '[';
        bool first = true;
        for (auto const& item : obj.as_array()) {
            if (!first)
                out += ' ';
            first = false;
            serialize_into(out, item);
        }
        out += ']';
        break;
    }
    case ObjectKind::Dictionary:
    case ObjectKind::Stream: {
        out += "<<";
        for (auto const& [key, value] : obj.dict().entries()) {
            out += '/';
            out += escape_name(key);
            out += ' ';
            serialize_into(out, value);
        }
        out += ">>";
        if (obj.is_stream()) {
            out += "\nstream\n";
            out += obj.stream_data();
            out += "\nendstream";
        }
        break;
    }
    case ObjectKind::Reference:
        out += std::to_string(obj.as_reference().number);
        out += ' ';
        out += std::to_string(obj.as_reference().generation);
        out += " R";
        break;
    }
}

std::string serialize(Object const& obj)
{
    std::string out;
    serialize_into(out, obj);
    return out;
}

ObjectRef PdfWriter::reserve()
{
    ObjectRef ref { m_next++, 0 };
    m_objects[ref] = Object::null();
    return ref;
}

ObjectRef PdfWriter::add(Object obj)
{
    ObjectRef ref = reserve();
    m_objects[ref] = std::move(obj);
    return ref;
}

void PdfWriter::set(ObjectRef ref, Object obj)
{
    m_objects[ref] = std::move(obj);
    if (ref.number >= m_next)
        m_next = ref.number + 1;
}

static Object with_length(Dictionary dict, std::string data)
{
    dict.set("Length", Object::number(static_cast<double>(data.size())));
    return Object::stream(std::move(dict), std::move(data));
}

namespace {

struct Encryptor {
    EncryptionContext const& ctx;
    std::string const& seed;
    int counter = 0;

    std::string iv(ObjectRef ref)
    {
        return crypto::md5(seed + std::to_string(ref.number) + ":" + std::to_string(counter++)).substr(0, 16);
    }

    Object strings(Object const& obj, ObjectRef ref)
    {
        switch (obj.kind()) {
        case ObjectKind::LiteralString:
            return Object::literal_string(
                escape_literal(encrypt_object(ctx, ref, obj.string_bytes(), iv(ref), PayloadKind::String)));
        case ObjectKind::HexString:
            return Object::hex_string(
                encode_hex(encrypt_object(ctx, ref, obj.string_bytes(), iv(ref), PayloadKind::String)));
        case ObjectKind::Array: {
            Array items;
            for (auto const& item : obj.as_array())
                items.push_back(strings(item, ref));
            return Object::array(std::move(items));
        }
        case ObjectKind::Dictionary: {
            Dictionary d;
            for (auto const& [key, value] : obj.as_dictionary().entries())
                d.set(key, strings(value, ref));
            return Object::dictionary(std::move(d));
        }
        case ObjectKind::Stream: {
            Object d = strings(Object::dictionary(obj.dict()), ref);
            if (!ctx.metadata_encrypted && obj.dict().get("Type").is_name("Metadata"))
                return with_length(d.as_dictionary(), obj.stream_data());
            std::string data = encrypt_object(ctx, ref, obj.stream_data(), iv(ref), PayloadKind::Stream);
            return with_length(d.as_dictionary(), std::move(data));
        }
        default: return obj;
        }
    }
};

}

std::string PdfWriter::finish(Dictionary trailer, WriterOptions const& options) const
{
    std::map<ObjectRef, Object> objects = m_objects;
    uint32_t next = m_next;

    for (auto& [ref, obj] : objects) {
        if (!obj.is_stream())
            continue;
        Dictionary d = obj.dict();
        std::string data = obj.stream_data();
        if (options.compress && !d.contains("Filter")) {
            data = encode_flate(data);
            d.set("Filter", Object::name("FlateDecode"));
        }
        obj = with_length(std::move(d), std::move(data));
    }

    std::optional<SecurityHandler> handler;
    std::optional<ObjectRef> encrypt_ref;
    if (options.security) {
        SecuritySetup setup = *options.security;
        auto const& id = trailer.get("ID").as_array();
        if (!id.empty()) {
            setup.document_id = id[0].string_bytes();
        } else {
            if (setup.document_id.empty())
                setup.document_id = crypto::md5(setup.seed).substr(0, 16);
            Object id_obj = Object::hex_string(encode_hex(setup.document_id));
            trailer.set("ID", Object::array({ id_obj, id_obj }));
        }
        handler = make_security_handler(setup);
        encrypt_ref = ObjectRef { next++, 0 };
    }

    // compressed objects: ref -> (stream number, index)
    std::map<ObjectRef, std::pair<uint32_t, uint32_t>> compressed;
    if (options.object_streams) {
        std::string header;
        std::string body;
        uint32_t index = 0;
        ObjectRef stm_ref { next++, 0 };
        for (auto it = objects.begin(); it != objects.end();) {
            if (it->second.is_stream() || it->first.generation != 0) {
                ++it;
                continue;
            }
            header += std::to_string(it->first.number) + " " + std::to_string(body.size()) + " ";
            body += serialize(it->second);
            body += '\n';
            compressed[it->first] = { stm_ref.number, index++ };
            it = objects.erase(it);
        }
        if (index > 0) {
            header.back() = '\n';
            Dictionary d { { "Type", Object::name("ObjStm") },
                           { "N", Object::number(index) },
                           { "First", Object::number(static_cast<double>(header.size())) },
                           { "Filter", Object::name("FlateDecode") } };
            objects[stm_ref] = with_length(std::move(d), encode_flate(header + body));
        }
    }

    if (handler) {
        Encryptor enc { handler->context, options.security->seed };
        for (auto& [ref, obj] : objects)
            obj = enc.strings(obj, ref);
        objects[*encrypt_ref] = Object::dictionary(handler->encrypt_dict);
        trailer.set("Encrypt", Object::reference(*encrypt_ref));
    }

    std::string out = options.header;
    out += "\n%\xE2\xE3\xCF\xD3\n";
    std::map<uint32_t, size_t> offsets;
    auto write_object = [&](ObjectRef ref, Object const& obj) {
        offsets[ref.number] = out.size();
        out += std::to_string(ref.number) + " " + std::to_string(ref.generation) + " obj\n";
        out += serialize(obj);
        out += "\nendobj\n";
    };
    for (auto const& [ref, obj] : objects)
        write_object(ref, obj);

    uint32_t size = next;
    if (!compressed.empty()) {
        ObjectRef xref_ref { next, 0 };
        size = next + 1;
        offsets[xref_ref.number] = out.size();
        std::string rows;
        auto put = [&](uint32_t type, uint64_t f2, uint32_t f3) {
            rows.push_back(static_cast<char>(type));
            for (int shift = 24; shift >= 0; shift -= 8)
                rows.push_back(static_cast<char>((f2 >> shift) & 0xff));
            rows.push_back(static_cast<char>((f3 >> 8) & 0xff));
            rows.push_back(static_cast<char>(f3 & 0xff));
        };
        for (uint32_t n = 0; n < size; ++n) {
            auto c = compressed.find(ObjectRef { n, 0 });
            if (c != compressed.end())
                put(2, c->second.first, c->second.second);
            else if (offsets.contains(n))
                put(1, offsets[n], 0);
            else
                put(0, 0, n == 0 ? 65535 : 0);
        }
        Dictionary d { { "Type", Object::name("XRef") },
                       { "Size", Object::number(size) },
                       { "W", Object::array({ Object::number(1), Object::number(4), Object::number(2) }) },
                       { "Root", trailer.get("Root") } };
        if (trailer.contains("Encrypt"))
            d.set("Encrypt", trailer.get("Encrypt"));
        if (trailer.contains("ID"))
            d.set("ID", trailer.get("ID"));
        d.set("Length", Object::number(static_cast<double>(rows.size())));
        out += std::to_string(xref_ref.number) + " 0 obj\n";
        out += serialize(Object::stream(std::move(d), std::move(rows)));
        out += "\nendobj\n";
        trailer.set("XRefStm", Object::number(static_cast<double>(offsets[xref_ref.number])));
    }

    size_t xref_offset = out.size();
    out += "xref\n0 " + std::to_string(size) + "\n";
    char line[32];
    for (uint32_t n = 0; n < size; ++n) {
        auto it = offsets.find(n);
        bool in_table = it != offsets.end() && !compressed.contains(ObjectRef { n, 0 });
        if (in_table)
            std::snprintf(line, sizeof line, "%010zu %05u n \n", it->second, 0u);
        else
            std::snprintf(line, sizeof line, "%010u %05u f \n", 0u, n == 0 ? 65535u : 0u);
        out += line;
    }
    trailer.set("Size", Object::number(size));
    out += "trailer";
    if (!options.trailer_comment.empty()) {
        out += ' ';
        out += options.trailer_comment;
    }
    out += '\n';
    out += serialize(Object::dictionary(trailer));
    out += "\nstartxref\n" + std::to_string(xref_offset) + "\n%%EOF\n";
    return out;
}

}
