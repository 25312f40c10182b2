// SPDX-License-Identifier: Apache-2.0
#include "safepdf/verdict/forge.hpp"

#include "safepdf/extract/extract.hpp"
#include "safepdf/pdf/security.hpp"
#include "safepdf/pdf/writer.hpp"

#include <json.hpp>

#include <fstream>

namespace safepdf::verdict {

using pdf::Dictionary;
using pdf::Object;
using pdf::ObjectRef;

std::vector<VariantSpec> const& variant_specs()
{
    static std::vector<VariantSpec> const specs = {
        { "plain" },
        { "flate-objstm", true, true },
        { "flate-r5", true, false, 5 },
        { "flate-r5-objstm", true, true, 5 },
        { "flate-r6", true, false, 6 },
        { "flate-r6-objstm", true, true, 6 },
        { "flate-r6-objstm-comment", true, true, 6, true },
        { "utf16-hex", false, false, 0, false, true },
        { "utf16-hex-flate-objstm", true, true, 0, false, true },
        { "utf16-hex-flate-r5-objstm-comment", true, true, 5, true, true },
        { "reverse-mimicry", true, false, 0, false, false, true },
    };
    return specs;
}

namespace {

Object script_object(std::string const& js, bool utf16_hex)
{
    if (utf16_hex)
        return Object::hex_string(*extract::encode_text_string(js, extract::TextEncoding::HexUtf16BE));
    return Object::stream({}, js);
}

Object js_action(pdf::PdfWriter& w, std::string const& js, bool utf16_hex)
{
    Object script = script_object(js, utf16_hex);
    Object value = script.is_stream() ? Object::reference(w.add(script)) : script;
    return Object::dictionary({ { "S", Object::name("JavaScript") }, { "JS", value } });
}

Object font(pdf::PdfWriter& w)
{
    return Object::dictionary({ { "F1", Object::reference(w.add(Object::dictionary({
                                            { "Type", Object::name("Font") },
                                            { "Subtype", Object::name("Type1") },
                                            { "BaseFont", Object::name("Helvetica") },
                                        }))) } });
}

std::string page_text(int page)
{
    static char const* const lines[] = {
        "Quarterly facilities report",
        "Building maintenance was completed on schedule.",
        "Energy use fell compared with the previous quarter.",
        "Questions may be sent to the facilities office.",
    };
    std::string out = "BT /F1 12 Tf 72 720 Td 14 TL\n";
    for (int i = 0; i < 4; ++i)
        out += "(" + std::string(lines[(i + page) % 4]) + ") '\n";
    out += "ET\n";
    return out;
}

void simple_document(std::string const& js, VariantSpec const& spec, Dictionary& trailer, pdf::PdfWriter& w)
{
    ObjectRef pages = w.reserve();
    ObjectRef page = w.add(Object::dictionary({ { "Type", Object::name("Page") },
                                                { "Parent", Object::reference(pages) },
                                                { "MediaBox", Object::array({ Object::number(0), Object::number(0),
                                                                              Object::number(612), Object::number(792) }) } }));
    w.set(pages, Object::dictionary({ { "Type", Object::name("Pages") },
                                      { "Kids", Object::array({ Object::reference(page) }) },
                                      { "Count", Object::number(1) } }));
    ObjectRef action = w.add(js_action(w, js, spec.utf16_hex));
    ObjectRef catalog = w.add(Object::dictionary({ { "Type", Object::name("Catalog") },
                                                   { "Pages", Object::reference(pages) },
                                                   { "OpenAction", Object::reference(action) } }));
    trailer.set("Root", Object::reference(catalog));
}

void mimicry_document(std::string const& js, VariantSpec const& spec, Dictionary& trailer, pdf::PdfWriter& w)
{
    ObjectRef pages = w.reserve();
    Object resources = Object::dictionary({ { "Font", font(w) } });
    Object box = Object::array({ Object::number(0), Object::number(0), Object::number(612), Object::number(792) });
    pdf::Array kids;
    for (int i = 0; i < 3; ++i) {
        ObjectRef content = w.add(Object::stream({}, page_text(i)));
        Dictionary page { { "Type", Object::name("Page") },
                          { "Parent", Object::reference(pages) },
                          { "MediaBox", box },
                          { "Resources", resources },
                          { "Contents", Object::reference(content) } };
        if (i == 1) {
            ObjectRef action = w.add(js_action(w, js, spec.utf16_hex));
            ObjectRef link = w.add(Object::dictionary({
                { "Type", Object::name("Annot") },
                { "Subtype", Object::name("Link") },
                { "Rect", Object::array({ Object::number(72), Object::number(600), Object::number(300),
                                          Object::number(620) }) },
                { "Border", Object::array({ Object::number(0), Object::number(0), Object::number(0) }) },
                { "A", Object::reference(action) },
            }));
            page.set("Annots", Object::array({ Object::reference(link) }));
        }
        kids.push_back(Object::reference(w.add(Object::dictionary(std::move(page)))));
    }
    w.set(pages, Object::dictionary({ { "Type", Object::name("Pages") },
                                      { "Kids", Object::array(std::move(kids)) },
                                      { "Count", Object::number(3) } }));
    ObjectRef catalog = w.add(Object::dictionary({ { "Type", Object::name("Catalog") },
                                                   { "Pages", Object::reference(pages) },
                                                   { "PageLayout", Object::name("OneColumn") } }));
    ObjectRef info = w.add(Object::dictionary({
        { "Title", Object::literal_string("Quarterly facilities report") },
        { "Author", Object::literal_string("Facilities office") },
        { "Producer", Object::literal_string("Report generator 2.1") },
        { "CreationDate", Object::literal_string("D:20240105093000Z") },
    }));
    trailer.set("Root", Object::reference(catalog));
    trailer.set("Info", Object::reference(info));
}

pdf::SecuritySetup security_for(std::string const& js, VariantSpec const& spec)
{
    pdf::SecuritySetup s;
    s.revision = spec.revision;
    s.owner_password = "forge-owner";
    std::string digest = pdf::crypto::sha512(spec.name + '\0' + js);
    s.seed = digest;
    s.document_id = pdf::crypto::md5(js);
    return s;
}

}

std::string forge_document(std::string const& js, VariantSpec const& spec)
{
    pdf::PdfWriter w;
    Dictionary trailer;
    if (spec.reverse_mimicry)
        mimicry_document(js, spec, trailer, w);
    else
        simple_document(js, spec, trailer, w);
    pdf::WriterOptions options;
    options.compress = spec.flate;
    options.object_streams = spec.object_streams;
    if (spec.revision)
        options.security = security_for(js, spec);
    if (spec.trailer_comment)
        options.trailer_comment = "% generated";
    return w.finish(std::move(trailer), options);
}

std::vector<ForgedFile> forge_variants(std::string const& base_js, std::filesystem::path const& out_dir)
{
    std::filesystem::create_directories(out_dir);
    std::vector<ForgedFile> out;
    nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
    int index = 0;
    for (auto const& spec : variant_specs()) {
        char prefix[16];
        snprintf(prefix, sizeof prefix, "%02d-", ++index);
        ForgedFile file { spec.name, out_dir / (prefix + spec.name + ".pdf"), base_js };
        std::ofstream os(file.path, std::ios::binary);
        os << forge_document(base_js, spec);
        if (!os)
            throw std::runtime_error("cannot write " + file.path.string());
        manifest.push_back({ { "variant", spec.name }, { "file", file.path.filename().string() }, { "plaintext", base_js } });
        out.push_back(std::move(file));
    }
    std::ofstream os(out_dir / "manifest.json");
    os << manifest.dump(2) << "\n";
    return out;
}

}
