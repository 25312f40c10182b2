// SPDX-License-Identifier: Apache-2.0
#pragma once

// Builds the labeled fixture corpus from the scripts under data/scripts.

#include "safepdf/pdf/writer.hpp"
#include "safepdf/verdict/forge.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace safepdf::test {

struct CorpusFile {
    std::string name;
    bool malicious = false;
    std::string bytes;
};

// A form with one text field whose keystroke handler is `js`.
inline std::string field_document(std::string const& field, std::string const& js)
{
    using pdf::Object;
    pdf::PdfWriter w;
    pdf::ObjectRef pages = w.reserve();
    pdf::ObjectRef page = w.reserve();
    pdf::ObjectRef script = w.add(Object::stream({}, js));
    pdf::ObjectRef action = w.add(Object::dictionary({ { "S", Object::name("JavaScript") }, { "JS", Object::reference(script) } }));
    pdf::ObjectRef widget = w.add(Object::dictionary({
        { "Type", Object::name("Annot") },
        { "Subtype", Object::name("Widget") },
        { "FT", Object::name("Tx") },
        { "T", Object::literal_string(field) },
        { "Rect", Object::array({ Object::number(72), Object::number(700), Object::number(272), Object::number(720) }) },
        { "P", Object::reference(page) },
        { "AA", Object::dictionary({ { "K", Object::reference(action) } }) },
    }));
    w.set(page, Object::dictionary({ { "Type", Object::name("Page") },
                                     { "Parent", Object::reference(pages) },
                                     { "Annots", Object::array({ Object::reference(widget) }) } }));
    w.set(pages, Object::dictionary({ { "Type", Object::name("Pages") },
                                      { "Kids", Object::array({ Object::reference(page) }) },
                                      { "Count", Object::number(1) } }));
    pdf::ObjectRef catalog = w.add(Object::dictionary({
        { "Type", Object::name("Catalog") },
        { "Pages", Object::reference(pages) },
        { "AcroForm", Object::dictionary({ { "Fields", Object::array({ Object::reference(widget) }) } }) },
    }));
    return w.finish(pdf::Dictionary { { "Root", Object::reference(catalog) } }, {});
}

inline std::string no_script_document()
{
    using pdf::Object;
    pdf::PdfWriter w;
    pdf::ObjectRef pages = w.reserve();
    pdf::ObjectRef content = w.add(Object::stream({}, "BT /F1 12 Tf 72 720 Td (Meeting notes) Tj ET\n"));
    pdf::ObjectRef page = w.add(Object::dictionary({ { "Type", Object::name("Page") },
                                                     { "Parent", Object::reference(pages) },
                                                     { "Contents", Object::reference(content) } }));
    w.set(pages, Object::dictionary({ { "Type", Object::name("Pages") },
                                      { "Kids", Object::array({ Object::reference(page) }) },
                                      { "Count", Object::number(1) } }));
    pdf::ObjectRef catalog = w.add(Object::dictionary({ { "Type", Object::name("Catalog") }, { "Pages", Object::reference(pages) } }));
    pdf::WriterOptions options;
    options.compress = true;
    return w.finish(pdf::Dictionary { { "Root", Object::reference(catalog) } }, options);
}

inline std::vector<std::filesystem::path> scripts_in(std::string const& group)
{
    std::vector<std::filesystem::path> out;
    for (auto const& item : std::filesystem::directory_iterator(data_dir() / "scripts" / group))
        if (item.path().extension() == ".js")
            out.push_back(item.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<CorpusFile> build_corpus()
{
    std::vector<CorpusFile> out;
    auto spec = [](std::string const& name) {
        for (auto const& s : verdict::variant_specs())
            if (s.name == name)
                return s;
        throw std::logic_error("no variant " + name);
    };
    struct Group {
        std::string dir;
        bool malicious;
        std::vector<std::string> variants;
    };
    Group const groups[] = {
        { "benign", false, { "plain", "flate-objstm", "flate-r6", "utf16-hex" } },
        { "malicious", true, { "plain", "flate-r5-objstm", "reverse-mimicry" } },
    };
    for (auto const& g : groups) {
        for (auto const& path : scripts_in(g.dir)) {
            std::string js = read_file(path);
            for (auto const& v : g.variants)
                out.push_back({ g.dir + "-" + path.stem().string() + "-" + v + ".pdf", g.malicious,
                                verdict::forge_document(js, spec(v)) });
        }
    }
    out.push_back({ "benign-form-zip-keystroke.pdf", false,
                    field_document("zip", read_file(data_dir() / "scripts" / "benign" / "zip_check.js")) });
    out.push_back({ "benign-form-digits-keystroke.pdf", false,
                    field_document("amount", read_file(data_dir() / "scripts" / "benign" / "digits_only.js")) });
    out.push_back({ "benign-no-script.pdf", false, no_script_document() });
    out.push_back({ "malicious-form-printf-keystroke.pdf", true,
                    field_document("amount", read_file(data_dir() / "scripts" / "malicious" / "printf_overflow.js")) });
    // Header and garbage only: nothing can be extracted.
    out.push_back({ "malicious-unparseable.pdf", true, "%PDF-1.7\n\x9c\x01\x02 obj stream garbage\n" });
    std::sort(out.begin(), out.end(), [](auto const& a, auto const& b) { return a.name < b.name; });
    return out;
}

inline std::string corpus_labels(std::vector<CorpusFile> const& files)
{
    std::string out = "# fixture corpus labels\n";
    for (auto const& f : files)
        out += f.name + (f.malicious ? " malicious\n" : " benign\n");
    return out;
}

inline std::filesystem::path corpus_dir() { return data_dir() / "corpus"; }

}
