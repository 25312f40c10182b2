// SPDX-License-Identifier: Apache-2.0
#include "safepdf/extract/extract.hpp"
#include "safepdf/pdf/writer.hpp"

#include <doctest.h>

#include <random>

using namespace safepdf;
using namespace safepdf::extract;
using pdf::Object;
using pdf::ObjectRef;

namespace {

AnalysisUnit extract_text(std::string const& pdf_text) { return extract_scripts(pdf::parse_document(pdf_text)); }

}

TEST_SUITE("js-extract")
{
    TEST_CASE("empty JavaScript string")
    {
        auto unit = extract_text("%PDF-1.4\n1 0 obj <</Type/Catalog/OpenAction<</JS()/S/JavaScript>>>> endobj\n"
                                 "trailer <</Root 1 0 R>>\n");
        REQUIRE(unit.preamble.size() == 1);
        CHECK(unit.preamble[0].source_text.empty());
        CHECK(unit.preamble[0].entry_kind == EntryKind::DocumentOpen);
        CHECK(unit.handlers.empty());
    }

    TEST_CASE("no JavaScript")
    {
        auto unit = extract_text("%PDF-1.4\n1 0 obj <</Type/Catalog/Pages 2 0 R>> endobj\n"
                                 "2 0 obj <</Type/Pages/Kids[]/Count 0>> endobj\ntrailer <</Root 1 0 R>>\n");
        CHECK(unit.preamble.empty());
        CHECK(unit.handlers.empty());
        CHECK(unit.invalid_scripts.empty());
    }

    TEST_CASE("UTF-16BE hex string")
    {
        std::string js = "app.alert(\"hé\");";
        std::string hex = *encode_text_string(js, TextEncoding::HexUtf16BE);
        auto unit = extract_text("%PDF-1.4\n1 0 obj <</Type/Catalog/OpenAction<</S/JavaScript/JS <" + hex
                                 + ">>>>> endobj\ntrailer <</Root 1 0 R>>\n");
        REQUIRE(unit.preamble.size() == 1);
        CHECK(unit.preamble[0].source_text == js);
        CHECK(unit.preamble[0].encoding_used == TextEncoding::HexUtf16BE);
    }

    TEST_CASE("decode_text_string")
    {
        CHECK(decode_text_string("FEFF00760061", Container::HexString).text == "va");
        CHECK(decode_text_string("a\\)b", Container::LiteralString).text == "a)b");
        CHECK(decode_text_string("a\\nb\\t\\101(x)\\\nc", Container::LiteralString).text == "a\nb\tA(x)c");
        CHECK(decode_text_string("7", Container::HexString).text == "p");
        CHECK(decode_text_string("\x80", Container::Stream).text == "•");
        auto bad = decode_text_string("FEFFD800", Container::HexString);
        CHECK(bad.text == "�");
        REQUIRE(bad.notes.size() == 1);
        CHECK(bad.notes[0].kind == pdf::RecoveryKind::TextDecodeError);
        // idempotent on decoded ASCII
        std::string ascii = "var x = 1; // ok";
        auto once = decode_text_string(ascii, Container::Stream).text;
        CHECK(once == ascii);
        CHECK(decode_text_string(once, Container::Stream).text == once);
    }

    TEST_CASE("encode/decode round trip over random text")
    {
        std::mt19937 rng(3);
        char32_t alphabet[] = { 'a', 'Z', '0', ' ', '(', ')', '\\', '\n', '\r', 0xe9, 0x2022, 0x20ac, 0x4e2d, 0x1f600, 0 };
        TextEncoding modes[] = { TextEncoding::Literal, TextEncoding::HexUtf16BE, TextEncoding::HexLatin,
                                 TextEncoding::Utf8, TextEncoding::PdfDocEncoding };
        int checked = 0;
        for (int i = 0; i < 500; ++i) {
            std::string s;
            size_t len = rng() % 40;
            for (size_t k = 0; k < len; ++k)
                append_utf8(s, alphabet[rng() % std::size(alphabet)]);
            for (auto mode : modes) {
                auto raw = encode_text_string(s, mode);
                if (!raw)
                    continue;
                auto decoded = decode_text_string(*raw, container_for(mode));
                CHECK(decoded.text == s);
                CHECK(decoded.notes.empty());
                ++checked;
            }
        }
        CHECK(checked > 1000);
    }

    TEST_CASE("entry points and ordering")
    {
        std::string pdf = "%PDF-1.4\n"
                          "1 0 obj <</Type/Catalog/Names<</JavaScript 2 0 R>>/OpenAction 5 0 R/Pages 6 0 R"
                          "/AcroForm<</Fields[8 0 R]>>/AA<</WC<</S/JavaScript/JS(close)>>>>>> endobj\n"
                          "2 0 obj <</Names[(zeta) 3 0 R (alpha) 4 0 R]>> endobj\n"
                          "3 0 obj <</S/JavaScript/JS(var z;)>> endobj\n"
                          "4 0 obj <</S/JavaScript/JS(var a;)/Next<</S/JavaScript/JS(var a2;)>>>> endobj\n"
                          "5 0 obj <</S/JavaScript/JS(open)>> endobj\n"
                          "6 0 obj <</Type/Pages/Kids[7 0 R]/Count 1>> endobj\n"
                          "7 0 obj <</Type/Page/Parent 6 0 R/AA<</O<</S/JavaScript/JS(page)>>>>"
                          "/Annots[8 0 R 9 0 R]>> endobj\n"
                          "8 0 obj <</FT/Tx/T(f)/Subtype/Widget/AA<</K<</S/JavaScript/JS(key)>>>>>> endobj\n"
                          "9 0 obj <</Subtype/Link/A<</S/URI/URI(http://x)>>>> endobj\n"
                          "10 0 obj <</S/JavaScript/JS(lost)>> endobj\n"
                          "11 0 obj <</S/JavaScript/JS 42>> endobj\n"
                          "trailer <</Root 1 0 R>>\n";
        auto unit = extract_text(pdf);
        REQUIRE(unit.preamble.size() == 4);
        CHECK(unit.preamble[0].source_text == "var a;");
        CHECK(unit.preamble[0].entry_kind == EntryKind::NamedScript);
        CHECK(unit.preamble[1].source_text == "var a2;");
        CHECK(unit.preamble[2].source_text == "var z;");
        CHECK(unit.preamble[3].source_text == "open");
        CHECK(unit.preamble[3].origin.path == "/Root/OpenAction/JS");
        CHECK(unit.preamble[3].origin.object_number == 5u);

        std::vector<std::pair<EntryKind, std::string>> handlers;
        for (auto const& h : unit.handlers)
            handlers.emplace_back(h.entry_kind, h.source_text);
        std::vector<std::pair<EntryKind, std::string>> expected {
            { EntryKind::DocumentOpen, "close" },
            { EntryKind::FieldAction, "key" },
            { EntryKind::PageAction, "page" },
            { EntryKind::AnnotationAction, "lost" },
        };
        CHECK(handlers == expected);
        CHECK(unit.handlers[1].event == "Keystroke");
        CHECK(unit.handlers[3].event == "orphan");
        REQUIRE(unit.invalid_scripts.size() == 1);
        CHECK(unit.invalid_scripts[0].kind == "number");
        REQUIRE(unit.other_actions.size() == 1);
    }

    TEST_CASE("XFA packet")
    {
        std::string xml = "<?xml version=\"1.0\"?><xdp:xdp xmlns:xdp=\"http://ns.adobe.com/xdp/\">"
                          "<template><subform name=\"form1\"><field name=\"field1\"><ui><textEdit/></ui>"
                          "<event activity=\"click\"><script contentType=\"application/x-javascript\">"
                          "app.alert(&quot;x&quot; &lt; 2);</script></event></field>"
                          "<variables><script name=\"lib\"><![CDATA[var k = 1 < 2;]]></script></variables>"
                          "<field name=\"field2\"><ui><button/></ui>"
                          "</subform></template></xdp:xdp>";
        std::vector<pdf::RecoveryNote> notes;
        XfaNode root = parse_xfa(xml, notes);
        CHECK(root.name == "xfa");
        REQUIRE(root.children.size() == 1);
        XfaNode const& form = root.children[0];
        CHECK(form.name == "form1");
        REQUIRE(form.children.size() == 2);
        CHECK(form.children[0].name == "field1");
        CHECK(form.children[0].field_kind == std::optional<std::string>("textEdit"));
        REQUIRE(form.children[0].scripts.size() == 1);
        CHECK(form.children[0].scripts[0].source_text == "app.alert(\"x\" < 2);");
        CHECK(form.children[0].scripts[0].event == "click");
        REQUIRE(form.scripts.size() == 1);
        CHECK(form.scripts[0].event == "variables");
        CHECK(form.scripts[0].source_text == "var k = 1 < 2;");
        CHECK(form.children[1].field_kind == std::optional<std::string>("button"));
        // unclosed <field name="field2"> was recovered
        CHECK(!notes.empty());

        std::vector<pdf::RecoveryNote> more;
        CHECK_THROWS_AS(parse_xfa("just text, no markup", more), pdf::ExtractionError);
        CHECK(parse_xfa("", more).children.empty());
    }

    TEST_CASE("XFA scripts become handlers")
    {
        std::string xml = "<xdp><template><subform name=\"f\"><event activity=\"initialize\"><script>var i;</script>"
                          "</event></subform></template></xdp>";
        pdf::PdfWriter w;
        ObjectRef xfa = w.add(Object::stream({}, xml));
        ObjectRef catalog = w.add(Object::dictionary(
            { { "Type", Object::name("Catalog") },
              { "AcroForm", Object::dictionary({ { "Fields", Object::array({}) }, { "XFA", Object::reference(xfa) } }) } }));
        auto unit = extract_scripts(pdf::parse_document(w.finish({ { "Root", Object::reference(catalog) } }, {})));
        REQUIRE(unit.handlers.size() == 1);
        CHECK(unit.handlers[0].entry_kind == EntryKind::XfaEvent);
        CHECK(unit.handlers[0].event == "initialize");
        REQUIRE(unit.xfa_tree.has_value());
        CHECK(unit.xfa_tree->children.at(0).name == "f");
    }
}
