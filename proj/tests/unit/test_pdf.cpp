// SPDX-License-Identifier: Apache-2.0
#include "safepdf/pdf/document.hpp"
#include "safepdf/pdf/filters.hpp"
#include "safepdf/pdf/security.hpp"
#include "safepdf/pdf/syntax.hpp"
#include "safepdf/pdf/writer.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <regex>
#include <set>

using namespace safepdf::pdf;
using safepdf::test::data_dir;
using safepdf::test::read_file;

namespace {

std::string simple_pdf(WriterOptions const& options = {}, std::string const& js = "app.alert(1);")
{
    PdfWriter w;
    ObjectRef pages = w.reserve();
    ObjectRef page = w.add(Object::dictionary({ { "Type", Object::name("Page") }, { "Parent", Object::reference(pages) } }));
    w.set(pages, Object::dictionary({ { "Type", Object::name("Pages") },
                                      { "Kids", Object::array({ Object::reference(page) }) },
                                      { "Count", Object::number(1) } }));
    ObjectRef script = w.add(Object::stream({}, js));
    ObjectRef action = w.add(Object::dictionary({ { "S", Object::name("JavaScript") }, { "JS", Object::reference(script) } }));
    ObjectRef catalog = w.add(Object::dictionary({ { "Type", Object::name("Catalog") },
                                                   { "Pages", Object::reference(pages) },
                                                   { "OpenAction", Object::reference(action) } }));
    return w.finish(Dictionary { { "Root", Object::reference(catalog) } }, options);
}

std::string open_action_js(Document const& doc)
{
    Object action = doc.resolve(doc.catalog().get("OpenAction"));
    Object js = doc.resolve(action.dict().get("JS"));
    if (js.is_stream())
        return decode_stream(doc, js).bytes;
    return js.string_bytes();
}

size_t count_notes(Document const& doc, RecoveryKind kind)
{
    return static_cast<size_t>(std::count_if(doc.recovery_notes().begin(), doc.recovery_notes().end(),
                                             [&](auto const& n) { return n.kind == kind; }));
}

std::set<std::pair<uint32_t, ObjectKind>> resolvable(Document const& doc)
{
    std::set<std::pair<uint32_t, ObjectKind>> out;
    for (auto const& [ref, obj] : doc.objects())
        out.emplace(ref.number, obj.kind());
    return out;
}

// Shift every in-use cross-reference offset so none points at its object.
std::string corrupt_xref(std::string pdf)
{
    size_t xref = pdf.rfind("\nxref\n");
    std::string head = pdf.substr(0, xref);
    std::string tail = pdf.substr(xref);
    std::regex entry("(\\d{10}) 00000 n");
    std::string rebuilt;
    auto begin = std::sregex_iterator(tail.begin(), tail.end(), entry);
    size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        rebuilt += tail.substr(last, static_cast<size_t>(it->position()) - last);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%010llu", std::stoull((*it)[1]) + 3);
        rebuilt += std::string(buf) + " 00000 n";
        last = static_cast<size_t>(it->position() + it->length());
    }
    rebuilt += tail.substr(last);
    return head + rebuilt;
}

}

TEST_SUITE("pdf-core")
{
    TEST_CASE("plain document parses without recovery notes")
    {
        Document doc = parse_document(simple_pdf());
        CHECK(doc.recovery_notes().empty());
        CHECK(open_action_js(doc) == "app.alert(1);");
        CHECK(doc.catalog().get("Type").is_name("Catalog"));
    }

    TEST_CASE("comment between trailer keyword and dictionary")
    {
        WriterOptions options;
        options.trailer_comment = "% comment";
        Document doc = parse_document(simple_pdf(options));
        CHECK(count_notes(doc, RecoveryKind::CommentInTrailer) == 1);
        CHECK(doc.recovery_notes().size() == 1);
        CHECK(open_action_js(doc) == "app.alert(1);");
    }

    TEST_CASE("wrong xref offsets fall back to the linear scan")
    {
        std::string good = simple_pdf();
        std::string bad = corrupt_xref(good);
        REQUIRE(bad != good);
        Document doc = parse_document(bad);
        CHECK(count_notes(doc, RecoveryKind::BrokenXref) == 1);
        CHECK(resolvable(doc) == resolvable(parse_document(good)));
        CHECK(open_action_js(doc) == "app.alert(1);");
    }

    TEST_CASE("missing xref and trailer")
    {
        std::string pdf = simple_pdf();
        pdf.resize(pdf.rfind("\nxref\n") + 1);
        Document doc = parse_document(pdf);
        CHECK(count_notes(doc, RecoveryKind::MissingXref) == 1);
        CHECK(count_notes(doc, RecoveryKind::MissingTrailer) == 1);
        CHECK(open_action_js(doc) == "app.alert(1);");
    }

    TEST_CASE("empty and garbage input")
    {
        CHECK_THROWS_AS(parse_document(std::string_view {}), ExtractionError);
        CHECK_THROWS_AS(parse_document(std::string_view("hello world")), ExtractionError);
    }

    TEST_CASE("invalid object keyword and missing endobj")
    {
        std::string pdf = "%PDF-1.4\n1 0 obj <</Type/Catalog/OpenAction 2 0 R>> endobj\n"
                          "2 0 objx <</S/JavaScript/JS(x=1)>> endobjj\n"
                          "trailer <</Root 1 0 R>>\n";
        Document doc = parse_document(pdf);
        CHECK(count_notes(doc, RecoveryKind::InvalidObjectKeyword) >= 1);
        CHECK(open_action_js(doc) == "x=1");
    }

    TEST_CASE("resolve is total")
    {
        std::string pdf = "%PDF-1.4\n1 0 obj <</Type/Catalog>> endobj\n4 0 obj (four) endobj\n"
                          "5 0 obj 6 0 R endobj\n6 0 obj 5 0 R endobj\n7 0 obj 4 0 R endobj\n"
                          "trailer <</Root 1 0 R /Missing 99 0 R>>\n";
        Document doc = parse_document(pdf);
        CHECK(doc.resolve(ObjectRef { 4, 0 }).string_bytes() == "four");
        CHECK(doc.resolve(ObjectRef { 99, 0 }).is_null());
        CHECK(doc.resolve(ObjectRef { 5, 0 }).is_null());
        CHECK(doc.resolve(ObjectRef { 7, 0 }).string_bytes() == "four");
        CHECK(count_notes(doc, RecoveryKind::NullReference) == 1);
    }

    TEST_CASE("later duplicate definitions win")
    {
        std::string pdf = "%PDF-1.4\n1 0 obj <</Type/Catalog>> endobj\n2 0 obj (old) endobj\n"
                          "2 0 obj (new) endobj\ntrailer <</Root 1 0 R>>\n";
        Document doc = parse_document(pdf);
        CHECK(doc.resolve(ObjectRef { 2, 0 }).string_bytes() == "new");
        CHECK(count_notes(doc, RecoveryKind::DuplicateObject) == 1);
    }

    TEST_CASE("trailing whitespace after stream data and bad length")
    {
        std::string pdf = "%PDF-1.4\n1 0 obj <</Type/Catalog/OpenAction<</S/JavaScript/JS 2 0 R>>>> endobj\n"
                          "2 0 obj <</Length 99>>\nstream\nvar a;\n\n   \t\nendstream\nendobj\n"
                          "trailer <</Root 1 0 R>>\n";
        Document doc = parse_document(pdf);
        CHECK(open_action_js(doc) == "var a;");
        CHECK(count_notes(doc, RecoveryKind::TrailingWhitespaceInStream) == 1);
        CHECK(count_notes(doc, RecoveryKind::BadStreamLength) == 1);
    }

    TEST_CASE("recovery monotonicity over single mutations")
    {
        std::string base = simple_pdf();
        auto expected = resolvable(parse_document(base));
        std::vector<std::string> mutants;
        {
            std::string m = base;
            size_t at = m.find("<</Type /Catalog");
            m.insert(at + 2, "% injected\n");
            mutants.push_back(m);
        }
        mutants.push_back(corrupt_xref(base));
        {
            std::string m = base;
            size_t at = m.find("\nendstream");
            m.insert(at, "\n \n\t \n");
            mutants.push_back(m);
        }
        {
            std::string m = base;
            size_t at = m.find("trailer");
            m.insert(at + 7, " % c");
            mutants.push_back(m);
        }
        for (auto const& m : mutants)
            CHECK(resolvable(parse_document(m)) == expected);
    }

    TEST_CASE("object streams")
    {
        WriterOptions options;
        options.object_streams = true;
        options.compress = true;
        Document doc = parse_document(simple_pdf(options, "var inside = 1;"));
        CHECK(open_action_js(doc) == "var inside = 1;");
        bool compressed = false;
        for (auto const& [ref, origin] : doc.origins())
            compressed |= origin.object_stream.has_value();
        CHECK(compressed);
    }
}

TEST_SUITE("pdf-core filters")
{
    TEST_CASE("flate round trip")
    {
        Dictionary d { { "Filter", Object::name("FlateDecode") } };
        Document empty;
        auto r = decode_stream(empty, Object::stream(d, encode_flate("var x=1;")));
        CHECK(r.bytes == "var x=1;");
        CHECK(r.notes.empty());

        std::mt19937 rng(11);
        for (int i = 0; i < 200; ++i) {
            std::string b(rng() % 3000, '\0');
            for (auto& c : b)
                c = static_cast<char>(rng() % (i % 2 ? 256 : 4));
            auto out = decode_stream(empty, Object::stream(d, encode_flate(b)));
            if (b.empty())
                continue;
            CHECK(out.bytes == b);
        }
    }

    TEST_CASE("truncated flate yields the inflatable prefix")
    {
        // bytes and prefix length produced with Python's zlib.decompressobj
        std::string truncated = read_file(data_dir() / "partial_flate.bin");
        std::string source = read_file(data_dir() / "partial_flate_source.txt");
        REQUIRE(truncated.size() == 526);
        Document empty;
        auto r = decode_stream(empty, Object::stream({ { "Filter", Object::name("FlateDecode") } }, truncated));
        CHECK(r.bytes.size() == 1856);
        CHECK(source.starts_with(r.bytes));
        REQUIRE(r.notes.size() == 1);
        CHECK(r.notes[0].kind == RecoveryKind::PartialFlate);
    }

    TEST_CASE("unknown filter passes bytes through")
    {
        Document empty;
        auto r = decode_stream(empty, Object::stream({ { "Filter", Object::name("FancyDecode") } }, "raw"));
        CHECK(r.bytes == "raw");
        REQUIRE(r.notes.size() == 1);
        CHECK(r.notes[0].kind == RecoveryKind::UnknownFilter);
    }

    TEST_CASE("hex, ascii85 and filter chains")
    {
        CHECK(decode_ascii_hex("76 61 7>") == "vap");
        std::string text = "var payload = unescape('%u4141');";
        CHECK(decode_ascii85(encode_ascii85(text)) == text);
        CHECK(decode_ascii85("<~87cURD]i,\"Ebo80~>") == "Hello World!");
        auto r = apply_filters(encode_ascii_hex(encode_flate(text)), { "ASCIIHexDecode", "FlateDecode" }, {});
        CHECK(r.bytes == text);
        CHECK(decode_run_length(std::string("\x02" "abc" "\xfe" "z" "\x80", 7)) == "abczzz");
    }

    TEST_CASE("png up predictor")
    {
        // two rows of 3 bytes, each prefixed with filter type 2 (Up)
        std::string encoded = std::string("\x02\x01\x02\x03\x02\x01\x01\x01", 8);
        CHECK(undo_predictor(encoded, 12, 1, 8, 3) == std::string("\x01\x02\x03\x02\x03\x04", 6));
    }
}

TEST_SUITE("pdf-core security")
{
    std::string const fixture_script = "app.alert('pypdf fixture');";

    std::string named_js(Document const& doc)
    {
        Object names = doc.resolve(doc.resolve(doc.catalog().get("Names")).dict().get("JavaScript"));
        auto const& items = doc.resolve(names.dict().get("Names")).as_array();
        REQUIRE(items.size() == 2);
        Object action = doc.resolve(items[1]);
        Object js = doc.resolve(action.dict().get("JS"));
        return js.is_stream() ? decode_stream(doc, js).bytes : js.string_bytes();
    }

    TEST_CASE("third-party encrypted fixtures")
    {
        struct Case {
            const char* file;
            const char* password;
            int revision;
            Cipher cipher;
        };
        Case cases[] = {
            { "rc4_40.pdf", "", 2, Cipher::RC4 },
            { "rc4_128.pdf", "", 3, Cipher::RC4 },
            { "aes128_userpw.pdf", "user", 4, Cipher::AesCbc128 },
            { "aes128_userpw.pdf", "owner", 4, Cipher::AesCbc128 },
            { "aes256_r5.pdf", "", 5, Cipher::AesCbc256 },
            { "aes256_r6.pdf", "", 6, Cipher::AesCbc256 },
            { "aes256_r6.pdf", "owner", 6, Cipher::AesCbc256 },
            { "aes256_r6_userpw.pdf", "sesame", 6, Cipher::AesCbc256 },
        };
        for (auto const& c : cases) {
            CAPTURE(c.file);
            CAPTURE(c.password);
            std::string bytes = read_file(data_dir() / "crypto" / c.file);
            REQUIRE(!bytes.empty());
            Document doc = parse_document(bytes, ParseOptions { c.password });
            REQUIRE(doc.encryption().has_value());
            CHECK(doc.encryption()->handler_revision == c.revision);
            CHECK(doc.encryption()->cipher == c.cipher);
            CHECK(named_js(doc) == fixture_script);
        }
    }

    TEST_CASE("wrong passwords are rejected")
    {
        std::string r4 = read_file(data_dir() / "crypto" / "aes128_userpw.pdf");
        CHECK_THROWS_AS(parse_document(r4, ParseOptions { "nope" }), WrongPassword);
        CHECK_THROWS_AS(parse_document(r4), WrongPassword);
        std::string r6 = read_file(data_dir() / "crypto" / "aes256_r6_userpw.pdf");
        CHECK_THROWS_AS(parse_document(r6, ParseOptions { "nope" }), WrongPassword);
    }

    SecuritySetup setup_for(int revision, bool aes)
    {
        SecuritySetup s;
        s.revision = revision;
        s.aes = aes;
        s.owner_password = "owner";
        s.document_id = "0123456789abcdef";
        s.seed = std::string(64, 'q');
        for (size_t i = 0; i < s.seed.size(); ++i)
            s.seed[i] = static_cast<char>(i * 37 + revision);
        return s;
    }

    TEST_CASE("encrypt then decrypt is the identity")
    {
        std::mt19937 rng(5);
        std::pair<int, bool> variants[] = { { 2, false }, { 3, false }, { 4, false }, { 4, true }, { 5, true }, { 6, true } };
        for (auto [revision, aes] : variants) {
            CAPTURE(revision);
            SecurityHandler handler = make_security_handler(setup_for(revision, aes));
            Dictionary trailer { { "ID", Object::array({ Object::literal_string("0123456789abcdef") }) } };
            EncryptionContext derived = derive_file_key(trailer, handler.encrypt_dict, "");
            CHECK(derived.file_key == handler.context.file_key);
            CHECK(derive_file_key(trailer, handler.encrypt_dict, "owner").file_key == handler.context.file_key);
            CHECK_THROWS_AS(derive_file_key(trailer, handler.encrypt_dict, "wrong"), WrongPassword);
            for (int i = 0; i < 50; ++i) {
                std::string b(rng() % 200, '\0');
                for (auto& c : b)
                    c = static_cast<char>(rng());
                ObjectRef ref { static_cast<uint32_t>(rng() % 1000), static_cast<uint32_t>(rng() % 3) };
                std::string iv(16, static_cast<char>(i));
                CHECK(decrypt_object(derived, ref, encrypt_object(handler.context, ref, b, iv)) == b);
            }
        }
    }

    TEST_CASE("sub-block AES payload")
    {
        SecurityHandler handler = make_security_handler(setup_for(6, true));
        std::vector<RecoveryNote> notes;
        CHECK(decrypt_object(handler.context, { 3, 0 }, "12345678", PayloadKind::Stream, &notes).empty());
        REQUIRE(notes.size() == 1);
        CHECK(notes[0].kind == RecoveryKind::AesShortPayload);
    }

    TEST_CASE("written R5 with hex entries and R6 with object streams")
    {
        WriterOptions options;
        options.compress = true;
        options.security = setup_for(5, true);
        options.security->owner_password = "";
        options.security->hex_entries = true;
        std::string r5 = simple_pdf(options, "var five;");
        CHECK(r5.find("/O <") != std::string::npos);
        Document doc5 = parse_document(r5);
        CHECK(doc5.encryption()->handler_revision == 5);
        CHECK(open_action_js(doc5) == "var five;");

        options.security = setup_for(6, true);
        options.object_streams = true;
        options.trailer_comment = "% r6";
        Document doc6 = parse_document(simple_pdf(options, "var six;"));
        CHECK(doc6.encryption()->cipher == Cipher::AesCbc256);
        CHECK(open_action_js(doc6) == "var six;");
    }

    TEST_CASE("orphaned encryption dictionary")
    {
        WriterOptions options;
        options.security = setup_for(4, true);
        std::string pdf = simple_pdf(options, "var orphan;");
        // drop the /Encrypt reference from the trailer
        size_t trailer = pdf.rfind("trailer");
        size_t at = pdf.find("/Encrypt", trailer);
        REQUIRE(at != std::string::npos);
        size_t end = pdf.find(" R", at) + 2;
        pdf.erase(at, end - at);
        Document doc = parse_document(pdf);
        CHECK(count_notes(doc, RecoveryKind::OrphanedEncryption) == 1);
        CHECK(open_action_js(doc) == "var orphan;");
    }

    TEST_CASE("unsupported security handler")
    {
        std::string pdf = "%PDF-1.4\n1 0 obj <</Type/Catalog>> endobj\n2 0 obj <</Filter/Adobe.PubSec/V 4/R 4"
                          "/O(x)/U(y)>> endobj\ntrailer <</Root 1 0 R/Encrypt 2 0 R>>\n";
        CHECK_THROWS_AS(parse_document(pdf), ExtractionError);
    }
}
