// SPDX-License-Identifier: Apache-2.0
#include "safepdf/pdf/security.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

namespace safepdf::pdf {

namespace crypto {

static std::string digest(EVP_MD const* md, std::string_view data)
{
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out, &len, md, nullptr) != 1)
        return {};
    return std::string(reinterpret_cast<char*>(out), len);
}

std::string md5(std::string_view data) { return digest(EVP_md5(), data); }
std::string sha256(std::string_view data) { return digest(EVP_sha256(), data); }
std::string sha384(std::string_view data) { return digest(EVP_sha384(), data); }
std::string sha512(std::string_view data) { return digest(EVP_sha512(), data); }

std::string rc4(std::string_view key, std::string_view data)
{
    std::array<unsigned char, 256> s;
    for (int i = 0; i < 256; ++i)
        s[i] = static_cast<unsigned char>(i);
    if (key.empty())
        return std::string(data);
    unsigned j = 0;
    for (int i = 0; i < 256; ++i) {
        j = (j + s[i] + static_cast<unsigned char>(key[i % key.size()])) & 0xff;
        std::swap(s[i], s[j]);
    }
    std::string out(data.size(), '\0');
    unsigned i = 0;
    j = 0;
    for (size_t n = 0; n < data.size(); ++n) {
        i = (i + 1) & 0xff;
        j = (j + s[i]) & 0xff;
        std::swap(s[i], s[j]);
        out[n] = static_cast<char>(static_cast<unsigned char>(data[n]) ^ s[(s[i] + s[j]) & 0xff]);
    }
    return out;
}

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

static EVP_CIPHER const* aes_cipher(size_t key_len, bool cbc)
{
    switch (key_len) {
    case 16: return cbc ? EVP_aes_128_cbc() : EVP_aes_128_ecb();
    case 24: return cbc ? EVP_aes_192_cbc() : EVP_aes_192_ecb();
    case 32: return cbc ? EVP_aes_256_cbc() : EVP_aes_256_ecb();
    default: return nullptr;
    }
}

static std::string aes_run(std::string_view key, std::string_view iv, std::string_view data, bool encrypt, bool cbc)
{
    EVP_CIPHER const* cipher = aes_cipher(key.size(), cbc);
    if (!cipher)
        return {};
    size_t whole = data.size() - data.size() % 16;
    CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    unsigned char ivbuf[16] = {};
    for (size_t i = 0; i < 16 && i < iv.size(); ++i)
        ivbuf[i] = static_cast<unsigned char>(iv[i]);
    if (EVP_CipherInit_ex(ctx.get(), cipher, nullptr, reinterpret_cast<const unsigned char*>(key.data()),
                          cbc ? ivbuf : nullptr, encrypt ? 1 : 0)
        != 1)
        return {};
    EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
    std::string out(whole + 16, '\0');
    int len = 0;
    int total = 0;
    if (EVP_CipherUpdate(ctx.get(), reinterpret_cast<unsigned char*>(out.data()), &len,
                         reinterpret_cast<const unsigned char*>(data.data()), static_cast<int>(whole))
        != 1)
        return {};
    total = len;
    if (EVP_CipherFinal_ex(ctx.get(), reinterpret_cast<unsigned char*>(out.data()) + total, &len) != 1)
        return {};
    total += len;
    out.resize(static_cast<size_t>(total));
    return out;
}

std::string aes_cbc_encrypt(std::string_view key, std::string_view iv, std::string_view data)
{
    return aes_run(key, iv, data, true, true);
}

std::string aes_cbc_decrypt(std::string_view key, std::string_view iv, std::string_view data)
{
    return aes_run(key, iv, data, false, true);
}

std::string aes_ecb_encrypt(std::string_view key, std::string_view block) { return aes_run(key, {}, block, true, false); }

}

namespace {

constexpr unsigned char password_padding[32] = {
    0x28, 0xBF, 0x4E, 0x5E, 0x4E, 0x75, 0x8A, 0x41, 0x64, 0x00, 0x4E, 0x56, 0xFF, 0xFA, 0x01, 0x08,
    0x2E, 0x2E, 0x00, 0xB6, 0xD0, 0x68, 0x3E, 0x80, 0x2F, 0x0C, 0xA9, 0xFE, 0x64, 0x53, 0x69, 0x7A,
};

std::string pad_password(std::string_view password)
{
    std::string out(password.substr(0, 32));
    out.append(reinterpret_cast<const char*>(password_padding), 32 - out.size());
    return out;
}

std::string le32(uint32_t v)
{
    std::string out(4, '\0');
    for (int i = 0; i < 4; ++i)
        out[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    return out;
}

std::string xor_key(std::string_view key, unsigned char value)
{
    std::string out(key);
    for (auto& c : out)
        c = static_cast<char>(static_cast<unsigned char>(c) ^ value);
    return out;
}

struct HandlerParams {
    int version = 0;
    int revision = 0;
    int key_length = 5; // bytes
    std::string owner;
    std::string user;
    std::string owner_key;
    std::string user_key;
    int32_t permissions = 0;
    std::string id0;
    bool encrypt_metadata = true;
    Cipher stream_cipher = Cipher::RC4;
    Cipher string_cipher = Cipher::RC4;
};

Cipher crypt_filter_cipher(Dictionary const& encrypt, std::string const& filter_name, int revision)
{
    if (filter_name == "Identity")
        return Cipher::Identity;
    Object const& cf = encrypt.get("CF");
    Object const& entry = cf.dict().get(filter_name);
    std::string method = entry.dict().get("CFM").as_name();
    if (method == "AESV2")
        return Cipher::AesCbc128;
    if (method == "AESV3")
        return Cipher::AesCbc256;
    if (method == "None")
        return Cipher::Identity;
    if (method == "V2")
        return Cipher::RC4;
    return revision >= 5 ? Cipher::AesCbc256 : Cipher::RC4;
}

HandlerParams read_params(Dictionary const& trailer, Dictionary const& encrypt)
{
    HandlerParams p;
    if (!encrypt.get("Filter").is_name("Standard"))
        throw ExtractionError("unsupported security handler '" + encrypt.get("Filter").as_name() + "'");
    p.version = static_cast<int>(encrypt.get("V").as_int(0));
    p.revision = static_cast<int>(encrypt.get("R").as_int(0));
    if (p.revision < 2 || p.revision > 6)
        throw ExtractionError("unsupported security handler revision " + std::to_string(p.revision));
    int bits = static_cast<int>(encrypt.get("Length").as_int(40));
    if (bits < 40 || bits > 256)
        bits = 40;
    p.key_length = p.revision == 2 ? 5 : bits / 8;
    p.owner = encrypt.get("O").string_bytes();
    p.user = encrypt.get("U").string_bytes();
    p.owner_key = encrypt.get("OE").string_bytes();
    p.user_key = encrypt.get("UE").string_bytes();
    p.permissions = static_cast<int32_t>(static_cast<uint32_t>(static_cast<int64_t>(encrypt.get("P").as_number())));
    Object const* em = encrypt.find("EncryptMetadata");
    p.encrypt_metadata = !(em && em->kind() == ObjectKind::Boolean && !em->as_bool());
    auto const& id = trailer.get("ID").as_array();
    if (!id.empty())
        p.id0 = id[0].string_bytes();

    if (p.revision >= 5) {
        p.key_length = 32;
        p.stream_cipher = Cipher::AesCbc256;
        p.string_cipher = Cipher::AesCbc256;
        if (p.version == 5 && encrypt.contains("CF")) {
            p.stream_cipher = crypt_filter_cipher(encrypt, encrypt.get("StmF").as_name(), p.revision);
            p.string_cipher = crypt_filter_cipher(encrypt, encrypt.get("StrF").as_name(), p.revision);
        }
    } else if (p.version == 4) {
        std::string stmf = encrypt.get("StmF").as_name();
        std::string strf = encrypt.get("StrF").as_name();
        p.stream_cipher = stmf.empty() ? Cipher::Identity : crypt_filter_cipher(encrypt, stmf, p.revision);
        p.string_cipher = strf.empty() ? Cipher::Identity : crypt_filter_cipher(encrypt, strf, p.revision);
        if (p.stream_cipher == Cipher::AesCbc128 || p.string_cipher == Cipher::AesCbc128)
            p.key_length = 16;
        int cf_bits = static_cast<int>(encrypt.get("CF").dict().get(stmf).dict().get("Length").as_int(0));
        if (cf_bits >= 40 && cf_bits <= 128)
            p.key_length = cf_bits / 8;
        else if (cf_bits >= 5 && cf_bits <= 16)
            p.key_length = cf_bits; // some writers use bytes here
    }
    if (p.key_length < 5 || p.key_length > 32)
        p.key_length = 5;
    return p;
}

// Algorithm 2 (R2-R4 file key).
std::string legacy_file_key(HandlerParams const& p, std::string_view padded_password)
{
    std::string input(padded_password);
    input += p.owner.substr(0, 32);
    input += le32(static_cast<uint32_t>(p.permissions));
    input += p.id0;
    if (p.revision >= 4 && !p.encrypt_metadata)
        input += std::string(4, '\xff');
    std::string hash = crypto::md5(input);
    size_t n = static_cast<size_t>(p.key_length);
    if (p.revision >= 3) {
        for (int i = 0; i < 50; ++i)
            hash = crypto::md5(std::string_view(hash).substr(0, n));
    }
    return hash.substr(0, n);
}

// Algorithms 4/5: the /U value for a given file key.
std::string legacy_user_value(HandlerParams const& p, std::string_view key)
{
    std::string pad(reinterpret_cast<const char*>(password_padding), 32);
    if (p.revision == 2)
        return crypto::rc4(key, pad);
    std::string x = crypto::rc4(key, crypto::md5(pad + p.id0));
    for (unsigned char i = 1; i <= 19; ++i)
        x = crypto::rc4(xor_key(key, i), x);
    return x + std::string(16, '\0');
}

bool legacy_user_matches(HandlerParams const& p, std::string_view key)
{
    std::string expected = legacy_user_value(p, key);
    if (p.revision == 2)
        return p.user.substr(0, 32) == expected.substr(0, 32);
    return p.user.size() >= 16 && p.user.substr(0, 16) == expected.substr(0, 16);
}

std::string legacy_owner_rc4_key(HandlerParams const& p, std::string_view owner_password)
{
    std::string hash = crypto::md5(pad_password(owner_password));
    if (p.revision >= 3) {
        for (int i = 0; i < 50; ++i)
            hash = crypto::md5(hash);
    }
    return hash.substr(0, static_cast<size_t>(p.key_length));
}

std::string modern_hash(HandlerParams const& p, std::string_view password, std::string_view salt,
                        std::string_view user_key)
{
    if (p.revision == 6)
        return revision6_hash(password, salt, user_key);
    std::string input(password);
    input += salt;
    input += user_key;
    return crypto::sha256(input);
}

std::optional<std::string> modern_file_key(HandlerParams const& p, std::string_view password_in)
{
    std::string_view password = password_in.substr(0, 127);
    if (p.user.size() < 48 || p.owner.size() < 48)
        throw ExtractionError("malformed /U or /O in R5/R6 encryption dictionary");
    std::string_view u(p.user);
    std::string_view o(p.owner);
    std::string_view u48 = u.substr(0, 48);
    std::string iv(16, '\0');
    if (modern_hash(p, password, o.substr(32, 8), u48) == o.substr(0, 32)) {
        std::string intermediate = modern_hash(p, password, o.substr(40, 8), u48);
        if (p.owner_key.size() >= 32)
            return crypto::aes_cbc_decrypt(intermediate, iv, std::string_view(p.owner_key).substr(0, 32));
    }
    if (modern_hash(p, password, u.substr(32, 8), {}) == u.substr(0, 32)) {
        std::string intermediate = modern_hash(p, password, u.substr(40, 8), {});
        if (p.user_key.size() >= 32)
            return crypto::aes_cbc_decrypt(intermediate, iv, std::string_view(p.user_key).substr(0, 32));
    }
    return std::nullopt;
}

}

std::string revision6_hash(std::string_view password, std::string_view salt, std::string_view user_key)
{
    std::string input(password);
    input += salt;
    input += user_key;
    std::string k = crypto::sha256(input);
    std::string e;
    int round = 0;
    while (round < 64 || static_cast<unsigned char>(e.back()) > round - 32) {
        std::string block(password);
        block += k;
        block += user_key;
        std::string k1;
        k1.reserve(block.size() * 64);
        for (int i = 0; i < 64; ++i)
            k1 += block;
        e = crypto::aes_cbc_encrypt(std::string_view(k).substr(0, 16), std::string_view(k).substr(16, 16), k1);
        unsigned sum = 0;
        for (int i = 0; i < 16; ++i)
            sum += static_cast<unsigned char>(e[i]);
        switch (sum % 3) {
        case 0: k = crypto::sha256(e); break;
        case 1: k = crypto::sha384(e); break;
        default: k = crypto::sha512(e); break;
        }
        ++round;
    }
    return k.substr(0, 32);
}

EncryptionContext derive_file_key(Dictionary const& trailer, Dictionary const& encrypt_dict, std::string_view password)
{
    HandlerParams p = read_params(trailer, encrypt_dict);
    EncryptionContext ctx;
    ctx.handler_revision = p.revision;
    ctx.metadata_encrypted = p.encrypt_metadata;
    ctx.cipher = p.stream_cipher;
    ctx.string_cipher = p.string_cipher;

    if (p.revision >= 5) {
        auto key = modern_file_key(p, password);
        if (!key || key->size() != 32)
            throw WrongPassword("password does not validate against R" + std::to_string(p.revision) + " handler");
        ctx.file_key = std::move(*key);
        return ctx;
    }

    std::string user_pad = pad_password(password);
    std::string key = legacy_file_key(p, user_pad);
    if (legacy_user_matches(p, key)) {
        ctx.file_key = std::move(key);
        return ctx;
    }
    // treat the password as the owner password (algorithm 7)
    std::string rc4_key = legacy_owner_rc4_key(p, password);
    std::string recovered = p.owner.substr(0, 32);
    if (p.revision == 2) {
        recovered = crypto::rc4(rc4_key, recovered);
    } else {
        for (int i = 19; i >= 0; --i)
            recovered = crypto::rc4(xor_key(rc4_key, static_cast<unsigned char>(i)), recovered);
    }
    key = legacy_file_key(p, recovered);
    if (legacy_user_matches(p, key)) {
        ctx.file_key = std::move(key);
        return ctx;
    }
    throw WrongPassword("password does not validate against R" + std::to_string(p.revision) + " handler");
}

static std::string object_key(EncryptionContext const& ctx, ObjectRef ref, bool aes)
{
    if (ctx.handler_revision >= 5)
        return ctx.file_key;
    std::string input = ctx.file_key;
    input.push_back(static_cast<char>(ref.number & 0xff));
    input.push_back(static_cast<char>((ref.number >> 8) & 0xff));
    input.push_back(static_cast<char>((ref.number >> 16) & 0xff));
    input.push_back(static_cast<char>(ref.generation & 0xff));
    input.push_back(static_cast<char>((ref.generation >> 8) & 0xff));
    if (aes)
        input += "sAlT";
    std::string hash = crypto::md5(input);
    return hash.substr(0, std::min<size_t>(ctx.file_key.size() + 5, 16));
}

std::string decrypt_object(EncryptionContext const& ctx, ObjectRef ref, std::string_view payload, PayloadKind kind,
                           std::vector<RecoveryNote>* notes)
{
    Cipher cipher = kind == PayloadKind::String ? ctx.string_cipher : ctx.cipher;
    switch (cipher) {
    case Cipher::Identity: return std::string(payload);
    case Cipher::RC4: return crypto::rc4(object_key(ctx, ref, false), payload);
    case Cipher::AesCbc128:
    case Cipher::AesCbc256: break;
    }
    if (payload.size() < 32) {
        // IV plus at least one block is required
        if (payload.size() < 16 || payload.size() % 16 != 0) {
            if (notes)
                notes->push_back({ RecoveryKind::AesShortPayload, 0,
                                   "AES payload of " + std::to_string(payload.size()) + " bytes for object "
                                       + std::to_string(ref.number) });
            return {};
        }
        if (payload.size() == 16)
            return {};
    }
    std::string key = object_key(ctx, ref, true);
    std::string_view iv = payload.substr(0, 16);
    std::string_view body = payload.substr(16);
    if (body.size() % 16 != 0 && notes)
        notes->push_back({ RecoveryKind::AesBadPadding, 0, "AES payload not block aligned" });
    std::string plain = crypto::aes_cbc_decrypt(key, iv, body);
    if (plain.empty())
        return plain;
    unsigned char pad = static_cast<unsigned char>(plain.back());
    bool valid = pad >= 1 && pad <= 16 && pad <= plain.size();
    for (size_t i = 0; valid && i < pad; ++i)
        valid = static_cast<unsigned char>(plain[plain.size() - 1 - i]) == pad;
    if (valid) {
        plain.resize(plain.size() - pad);
    } else if (notes) {
        notes->push_back({ RecoveryKind::AesBadPadding, 0, "invalid AES padding, kept as is" });
    }
    return plain;
}

std::string encrypt_object(EncryptionContext const& ctx, ObjectRef ref, std::string_view plaintext, std::string_view iv,
                           PayloadKind kind)
{
    Cipher cipher = kind == PayloadKind::String ? ctx.string_cipher : ctx.cipher;
    switch (cipher) {
    case Cipher::Identity: return std::string(plaintext);
    case Cipher::RC4: return crypto::rc4(object_key(ctx, ref, false), plaintext);
    case Cipher::AesCbc128:
    case Cipher::AesCbc256: break;
    }
    std::string padded(plaintext);
    size_t pad = 16 - padded.size() % 16;
    padded.append(pad, static_cast<char>(pad));
    std::string iv16(iv.substr(0, 16));
    iv16.resize(16, '\0');
    return iv16 + crypto::aes_cbc_encrypt(object_key(ctx, ref, true), iv16, padded);
}

SecurityHandler make_security_handler(SecuritySetup const& setup)
{
    if (setup.seed.size() < 64)
        throw std::invalid_argument("security seed must provide 64 bytes");
    SecurityHandler out;
    Dictionary& d = out.encrypt_dict;
    EncryptionContext& ctx = out.context;
    ctx.handler_revision = setup.revision;
    ctx.metadata_encrypted = setup.encrypt_metadata;
    auto str_obj = [&](std::string bytes) {
        return setup.hex_entries ? Object::hex_string(encode_hex(bytes)) : Object::literal_string(escape_literal(bytes));
    };
    d.set("Filter", Object::name("Standard"));

    if (setup.revision >= 5) {
        std::string_view seed(setup.seed);
        ctx.file_key = std::string(seed.substr(0, 32));
        ctx.cipher = ctx.string_cipher = Cipher::AesCbc256;
        HandlerParams p;
        p.revision = setup.revision;
        std::string upw = setup.user_password.substr(0, 127);
        std::string opw = setup.owner_password.substr(0, 127);
        std::string uvs(seed.substr(32, 8)), uks(seed.substr(40, 8));
        std::string ovs(seed.substr(48, 8)), oks(seed.substr(56, 8));
        std::string iv(16, '\0');
        std::string u = modern_hash(p, upw, uvs, {}) + uvs + uks;
        std::string ue = crypto::aes_cbc_encrypt(modern_hash(p, upw, uks, {}), iv, ctx.file_key);
        std::string o = modern_hash(p, opw, ovs, u) + ovs + oks;
        std::string oe = crypto::aes_cbc_encrypt(modern_hash(p, opw, oks, u), iv, ctx.file_key);
        std::string perms = le32(static_cast<uint32_t>(setup.permissions)) + std::string(4, '\xff');
        perms.push_back(setup.encrypt_metadata ? 'T' : 'F');
        perms += "adb";
        perms += std::string(seed.substr(0, 4));
        d.set("V", Object::number(5));
        d.set("R", Object::number(setup.revision));
        d.set("Length", Object::number(256));
        Dictionary std_cf { { "CFM", Object::name("AESV3") }, { "AuthEvent", Object::name("DocOpen") },
                            { "Length", Object::number(32) } };
        d.set("CF", Object::dictionary(Dictionary { { "StdCF", Object::dictionary(std_cf) } }));
        d.set("StmF", Object::name("StdCF"));
        d.set("StrF", Object::name("StdCF"));
        d.set("O", str_obj(o));
        d.set("U", str_obj(u));
        d.set("OE", str_obj(oe));
        d.set("UE", str_obj(ue));
        d.set("Perms", str_obj(crypto::aes_ecb_encrypt(ctx.file_key, perms)));
        d.set("P", Object::number(setup.permissions));
        if (!setup.encrypt_metadata)
            d.set("EncryptMetadata", Object::boolean(false));
        return out;
    }

    HandlerParams p;
    p.revision = setup.revision;
    p.version = setup.revision == 2 ? 1 : (setup.revision == 3 ? 2 : 4);
    p.key_length = setup.revision == 2 ? 5 : std::clamp(setup.key_bits, 40, 128) / 8;
    if (setup.revision == 4)
        p.key_length = 16;
    p.permissions = setup.permissions;
    p.id0 = setup.document_id;
    p.encrypt_metadata = setup.encrypt_metadata;

    // Algorithm 3: /O
    std::string owner_pw = setup.owner_password.empty() ? setup.user_password : setup.owner_password;
    std::string rc4_key = legacy_owner_rc4_key(p, owner_pw);
    std::string o = crypto::rc4(rc4_key, pad_password(setup.user_password));
    if (p.revision >= 3) {
        for (unsigned char i = 1; i <= 19; ++i)
            o = crypto::rc4(xor_key(rc4_key, i), o);
    }
    p.owner = o;
    ctx.file_key = legacy_file_key(p, pad_password(setup.user_password));
    std::string u = legacy_user_value(p, ctx.file_key);

    d.set("V", Object::number(p.version));
    d.set("R", Object::number(p.revision));
    d.set("Length", Object::number(p.key_length * 8));
    if (p.revision == 4) {
        std::string cfm = setup.aes ? "AESV2" : "V2";
        Dictionary std_cf { { "CFM", Object::name(cfm) }, { "AuthEvent", Object::name("DocOpen") },
                            { "Length", Object::number(16) } };
        d.set("CF", Object::dictionary(Dictionary { { "StdCF", Object::dictionary(std_cf) } }));
        d.set("StmF", Object::name("StdCF"));
        d.set("StrF", Object::name("StdCF"));
        ctx.cipher = ctx.string_cipher = setup.aes ? Cipher::AesCbc128 : Cipher::RC4;
        if (!setup.encrypt_metadata)
            d.set("EncryptMetadata", Object::boolean(false));
    } else {
        ctx.cipher = ctx.string_cipher = Cipher::RC4;
    }
    d.set("O", str_obj(o));
    d.set("U", str_obj(u));
    d.set("P", Object::number(setup.permissions));
    return out;
}

}
