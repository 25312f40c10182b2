// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/pdf/document.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace safepdf::pdf {

namespace crypto {

std::string md5(std::string_view data);
std::string sha256(std::string_view data);
std::string sha384(std::string_view data);
std::string sha512(std::string_view data);
std::string rc4(std::string_view key, std::string_view data);
// Raw CBC over whole blocks; no padding is added or removed.
std::string aes_cbc_encrypt(std::string_view key, std::string_view iv, std::string_view data);
std::string aes_cbc_decrypt(std::string_view key, std::string_view iv, std::string_view data);
std::string aes_ecb_encrypt(std::string_view key, std::string_view block);

}

enum class PayloadKind { String, Stream };

// Standard security handler, ISO 32000-1 7.6.3 (R2-R4) and ISO 32000-2 (R5, R6).
// `encrypt_dict` entries must be direct (already resolved).
EncryptionContext derive_file_key(Dictionary const& trailer, Dictionary const& encrypt_dict, std::string_view password);

std::string decrypt_object(EncryptionContext const& ctx, ObjectRef ref, std::string_view payload,
                           PayloadKind kind = PayloadKind::Stream, std::vector<RecoveryNote>* notes = nullptr);
// `iv` is used for AES ciphers only and must be 16 bytes.
std::string encrypt_object(EncryptionContext const& ctx, ObjectRef ref, std::string_view plaintext,
                           std::string_view iv, PayloadKind kind = PayloadKind::Stream);

// Hash used by R6 (ISO 32000-2 algorithm 2.B). `user_key` is empty for user
// password checks and the 48-byte /U value for owner checks.
std::string revision6_hash(std::string_view password, std::string_view salt, std::string_view user_key);

struct SecuritySetup {
    int revision = 6;
    std::string user_password;
    std::string owner_password;
    std::string document_id;
    int32_t permissions = -4;
    bool encrypt_metadata = true;
    // RC4 or AES-128 for revision 4
    bool aes = true;
    // Key bits for revisions 2-3 (40..128).
    int key_bits = 128;
    // Random material: file key for R5/R6, salts; must be >= 64 bytes.
    std::string seed;
    // Write /O /U /OE /UE /Perms as hex strings.
    bool hex_entries = false;
};

struct SecurityHandler {
    Dictionary encrypt_dict;
    EncryptionContext context;
};

// Writer side of the standard security handler.
SecurityHandler make_security_handler(SecuritySetup const& setup);

}
