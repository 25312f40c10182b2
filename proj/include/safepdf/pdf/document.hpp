// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/pdf/object.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace safepdf::pdf {

enum class RecoveryKind {
    CommentInTrailer,
    CommentInDictionary,
    TrailingWhitespaceInStream,
    BadStreamLength,
    MissingEndstream,
    InvalidObjectKeyword,
    NullReference,
    MissingXref,
    BrokenXref,
    MissingTrailer,
    DuplicateObject,
    ObjectStreamError,
    OrphanedEncryption,
    PartialFlate,
    UnknownFilter,
    FilterError,
    AesShortPayload,
    AesBadPadding,
    TextDecodeError,
    NestingTooDeep,
    XfaRecovered,
    UnorderedSnippets,
};

std::string_view recovery_kind_name(RecoveryKind kind);

struct RecoveryNote {
    RecoveryKind kind;
    size_t offset = 0;
    std::string detail;

    bool operator==(const RecoveryNote&) const = default;
};

class ExtractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WrongPassword : public ExtractionError {
public:
    using ExtractionError::ExtractionError;
};

class StreamUndecodable : public ExtractionError {
public:
    using ExtractionError::ExtractionError;
};

enum class Cipher { RC4, AesCbc128, AesCbc256, Identity };

std::string_view cipher_name(Cipher cipher);

struct EncryptionContext {
    int handler_revision = 0;
    std::string file_key;
    // Default method for streams and strings; differs under R4 crypt filters.
    Cipher cipher = Cipher::RC4;
    Cipher string_cipher = Cipher::RC4;
    bool metadata_encrypted = true;
};

// Location an object was recovered from: a byte offset in the file, or an
// object stream plus index.
struct ObjectOrigin {
    size_t offset = 0;
    std::optional<ObjectRef> object_stream;
};

class Document {
public:
    Document() = default;

    const std::map<ObjectRef, Object>& objects() const { return m_objects; }
    const Dictionary& trailer() const { return m_trailer; }
    const std::optional<EncryptionContext>& encryption() const { return m_encryption; }
    const std::vector<RecoveryNote>& recovery_notes() const { return m_notes; }
    const std::map<ObjectRef, ObjectOrigin>& origins() const { return m_origins; }
    std::optional<ObjectRef> encrypt_dictionary_ref() const { return m_encrypt_ref; }

    // Total: absent targets and reference cycles yield the Null object.
    Object resolve(const Object& obj) const;
    Object resolve(ObjectRef ref) const;
    // Lookup by number ignoring generation mismatches.
    const Object* find(ObjectRef ref) const;

    // Catalog dictionary (trailer /Root) or an empty dictionary.
    Dictionary catalog() const;

private:
    friend class DocumentBuilder;

    std::map<ObjectRef, Object> m_objects;
    std::map<ObjectRef, ObjectOrigin> m_origins;
    Dictionary m_trailer;
    std::optional<EncryptionContext> m_encryption;
    std::optional<ObjectRef> m_encrypt_ref;
    std::vector<RecoveryNote> m_notes;
};

struct ParseOptions {
    // Tried as user password, then as owner password.
    std::string password;
};

Document parse_document(std::span<const uint8_t> bytes, ParseOptions const& options = {});
Document parse_document(std::string_view bytes, ParseOptions const& options = {});

inline constexpr int max_reference_hops = 64;

}
