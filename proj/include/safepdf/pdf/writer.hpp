// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/pdf/object.hpp"
#include "safepdf/pdf/security.hpp"

#include <map>
#include <optional>
#include <string>

namespace safepdf::pdf {

// Direct-object syntax for `obj`. Streams are written with their data inline.
std::string serialize(Object const& obj);
std::string escape_name(std::string_view name);

struct WriterOptions {
    // Flate-compress streams that carry no /Filter yet.
    bool compress = false;
    // Move every non-stream object (except the Encrypt dictionary) into one
    // object stream; a cross-reference stream is added for those entries.
    bool object_streams = false;
    std::optional<SecuritySetup> security;
    // Text placed between the "trailer" keyword and the dictionary, e.g. "% note".
    std::string trailer_comment;
    std::string header = "%PDF-1.7";
};

class PdfWriter {
public:
    ObjectRef reserve();
    ObjectRef add(Object obj);
    void set(ObjectRef ref, Object obj);

    const std::map<ObjectRef, Object>& objects() const { return m_objects; }

    // `trailer` must at least contain /Root. /Size, /ID (when encrypting) and
    // /Encrypt are filled in.
    std::string finish(Dictionary trailer, WriterOptions const& options) const;

private:
    uint32_t m_next = 1;
    std::map<ObjectRef, Object> m_objects;
};

}
