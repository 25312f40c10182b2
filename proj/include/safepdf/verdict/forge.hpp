// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace safepdf::verdict {

// How a payload script is hidden in the document.
struct VariantSpec {
    std::string name;
    bool flate = false;
    bool object_streams = false;
    int revision = 0; // 0: unencrypted, else 5 or 6 with an empty user password
    bool trailer_comment = false;
    // JS as a UTF-16BE hex string instead of a stream.
    bool utf16_hex = false;
    // Ordinary-looking document with the payload behind a link annotation.
    bool reverse_mimicry = false;
};

// The eleven evasion variants, plain first.
std::vector<VariantSpec> const& variant_specs();

std::string forge_document(std::string const& js, VariantSpec const& spec);

struct ForgedFile {
    std::string variant;
    std::filesystem::path path;
    // The script a correct extractor must recover.
    std::string plaintext;
};

// Writes one PDF per variant plus manifest.json into `out_dir` (created if
// needed). Output depends only on `base_js`.
std::vector<ForgedFile> forge_variants(std::string const& base_js, std::filesystem::path const& out_dir);

}
