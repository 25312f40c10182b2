// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/pdf/document.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace safepdf::pdf {

struct DecodeResult {
    std::string bytes;
    std::vector<RecoveryNote> notes;
};

// Applies the stream's filter chain. Broken Flate data yields the inflatable
// prefix plus a PartialFlate note; unknown filters pass bytes through.
// Throws StreamUndecodable only when a mandatory filter produces nothing.
DecodeResult decode_stream(Document const& doc, Object const& stream);

// Same, with filter names and parameters already resolved.
DecodeResult apply_filters(std::string data, std::vector<std::string> const& filters,
                           std::vector<Dictionary> const& params);

std::string encode_flate(std::string_view bytes, int level = 9);

struct InflateResult {
    std::string bytes;
    bool complete = false;
};
InflateResult inflate_lenient(std::string_view data);

std::string decode_ascii_hex(std::string_view data);
std::string encode_ascii_hex(std::string_view data);
std::string decode_ascii85(std::string_view data);
std::string encode_ascii85(std::string_view data);
std::string decode_lzw(std::string_view data, bool early_change = true);
std::string decode_run_length(std::string_view data);
// PNG (>= 10) and TIFF (2) predictors.
std::string undo_predictor(std::string_view data, int predictor, int colors, int bits_per_component, int columns);

}
