// SPDX-License-Identifier: Apache-2.0
#include "safepdf/pdf/filters.hpp"

#include <zlib.h>

#include <cstdlib>
#include <cstring>

namespace safepdf::pdf {

std::string encode_flate(std::string_view bytes, int level)
{
    uLongf bound = compressBound(static_cast<uLong>(bytes.size()));
    std::string out(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(out.data()), &bound, reinterpret_cast<const Bytef*>(bytes.data()),
                  static_cast<uLong>(bytes.size()), level)
        != Z_OK)
        return {};
    out.resize(bound);
    return out;
}

static InflateResult inflate_with(std::string_view data, int window_bits)
{
    InflateResult result;
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    if (inflateInit2(&zs, window_bits) != Z_OK)
        return result;
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    char buffer[16384];
    while (true) {
        zs.next_out = reinterpret_cast<Bytef*>(buffer);
        zs.avail_out = sizeof(buffer);
        int rc = inflate(&zs, Z_SYNC_FLUSH);
        result.bytes.append(buffer, sizeof(buffer) - zs.avail_out);
        if (rc == Z_STREAM_END) {
            result.complete = true;
            break;
        }
        if (rc != Z_OK)
            break;
        if (zs.avail_in == 0 && zs.avail_out != 0)
            break;
    }
    inflateEnd(&zs);
    return result;
}

InflateResult inflate_lenient(std::string_view data)
{
    auto zlib = inflate_with(data, 15);
    if (zlib.complete || !zlib.bytes.empty())
        return zlib;
    // headerless deflate data, seen in some broken writers
    auto raw = inflate_with(data, -15);
    if (raw.complete || !raw.bytes.empty())
        return raw;
    return zlib;
}

std::string decode_ascii_hex(std::string_view data)
{
    auto end = data.find('>');
    return decode_hex(data.substr(0, end));
}

std::string encode_ascii_hex(std::string_view data) { return encode_hex(data) + ">"; }

std::string decode_ascii85(std::string_view data)
{
    std::string out;
    uint32_t tuple = 0;
    int count = 0;
    size_t i = 0;
    if (data.starts_with("<~"))
        i = 2;
    for (; i < data.size(); ++i) {
        unsigned char c = data[i];
        if (c == '~')
            break;
        if (c == 0 || c == '\t' || c == '\n' || c == '\f' || c == '\r' || c == ' ')
            continue;
        if (c == 'z' && count == 0) {
            out.append(4, '\0');
            continue;
        }
        if (c < '!' || c > 'u')
            continue;
        tuple = tuple * 85 + (c - '!');
        if (++count == 5) {
            for (int s = 24; s >= 0; s -= 8)
                out.push_back(static_cast<char>((tuple >> s) & 0xff));
            tuple = 0;
            count = 0;
        }
    }
    if (count > 1) {
        for (int pad = count; pad < 5; ++pad)
            tuple = tuple * 85 + 84;
        for (int s = 24, n = 0; n < count - 1; s -= 8, ++n)
            out.push_back(static_cast<char>((tuple >> s) & 0xff));
    }
    return out;
}

std::string encode_ascii85(std::string_view data)
{
    std::string out;
    size_t i = 0;
    for (; i + 4 <= data.size(); i += 4) {
        uint32_t v = (static_cast<uint32_t>(static_cast<unsigned char>(data[i])) << 24)
            | (static_cast<uint32_t>(static_cast<unsigned char>(data[i + 1])) << 16)
            | (static_cast<uint32_t>(static_cast<unsigned char>(data[i + 2])) << 8)
            | static_cast<uint32_t>(static_cast<unsigned char>(data[i + 3]));
        if (v == 0) {
            out.push_back('z');
            continue;
        }
        char chunk[5];
        for (int n = 4; n >= 0; --n) {
            chunk[n] = static_cast<char>('!' + v % 85);
            v /= 85;
        }
        out.append(chunk, 5);
    }
    size_t rest = data.size() - i;
    if (rest > 0) {
        uint32_t v = 0;
        for (size_t n = 0; n < 4; ++n)
            v = (v << 8) | (n < rest ? static_cast<unsigned char>(data[i + n]) : 0);
        char chunk[5];
        for (int n = 4; n >= 0; --n) {
            chunk[n] = static_cast<char>('!' + v % 85);
            v /= 85;
        }
        out.append(chunk, rest + 1);
    }
    out += "~>";
    return out;
}

std::string decode_lzw(std::string_view data, bool early_change)
{
    std::string out;
    std::vector<std::string> table;
    auto reset = [&] {
        table.clear();
        for (int i = 0; i < 256; ++i)
            table.emplace_back(1, static_cast<char>(i));
        table.emplace_back(); // 256 clear
        table.emplace_back(); // 257 eod
    };
    reset();
    int code_len = 9;
    uint32_t bit_buffer = 0;
    int bits = 0;
    size_t pos = 0;
    std::string prev;
    bool have_prev = false;
    while (true) {
        while (bits < code_len && pos < data.size()) {
            bit_buffer = (bit_buffer << 8) | static_cast<unsigned char>(data[pos++]);
            bits += 8;
        }
        if (bits < code_len)
            break;
        uint32_t code = (bit_buffer >> (bits - code_len)) & ((1u << code_len) - 1);
        bits -= code_len;
        if (code == 256) {
            reset();
            code_len = 9;
            have_prev = false;
            continue;
        }
        if (code == 257)
            break;
        std::string entry;
        if (code < table.size() && !(code >= 256 && code <= 257)) {
            entry = table[code];
        } else if (code == table.size() && have_prev) {
            entry = prev + prev[0];
        } else {
            break;
        }
        out += entry;
        if (have_prev && table.size() < 4096)
            table.push_back(prev + entry[0]);
        prev = entry;
        have_prev = true;
        size_t next_size = table.size() + (early_change ? 1 : 0);
        if (next_size >= 4096)
            code_len = 12;
        else if (next_size >= 2048)
            code_len = 12;
        else if (next_size >= 1024)
            code_len = 11;
        else if (next_size >= 512)
            code_len = 10;
        else
            code_len = 9;
    }
    return out;
}

std::string decode_run_length(std::string_view data)
{
    std::string out;
    size_t i = 0;
    while (i < data.size()) {
        unsigned char len = data[i++];
        if (len == 128)
            break;
        if (len < 128) {
            size_t n = std::min<size_t>(len + 1, data.size() - i);
            out.append(data.substr(i, n));
            i += n;
        } else if (i < data.size()) {
            out.append(257 - len, data[i++]);
        }
    }
    return out;
}

std::string undo_predictor(std::string_view data, int predictor, int colors, int bits_per_component, int columns)
{
    if (predictor <= 1)
        return std::string(data);
    colors = std::max(1, std::min(colors, 32));
    bits_per_component = std::max(1, std::min(bits_per_component, 16));
    columns = std::max(1, std::min(columns, 1 << 20));
    size_t bpp = std::max<size_t>(1, (static_cast<size_t>(colors) * bits_per_component + 7) / 8);
    size_t row_len = (static_cast<size_t>(colors) * bits_per_component * columns + 7) / 8;
    std::string out;
    if (predictor == 2) {
        if (bits_per_component != 8)
            return std::string(data);
        out.assign(data);
        for (size_t row = 0; row * row_len < out.size(); ++row) {
            size_t start = row * row_len;
            size_t end = std::min(out.size(), start + row_len);
            for (size_t i = start + bpp; i < end; ++i)
                out[i] = static_cast<char>(out[i] + out[i - bpp]);
        }
        return out;
    }
    std::string prior(row_len, '\0');
    size_t pos = 0;
    while (pos < data.size()) {
        unsigned char type = data[pos++];
        std::string row(row_len, '\0');
        size_t n = std::min(row_len, data.size() - pos);
        std::memcpy(row.data(), data.data() + pos, n);
        pos += n;
        for (size_t i = 0; i < row_len; ++i) {
            unsigned char left = i >= bpp ? static_cast<unsigned char>(row[i - bpp]) : 0;
            unsigned char up = static_cast<unsigned char>(prior[i]);
            unsigned char up_left = i >= bpp ? static_cast<unsigned char>(prior[i - bpp]) : 0;
            unsigned char x = static_cast<unsigned char>(row[i]);
            switch (type) {
            case 1: x = static_cast<unsigned char>(x + left); break;
            case 2: x = static_cast<unsigned char>(x + up); break;
            case 3: x = static_cast<unsigned char>(x + (left + up) / 2); break;
            case 4: {
                int p = left + up - up_left;
                int pa = std::abs(p - left), pb = std::abs(p - up), pc = std::abs(p - up_left);
                unsigned char pred = (pa <= pb && pa <= pc) ? left : (pb <= pc ? up : up_left);
                x = static_cast<unsigned char>(x + pred);
                break;
            }
            default: break;
            }
            row[i] = static_cast<char>(x);
        }
        out.append(row, 0, n);
        prior = std::move(row);
    }
    return out;
}

static std::string canonical_filter(std::string const& name)
{
    if (name == "Fl")
        return "FlateDecode";
    if (name == "AHx")
        return "ASCIIHexDecode";
    if (name == "A85")
        return "ASCII85Decode";
    if (name == "LZW")
        return "LZWDecode";
    if (name == "RL")
        return "RunLengthDecode";
    return name;
}

DecodeResult apply_filters(std::string data, std::vector<std::string> const& filters,
                           std::vector<Dictionary> const& params)
{
    DecodeResult result;
    for (size_t i = 0; i < filters.size(); ++i) {
        std::string name = canonical_filter(filters[i]);
        Dictionary const& parms = i < params.size() ? params[i] : Dictionary {};
        auto apply_predictor = [&](std::string in) {
            int predictor = static_cast<int>(parms.get("Predictor").as_int(1));
            if (predictor <= 1)
                return in;
            return undo_predictor(in, predictor, static_cast<int>(parms.get("Colors").as_int(1)),
                                  static_cast<int>(parms.get("BitsPerComponent").as_int(8)),
                                  static_cast<int>(parms.get("Columns").as_int(1)));
        };
        if (name == "FlateDecode") {
            auto inflated = inflate_lenient(data);
            if (!inflated.complete) {
                if (inflated.bytes.empty() && !data.empty())
                    throw StreamUndecodable("flate stream produced no data");
                result.notes.push_back({ RecoveryKind::PartialFlate, 0,
                                         "inflated " + std::to_string(inflated.bytes.size()) + " bytes before error" });
            }
            data = apply_predictor(std::move(inflated.bytes));
        } else if (name == "ASCIIHexDecode") {
            data = decode_ascii_hex(data);
        } else if (name == "ASCII85Decode") {
            data = decode_ascii85(data);
        } else if (name == "LZWDecode") {
            data = apply_predictor(decode_lzw(data, parms.get("EarlyChange").as_int(1) != 0));
        } else if (name == "RunLengthDecode") {
            data = decode_run_length(data);
        } else if (name == "Crypt") {
            // identity crypt filter; real decryption happens at load time
        } else {
            result.notes.push_back({ RecoveryKind::UnknownFilter, 0, "unknown filter " + name });
        }
    }
    result.bytes = std::move(data);
    return result;
}

DecodeResult decode_stream(Document const& doc, Object const& stream)
{
    Dictionary const& dict = stream.dict();
    std::vector<std::string> filters;
    std::vector<Dictionary> params;
    Object filter = doc.resolve(dict.get("Filter"));
    if (filter.is_null())
        filter = doc.resolve(dict.get("F"));
    if (filter.is_name()) {
        filters.push_back(filter.as_name());
    } else if (filter.is_array()) {
        for (auto const& f : filter.as_array()) {
            Object name = doc.resolve(f);
            if (name.is_name())
                filters.push_back(name.as_name());
        }
    }
    Object parms = doc.resolve(dict.get("DecodeParms"));
    if (parms.is_null())
        parms = doc.resolve(dict.get("DP"));
    if (parms.is_dictionary()) {
        params.push_back(parms.as_dictionary());
    } else if (parms.is_array()) {
        for (auto const& p : parms.as_array())
            params.push_back(doc.resolve(p).as_dictionary());
    }
    return apply_filters(stream.stream_data(), filters, params);
}

}
