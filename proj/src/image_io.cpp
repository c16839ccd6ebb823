#include "mdf/image_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdf/errors.hpp"

namespace mdf {

namespace {

using nlohmann::json;

// ---- PGM (P5) ------------------------------------------------------------

// Reads one whitespace/comment-separated header token.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c == '#') in.unget();
    return tok;
}

std::int64_t parse_pgm_int(std::istream& in, const char* what) {
    const std::string tok = next_pgm_token(in);
    if (tok.empty()) throw format_error(std::string("malformed PGM header: missing ") + what);
    std::int64_t value = 0;
    for (char ch : tok) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) {
            throw format_error(std::string("malformed PGM header: bad ") + what + " '" + tok + "'");
        }
        value = value * 10 + (ch - '0');
        if (value > (std::int64_t{1} << 40)) {
            throw format_error(std::string("malformed PGM header: ") + what + " overflow");
        }
    }
    return value;
}

Image load_pgm(const std::string& path, std::optional<int> required_maxval) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '5') {
        throw format_error("malformed PGM header: not a P5 file: " + path);
    }
    const std::int64_t w = parse_pgm_int(in, "width");
    const std::int64_t h = parse_pgm_int(in, "height");
    const std::int64_t maxval = parse_pgm_int(in, "maxval");
    try {
        check_dims(w, h);
    } catch (const std::invalid_argument& e) {
        throw format_error(std::string("malformed PGM header: ") + e.what());
    }
    if (maxval != 255 && maxval != 65535) {
        throw format_error("unsupported PGM maxval " + std::to_string(maxval) + " in " + path);
    }
    if (required_maxval && maxval != *required_maxval) {
        throw format_error("PGM maxval " + std::to_string(maxval) + " does not match requested format");
    }

    Image img(static_cast<int>(w), static_cast<int>(h));
    const std::size_t n = img.size();
    if (maxval == 255) {
        std::vector<unsigned char> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) {
            throw format_error("truncated pixel data in " + path);
        }
        for (std::size_t i = 0; i < n; ++i) img.pixels[i] = static_cast<double>(buf[i]);
    } else {
        std::vector<unsigned char> buf(2 * n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n));
        if (static_cast<std::size_t>(in.gcount()) != 2 * n) {
            throw format_error("truncated pixel data in " + path);
        }
        // 16-bit samples are big-endian per the PGM standard
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned value = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1];
            img.pixels[i] = static_cast<double>(value) * (255.0 / 65535.0);
        }
    }
    return img;
}

// Clips to [0, maxval_scale] on the 255 scale and rounds half-to-even.
std::uint32_t quantize(double v, double scale, std::uint32_t maxval) {
    double s = v * scale;
    if (s < 0.0) s = 0.0;
    const auto q = static_cast<std::uint32_t>(std::nearbyint(s));
    return q > maxval ? maxval : q;
}

void save_pgm(const Image& img, const std::string& path, bool sixteen_bit) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    const std::uint32_t maxval = sixteen_bit ? 65535 : 255;
    out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    if (sixteen_bit) {
        for (double v : img.pixels) {
            const std::uint32_t q = quantize(v, 65535.0 / 255.0, maxval);
            const char bytes[2] = {static_cast<char>((q >> 8) & 0xff), static_cast<char>(q & 0xff)};
            out.write(bytes, 2);
        }
    } else {
        for (double v : img.pixels) {
            const char byte = static_cast<char>(quantize(v, 1.0, maxval));
            out.write(&byte, 1);
        }
    }
    if (!out) throw io_error("write failure on " + path);
}

// ---- raw-f64 + sidecar JSON -----------------------------------------------

void encode_f64_le(double v, unsigned char* out) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
}

double decode_f64_le(const unsigned char* in) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(in[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw format_error("malformed JSON in " + path + ": " + e.what());
    }
}

Image load_raw_f64(const std::string& path) {
    const json header = load_json_file(path + ".json");
    if (!header.contains("width") || !header.contains("height")) {
        throw format_error("raw-f64 header " + path + ".json must contain width and height");
    }
    const auto w = header.at("width").get<std::int64_t>();
    const auto h = header.at("height").get<std::int64_t>();
    try {
        check_dims(w, h);
    } catch (const std::invalid_argument& e) {
        throw format_error(std::string("raw-f64 header: ") + e.what());
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    Image img(static_cast<int>(w), static_cast<int>(h));
    std::vector<unsigned char> buf(img.size() * 8);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
        throw format_error("truncated pixel data in " + path);
    }
    for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = decode_f64_le(&buf[8 * i]);
    return img;
}

void save_raw_f64(const Image& img, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("cannot open " + path + " for writing");
        std::vector<unsigned char> buf(img.size() * 8);
        for (std::size_t i = 0; i < img.size(); ++i) encode_f64_le(img.pixels[i], &buf[8 * i]);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out) throw io_error("write failure on " + path);
    }
    json header;
    header["width"] = img.width;
    header["height"] = img.height;
    std::ofstream out(path + ".json");
    if (!out) throw io_error("cannot open " + path + ".json for writing");
    out << header.dump() << "\n";
    if (!out) throw io_error("write failure on " + path + ".json");
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Image load_image(const std::string& path, ImageFormat format) {
    switch (format) {
        case ImageFormat::pgm8:
            return load_pgm(path, 255);
        case ImageFormat::pgm16:
            return load_pgm(path, 65535);
        case ImageFormat::raw_f64:
            return load_raw_f64(path);
        case ImageFormat::autodetect:
            break;
    }
    if (ends_with(path, ".f64")) return load_raw_f64(path);
    return load_pgm(path, std::nullopt);
}

void save_image(const Image& img, const std::string& path, ImageFormat format) {
    check_dims(img.width, img.height);
    if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
        throw std::invalid_argument("pixel buffer size does not match dimensions");
    }
    if (!img.all_finite()) {
        throw std::invalid_argument("image contains non-finite values; refusing to save " + path);
    }
    switch (format) {
        case ImageFormat::pgm8:
            save_pgm(img, path, false);
            return;
        case ImageFormat::pgm16:
            save_pgm(img, path, true);
            return;
        case ImageFormat::raw_f64:
            save_raw_f64(img, path);
            return;
        case ImageFormat::autodetect:
            if (ends_with(path, ".f64")) {
                save_raw_f64(img, path);
            } else {
                save_pgm(img, path, false);
            }
            return;
    }
}

SamplingMask load_mask(const std::string& path) {
    const json j = load_json_file(path);
    for (const char* key : {"width", "height", "indices"}) {
        if (!j.contains(key)) {
            throw format_error("mask file " + path + " missing field '" + key + "'");
        }
    }
    SamplingMask mask;
    mask.width = j.at("width").get<int>();
    mask.height = j.at("height").get<int>();
    mask.measured = j.at("indices").get<std::vector<std::int64_t>>();
    mask.validate();
    return mask;
}

void save_mask(const SamplingMask& mask, const std::string& path) {
    mask.validate();
    json j;
    j["width"] = mask.width;
    j["height"] = mask.height;
    j["indices"] = mask.measured;
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << j.dump() << "\n";
    if (!out) throw io_error("write failure on " + path);
}

}  // namespace mdf
