#include "mdf/patch_library.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mdf/errors.hpp"
#include "mdf/image_io.hpp"
#include "mdf/rng.hpp"

namespace mdf {

void PatchLibrary::validate() const {
    if (patch_size < 1 || patch_size % 2 == 0) {
        throw std::invalid_argument("patch size must be odd and positive");
    }
    if (centers.empty()) throw std::invalid_argument("patch library is empty");
    const auto np2 = static_cast<std::size_t>(values_per_patch());
    if (patches.size() != np2 * centers.size()) {
        throw std::invalid_argument("patch buffer size does not match count");
    }
    const int half = patch_size / 2;
    for (std::int64_t r = 0; r < count(); ++r) {
        const double* p = patch(r);
        for (int i = 0; i < values_per_patch(); ++i) {
            if (!std::isfinite(p[i])) throw std::invalid_argument("patch values must be finite");
        }
        if (p[half * patch_size + half] != centers[r]) {
            throw std::invalid_argument("center pixel does not match patch contents");
        }
    }
}

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

void extract_patch(const Image& img, int cx, int cy, int patch_size, double* out) {
    if (patch_size < 1 || patch_size % 2 == 0) {
        throw std::invalid_argument("patch size must be odd and positive");
    }
    if (cx < 0 || cx >= img.width || cy < 0 || cy >= img.height) {
        throw std::invalid_argument("patch center outside image");
    }
    const int half = patch_size / 2;
    for (int dy = -half; dy <= half; ++dy) {
        const int sy = reflect_index(cy + dy, img.height);
        const double* row = &img.pixels[static_cast<std::size_t>(sy) * img.width];
        for (int dx = -half; dx <= half; ++dx) {
            *out++ = row[reflect_index(cx + dx, img.width)];
        }
    }
}

std::vector<double> extract_patch(const Image& img, int cx, int cy, int patch_size) {
    std::vector<double> out(static_cast<std::size_t>(patch_size) * patch_size);
    extract_patch(img, cx, cy, patch_size, out.data());
    return out;
}

PatchLibrary build_library(const std::vector<Image>& images, int patch_size,
                           int stride, std::optional<std::int64_t> max_patches,
                           std::uint64_t seed) {
    if (patch_size < 1 || patch_size % 2 == 0) {
        throw std::invalid_argument("patch size must be odd and positive");
    }
    if (stride < 1) throw std::invalid_argument("stride must be positive");
    if (max_patches && *max_patches < 1) throw std::invalid_argument("max_patches must be >= 1");
    if (images.empty()) throw std::invalid_argument("no library images given");

    const int half = patch_size / 2;
    struct Center {
        int image;
        int x;
        int y;
    };
    std::vector<Center> grid;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const Image& img = images[i];
        if (img.width < patch_size || img.height < patch_size) {
            throw std::invalid_argument("library image " + std::to_string(i) +
                                        " smaller than the patch size");
        }
        for (int y = half; y + half < img.height; y += stride) {
            for (int x = half; x + half < img.width; x += stride) {
                grid.push_back({static_cast<int>(i), x, y});
            }
        }
    }

    std::vector<std::int64_t> keep(grid.size());
    std::iota(keep.begin(), keep.end(), std::int64_t{0});
    if (max_patches && static_cast<std::int64_t>(grid.size()) > *max_patches) {
        Xoshiro256pp rng(seed);
        const std::int64_t m = *max_patches;
        for (std::int64_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::int64_t>(
                                   rng.uniform_below(static_cast<std::uint64_t>(keep.size() - i)));
            std::swap(keep[i], keep[j]);
        }
        keep.resize(m);
        std::sort(keep.begin(), keep.end());
    }

    PatchLibrary lib;
    lib.patch_size = patch_size;
    lib.patches.resize(keep.size() * static_cast<std::size_t>(patch_size) * patch_size);
    lib.centers.resize(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const Center& c = grid[keep[r]];
        double* dst = &lib.patches[r * static_cast<std::size_t>(patch_size) * patch_size];
        extract_patch(images[c.image], c.x, c.y, patch_size, dst);
        lib.centers[r] = dst[half * patch_size + half];
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
        lib.source_meta.push_back("image[" + std::to_string(i) + "] " +
                                  std::to_string(images[i].width) + "x" +
                                  std::to_string(images[i].height) + " stride " +
                                  std::to_string(stride));
    }
    return lib;
}

void save_library(const PatchLibrary& lib, const std::string& path) {
    lib.validate();
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("cannot open " + path + " for writing");
        std::vector<unsigned char> buf(lib.patches.size() * 8);
        for (std::size_t i = 0; i < lib.patches.size(); ++i) {
            const auto bits = std::bit_cast<std::uint64_t>(lib.patches[i]);
            for (int b = 0; b < 8; ++b) {
                buf[8 * i + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
            }
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out) throw io_error("write failure on " + path);
    }
    nlohmann::json header;
    header["patch_size"] = lib.patch_size;
    header["count"] = lib.count();
    header["provenance"] = lib.source_meta;
    std::ofstream out(path + ".json");
    if (!out) throw io_error("cannot open " + path + ".json for writing");
    out << header.dump() << "\n";
    if (!out) throw io_error("write failure on " + path + ".json");
}

PatchLibrary load_library(const std::string& path) {
    nlohmann::json header;
    {
        std::ifstream in(path + ".json");
        if (!in) throw io_error("cannot open " + path + ".json");
        try {
            header = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw format_error("malformed JSON in " + path + ".json: " + e.what());
        }
    }
    for (const char* key : {"patch_size", "count"}) {
        if (!header.contains(key)) {
            throw format_error("library header " + path + ".json missing field '" + key + "'");
        }
    }
    PatchLibrary lib;
    lib.patch_size = header.at("patch_size").get<int>();
    const auto n = header.at("count").get<std::int64_t>();
    if (lib.patch_size < 1 || lib.patch_size % 2 == 0 || n < 1) {
        throw format_error("library header " + path + ".json has invalid patch_size/count");
    }
    if (header.contains("provenance")) {
        lib.source_meta = header.at("provenance").get<std::vector<std::string>>();
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    const std::size_t values = static_cast<std::size_t>(n) * lib.patch_size * lib.patch_size;
    std::vector<unsigned char> buf(values * 8);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
        throw format_error("truncated patch data in " + path);
    }
    lib.patches.resize(values);
    for (std::size_t i = 0; i < values; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[8 * i + b]) << (8 * b);
        lib.patches[i] = std::bit_cast<double>(bits);
    }
    lib.centers.resize(n);
    const int half = lib.patch_size / 2;
    for (std::int64_t r = 0; r < n; ++r) {
        lib.centers[r] = lib.patch(r)[half * lib.patch_size + half];
    }
    lib.validate();
    return lib;
}

}  // namespace mdf
