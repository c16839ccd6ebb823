#include <doctest.h>

#include <cstdint>
#include <fstream>

#include "mdf/errors.hpp"
#include "mdf/image_io.hpp"
#include "mdf/measurement.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace mdf;
namespace fs = std::filesystem;

namespace {

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("pgm8 load maps bytes directly") {
    const auto p = testutil::scratch_dir() / "basic.pgm";
    write_bytes(p, std::string("P5\n2 2\n255\n") + '\0' + '\x80' + '\xff' + '\x40');
    const Image img = load_image(p.string(), ImageFormat::pgm8);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.pixels == std::vector<double>{0, 128, 255, 64});
}

TEST_CASE("pgm16 endpoints scale exactly") {
    const auto p = testutil::scratch_dir() / "wide.pgm";
    write_bytes(p, std::string("P5\n2 1\n65535\n") + '\xff' + '\xff' + '\0' + '\0');
    const Image img = load_image(p.string(), ImageFormat::pgm16);
    CHECK(img.pixels[0] == 255.0);
    CHECK(img.pixels[1] == 0.0);
}

TEST_CASE("pgm save clips and rounds half-to-even") {
    const auto dir = testutil::scratch_dir();
    Image img(5, 1);
    img.pixels = {100.0, 255.7, -3.0, 100.5, 101.5};
    save_image(img, (dir / "clip.pgm").string(), ImageFormat::pgm8);
    const Image back = load_image((dir / "clip.pgm").string(), ImageFormat::pgm8);
    CHECK(back.pixels == std::vector<double>{100, 255, 0, 100, 102});
}

TEST_CASE("constant image saves to constant bytes") {
    const auto p = testutil::scratch_dir() / "const.pgm";
    save_image(Image(4, 3, 100.0), p.string(), ImageFormat::pgm8);
    std::ifstream in(p, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto header_end = content.find("255\n") + 4;
    for (std::size_t i = header_end; i < content.size(); ++i) {
        CHECK(static_cast<unsigned char>(content[i]) == 100);
    }
}

TEST_CASE("raw-f64 round-trips bit-exactly") {
    const auto p = testutil::scratch_dir() / "rt.f64";
    const Image img = testutil::random_image(7, 5, -10.0, 300.0, 42);
    save_image(img, p.string(), ImageFormat::raw_f64);
    const Image back = load_image(p.string(), ImageFormat::raw_f64);
    CHECK(testutil::bit_identical(img, back));
}

TEST_CASE("pgm16 round-trip through save and load is exact on representable values") {
    const auto p = testutil::scratch_dir() / "rt16.pgm";
    Image img(3, 1);
    img.pixels = {0.0, 255.0, 128.0};
    save_image(img, p.string(), ImageFormat::pgm16);
    const Image back = load_image(p.string(), ImageFormat::pgm16);
    CHECK(back.pixels[0] == 0.0);
    CHECK(back.pixels[1] == 255.0);
    // 128 * 257 = 32896 is exactly representable both ways
    CHECK(back.pixels[2] == doctest::Approx(128.0).epsilon(1e-12));
}

TEST_CASE("save rejects non-finite pixels") {
    Image img(2, 1);
    img.pixels = {1.0, std::nan("")};
    CHECK_THROWS_AS(save_image(img, (testutil::scratch_dir() / "nan.pgm").string(), ImageFormat::pgm8),
                    std::invalid_argument);
}

TEST_CASE("malformed, truncated, and oversized files raise distinct errors") {
    const auto dir = testutil::scratch_dir();
    write_bytes(dir / "bad_magic.pgm", "P6\n2 2\n255\n0000");
    CHECK_THROWS_AS(load_image((dir / "bad_magic.pgm").string(), ImageFormat::pgm8), format_error);

    write_bytes(dir / "short.pgm", std::string("P5\n2 2\n255\n") + "ab");
    CHECK_THROWS_WITH_AS(load_image((dir / "short.pgm").string(), ImageFormat::pgm8),
                         doctest::Contains("truncated"), format_error);

    write_bytes(dir / "huge.pgm", "P5\n99999999 99999999\n255\nx");
    CHECK_THROWS_WITH_AS(load_image((dir / "huge.pgm").string(), ImageFormat::pgm8),
                         doctest::Contains("overflow"), format_error);

    CHECK_THROWS_AS(load_image((dir / "does_not_exist.pgm").string(), ImageFormat::pgm8), io_error);

    write_bytes(dir / "neg.pgm", "P5\n-3 2\n255\nxxxxxx");
    CHECK_THROWS_AS(load_image((dir / "neg.pgm").string(), ImageFormat::pgm8), format_error);
}

TEST_CASE("pgm header comments are handled") {
    const auto p = testutil::scratch_dir() / "comment.pgm";
    write_bytes(p, std::string("P5\n# a comment\n2 1 # trailing\n255\n") + '\x05' + '\x06');
    const Image img = load_image(p.string());
    CHECK(img.pixels == std::vector<double>{5, 6});
}

TEST_CASE("block_downsample basics") {
    CHECK(block_downsample(Image(6, 6, 3.25), 3).pixels == std::vector<double>(4, 3.25));

    Image x(2, 2);
    x.pixels = {0, 2, 4, 6};
    const Image y = block_downsample(x, 2);
    CHECK(y.width == 1);
    CHECK(y.pixels[0] == 3.0);

    CHECK_THROWS_AS(block_downsample(Image(5, 4, 1.0), 2), std::invalid_argument);
}

TEST_CASE("block_downsample matches the scalar oracle exactly") {
    const Image x = testutil::random_image(8, 8, 0.0, 255.0, 7);
    const Image got = block_downsample(x, 4);
    const Image want = oracle::block_mean(x, 4);
    CHECK(testutil::bit_identical(got, want));
}

TEST_CASE("block_downsample is linear") {
    const Image a = testutil::random_image(12, 8, -50.0, 255.0, 1);
    const Image b = testutil::random_image(12, 8, -50.0, 255.0, 2);
    const double alpha = 1.7, beta = -0.4;
    Image combo(12, 8);
    for (std::size_t i = 0; i < combo.size(); ++i) {
        combo.pixels[i] = alpha * a.pixels[i] + beta * b.pixels[i];
    }
    const Image lhs = block_downsample(combo, 4);
    const Image da = block_downsample(a, 4);
    const Image db = block_downsample(b, 4);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double rhs = alpha * da.pixels[i] + beta * db.pixels[i];
        CHECK(lhs.pixels[i] == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("replicate_upsample basics and composition") {
    const Image up = replicate_upsample(Image(1, 1, 5.0), 2);
    CHECK(up.pixels == std::vector<double>(4, 5.0));

    const Image y = testutil::random_image(4, 4, 0.0, 255.0, 3);
    CHECK(testutil::bit_identical(block_downsample(replicate_upsample(y, 3), 3), y));

    const Image z = testutil::random_image(3, 3, 0.0, 255.0, 4);
    CHECK(testutil::bit_identical(replicate_upsample(z, 2), oracle::replicate(z, 2)));
}

TEST_CASE("downsample and upsample satisfy the adjoint identity") {
    // <u, D v> == <(1/L^2) U u, v> pins the transpose convention
    const int L = 3;
    const Image v = testutil::random_image(9, 6, -100.0, 255.0, 5);
    const Image u = testutil::random_image(3, 2, -100.0, 255.0, 6);
    const Image dv = block_downsample(v, L);
    const Image uu = replicate_upsample(u, L);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) lhs += u.pixels[i] * dv.pixels[i];
    for (std::size_t i = 0; i < v.size(); ++i) rhs += uu.pixels[i] / (L * L) * v.pixels[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("sample_sparse counts and determinism") {
    const Image x = testutil::random_image(100, 100, 0.0, 255.0, 8);

    const MeasurementSet full = sample_sparse(x, 1.0, 1);
    const auto& full_mask = std::get<SparseSampleModel>(full.model).mask;
    CHECK(full_mask.count() == 10000);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(full.y.pixels[i] == x.pixels[i]);

    const MeasurementSet m1 = sample_sparse(x, 0.05, 12345);
    const MeasurementSet m2 = sample_sparse(x, 0.05, 12345);
    const MeasurementSet m3 = sample_sparse(x, 0.05, 54321);
    const auto& k1 = std::get<SparseSampleModel>(m1.model).mask.measured;
    const auto& k2 = std::get<SparseSampleModel>(m2.model).mask.measured;
    const auto& k3 = std::get<SparseSampleModel>(m3.model).mask.measured;
    CHECK(k1.size() == 500);
    CHECK(k1 == k2);
    CHECK(k1 != k3);

    CHECK_THROWS_AS(sample_sparse(x, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_sparse(x, 1.5, 1), std::invalid_argument);
}

TEST_CASE("sampling mask stream is pinned across releases") {
    // frozen draw from the documented xoshiro256++ stream; a change here
    // breaks reproducibility of every recorded experiment
    const Image x(4, 4, 1.0);
    const MeasurementSet m = sample_sparse(x, 0.25, 99);
    const auto& mask = std::get<SparseSampleModel>(m.model).mask;
    REQUIRE(mask.count() == 4);
    CHECK(mask.measured == std::vector<std::int64_t>{2, 3, 8, 12});
}

TEST_CASE("mask json round-trip") {
    const auto p = testutil::scratch_dir() / "mask.json";
    SamplingMask mask;
    mask.width = 5;
    mask.height = 4;
    mask.measured = {0, 3, 7, 19};
    save_mask(mask, p.string());
    const SamplingMask back = load_mask(p.string());
    CHECK(back.width == 5);
    CHECK(back.height == 4);
    CHECK(back.measured == mask.measured);

    std::ofstream(p) << "{\"width\": 5, \"height\": 4}";
    CHECK_THROWS_WITH_AS(load_mask(p.string()), doctest::Contains("indices"), format_error);
}

TEST_CASE("mask validation rejects bad index lists") {
    SamplingMask mask;
    mask.width = 3;
    mask.height = 3;
    mask.measured = {2, 2};
    CHECK_THROWS_AS(mask.validate(), std::invalid_argument);
    mask.measured = {2, 9};
    CHECK_THROWS_AS(mask.validate(), std::invalid_argument);
    mask.measured = {0, 8};
    CHECK_NOTHROW(mask.validate());
}
