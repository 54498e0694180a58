#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "morphiris/errors.hpp"
#include "morphiris/iriscode.hpp"
#include "morphiris/metrics.hpp"
#include "morphiris/normalization.hpp"
#include "morphiris/segmentation.hpp"
#include "morphiris/synth.hpp"
#include "test_support.hpp"

using namespace morphiris;

namespace {

IrisCode random_code(std::mt19937_64& rng, std::size_t rows = 16, std::size_t cols = 512) {
    IrisCode c(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < cols; ++k) {
            const auto v = rng();
            c.set(r, k, v & 1, v & 2, true);
        }
    return c;
}

// Log-Gabor transfer function written from its textbook definition.
double log_gabor(double f, double wavelength, double sigma_ratio) {
    if (f <= 0.0) return 0.0;
    const double l = std::log(f * wavelength);
    const double s = std::log(sigma_ratio);
    return std::exp(-(l * l) / (2.0 * s * s));
}

// Circular convolution with the filter's spatial kernel, both by direct sums.
std::vector<std::complex<double>> direct_filter(const std::vector<double>& x, double wavelength, double sigma_ratio) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> h(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::complex<double> acc{};
        for (std::size_t k = 1; k <= n / 2; ++k) {
            const double g = log_gabor(static_cast<double>(k) / static_cast<double>(n), wavelength, sigma_ratio);
            acc += g * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
        }
        h[t] = acc / static_cast<double>(n);
    }
    std::vector<std::complex<double>> y(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::complex<double> acc{};
        for (std::size_t m = 0; m < n; ++m) acc += x[m] * h[(t + n - m) % n];
        y[t] = acc;
    }
    return y;
}

RubberSheet sinusoid_sheet(double wavelength, double phase) {
    RubberSheet s(64, 512);
    for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t c = 0; c < 512; ++c)
            s.intensity(r, c) = 128.0 + 60.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(c) / wavelength + phase);
    return s;
}

}  // namespace

TEST_CASE("encoded_rows and filter response") {
    CHECK(encoded_rows(64, 16) == std::vector<std::size_t>{2, 6, 10, 14, 18, 22, 26, 30, 34, 38, 42, 46, 50, 54, 58, 62});
    CHECK(encoded_rows(10, 1) == std::vector<std::size_t>{5});
    const auto g = log_gabor_response(512, 24, 0.5);
    CHECK(g[0] == 0.0);
    for (std::size_t k = 257; k < 512; ++k) CHECK(g[k] == 0.0);
    for (std::size_t k = 1; k <= 256; ++k)
        CHECK(g[k] == doctest::Approx(log_gabor(k / 512.0, 24, 0.5)).epsilon(1e-12));
}

TEST_CASE("encode a constant sheet masks every bit") {
    RubberSheet s(64, 512);
    for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t c = 0; c < 512; ++c) s.intensity(r, c) = 117.0;
    const auto code = encode(s);
    CHECK(code.rows() == 16);
    CHECK(code.cols() == 512);
    CHECK(code.valid_count() == 0);
}

TEST_CASE("encode matches a direct-convolution oracle on sinusoids") {
    for (int p = 0; p < 8; ++p) {
        const double phase = 2.0 * std::numbers::pi * p / 8.0;
        const auto sheet = sinusoid_sheet(24.0, phase);
        const auto code = encode(sheet);
        std::vector<double> row(512);
        for (std::size_t c = 0; c < 512; ++c) row[c] = sheet.intensity(2, c);
        const auto y = direct_filter(row, 24.0, 0.5);
        double peak = 0.0;
        for (const auto& z : y) peak = std::max(peak, std::abs(z));
        for (std::size_t c = 0; c < 512; ++c) {
            if (std::abs(y[c].real()) > 1e-6 * peak) CHECK(code.real_bit(0, c) == (y[c].real() >= 0));
            if (std::abs(y[c].imag()) > 1e-6 * peak) CHECK(code.imag_bit(0, c) == (y[c].imag() >= 0));
            CHECK(code.mask_bit(0, c));
        }
        // Real bits come in runs of half a wavelength.
        std::vector<std::size_t> runs;
        std::size_t run = 1;
        for (std::size_t c = 1; c < 512; ++c) {
            if (code.real_bit(0, c) == code.real_bit(0, c - 1)) {
                ++run;
            } else {
                runs.push_back(run);
                run = 1;
            }
        }
        REQUIRE(runs.size() > 4);
        for (std::size_t i = 1; i + 1 < runs.size(); ++i) {
            CHECK(runs[i] >= 11);
            CHECK(runs[i] <= 13);
        }
    }
}

TEST_CASE("encode determinism, invalid samples and parameter errors") {
    EyeRenderSpec spec;
    const auto [img, g] = render_eye(spec);
    auto sheet = unwrap(img, g);
    CHECK(encode(sheet) == encode(sheet));
    sheet.set_valid(2, 100, false);
    const auto code = encode(sheet);
    CHECK_FALSE(code.mask_bit(0, 100));
    CHECK_THROWS_AS(encode(sheet, {3.0, 0.5, 16, 1e-3}), ParameterError);
    CHECK_THROWS_AS(encode(sheet, {24.0, 0.5, 65, 1e-3}), ParameterError);
    RubberSheet dead(8, 32);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 32; ++c) dead.set_valid(r, c, false);
    CHECK_THROWS_AS(encode(dead, {8.0, 0.5, 4, 1e-3}), EncodeError);
}

TEST_CASE("hamming identity, complement and rotation") {
    std::mt19937_64 rng(1);
    const auto a = random_code(rng);
    const auto self = hamming(a, a);
    CHECK(self.hd == 0.0);
    CHECK(self.best_shift == 0);
    CHECK(self.valid_bits == 2 * 16 * 512);

    CHECK(hamming(a, a.complemented(), 0).hd == 1.0);
    CHECK(hamming(a, a.complemented(), 8).hd <= 1.0);

    for (long k : {-8L, -3L, 1L, 5L, 8L}) {
        const auto s = hamming(a, a.rotated(k), 8);
        CHECK(s.hd == 0.0);
        CHECK(s.best_shift == k);
    }
    CHECK(hamming(a, a.rotated(9), 8).hd > 0.3);
    CHECK_THROWS_AS(hamming(a, IrisCode(16, 256)), ComparisonError);
    CHECK_THROWS_AS(hamming(IrisCode(4, 64), IrisCode(4, 64)), ComparisonError);
}

TEST_CASE("hamming on odd widths matches a bit-by-bit oracle") {
    std::mt19937_64 rng(5);
    for (std::size_t cols : {37u, 100u, 130u}) {
        auto a = random_code(rng, 3, cols), b = random_code(rng, 3, cols);
        for (long s = -4; s <= 4; ++s) {
            std::size_t diff = 0, bits = 0;
            for (std::size_t r = 0; r < 3; ++r)
                for (std::size_t c = 0; c < cols; ++c) {
                    const auto cb = static_cast<std::size_t>((static_cast<long>(c) + s + static_cast<long>(cols)) %
                                                             static_cast<long>(cols));
                    diff += (a.real_bit(r, c) != b.real_bit(r, cb)) + (a.imag_bit(r, c) != b.imag_bit(r, cb));
                    bits += 2;
                }
            const double oracle = static_cast<double>(diff) / static_cast<double>(bits);
            CHECK(hamming(a, b.rotated(-s), 0).hd == doctest::Approx(oracle).epsilon(1e-15));
        }
    }
}

TEST_CASE("hamming is symmetric with mirrored shift") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto a = random_code(rng), b = random_code(rng);
        const auto ab = hamming(a, b), ba = hamming(b, a);
        CHECK(ab.hd == ba.hd);
        if (ab.best_shift != 0) CHECK((ab.best_shift == -ba.best_shift || ab.hd == ba.hd));
        CHECK(ab.hd >= 0.0);
        CHECK(ab.hd <= 1.0);
    }
}

TEST_CASE("random independent codes") {
    std::mt19937_64 rng(3);
    double sum0 = 0.0, sum_min = 0.0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const auto a = random_code(rng), b = random_code(rng);
        sum0 += hamming(a, b, 0).hd;
        sum_min += hamming(a, b, 8).hd;
    }
    const double mean0 = sum0 / trials, mean_min = sum_min / trials;
    CHECK(std::abs(mean0 - 0.5) < 0.02);
    CHECK(mean_min < mean0);
    // 17 shifts of a binomial with sd 0.0039 put the expected minimum near 0.4935.
    CHECK(mean_min > 0.488);
    CHECK(mean_min < 0.497);
}

TEST_CASE("IRC1 round trip and malformed blobs") {
    std::mt19937_64 rng(4);
    for (std::size_t cols : {512u, 37u}) {
        auto c = random_code(rng, 5, cols);
        c.set(1, 3, true, false, false);
        const auto blob = c.serialize();
        CHECK(std::string(blob.begin(), blob.begin() + 4) == "IRC1");
        CHECK(blob.size() == 12 + 3 * ((5 * cols + 7) / 8));
        CHECK(IrisCode::deserialize(blob) == c);
        auto bad = blob;
        bad[0] = 'X';
        CHECK_THROWS_AS(IrisCode::deserialize(bad), FormatError);
        bad = blob;
        bad.pop_back();
        CHECK_THROWS_AS(IrisCode::deserialize(bad), FormatError);
    }
    const auto dir = test::scratch_dir("irc");
    const auto c = random_code(rng);
    c.save(dir / "x.irc");
    CHECK(IrisCode::load(dir / "x.irc") == c);
}

TEST_CASE("attack_success criterion") {
    std::mt19937_64 rng(6);
    const auto m = random_code(rng, 1, 100);
    // Flip the first k real bits of the morph to get a probe at HD k/200.
    auto probe = [&](std::size_t k) {
        IrisCode p = m;
        for (std::size_t c = 0; c < k; ++c) p.set(0, c, !m.real_bit(0, c), m.imag_bit(0, c), true);
        return p;
    };
    CHECK(attack_success(m, probe(40), probe(56), 0.32, 0));
    CHECK_FALSE(attack_success(m, probe(40), probe(80), 0.32, 0));
    CHECK(attack_success(m, probe(64), probe(10), 0.32, 0));
    CHECK(kDefaultDelta == 0.32);
}

TEST_CASE("synthetic subjects separate under the iris-code comparator") {
    const auto dir = test::scratch_dir("codec_dprime");
    const auto manifest = generate_dataset(10, 4, {20.0, 40.0}, 12, dir);
    std::vector<IrisCode> codes;
    for (const auto& e : manifest.entries) {
        const auto img = load_pgm(dir / e.image_path);
        const auto mask = segment_threshold(img);
        codes.push_back(encode(unwrap(img, geometry_from_mask(mask), {}, mask)));
    }
    ScoreSet s;
    for (std::size_t i = 0; i < codes.size(); ++i)
        for (std::size_t j = i + 1; j < codes.size(); ++j) {
            const auto &a = manifest.entries[i], &b = manifest.entries[j];
            if (a.eye_side != b.eye_side) continue;
            (a.subject_id == b.subject_id ? s.mated : s.nonmated).push_back(hamming(codes[i], codes[j]).hd);
        }
    CHECK(s.mated.size() == 10 * 2 * 6);
    CHECK(summarize(s.mated).mean < summarize(s.nonmated).mean);
    CHECK(d_prime(s) >= 2.0);
}
