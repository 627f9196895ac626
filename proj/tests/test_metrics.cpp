#include <doctest.h>

#include <cmath>
#include <random>

#include "tumorsynth/error.hpp"
#include "tumorsynth/metrics.hpp"
#include "tumorsynth/volume_io.hpp"

using namespace tumorsynth;

namespace {

constexpr double kPi = 3.14159265358979323846;

label_grid ball_mask(std::int32_t n, double radius, voxel_t c, spacing_t sp = {1, 1, 1}) {
    label_grid m(dim3_t{n, n, n}, sp, 0);
    for (std::int32_t z = 0; z < n; ++z)
        for (std::int32_t y = 0; y < n; ++y)
            for (std::int32_t x = 0; x < n; ++x) {
                const double dx = x - c.x, dy = y - c.y, dz = z - c.z;
                if (dx * dx + dy * dy + dz * dz <= radius * radius) m.at(x, y, z) = 1;
            }
    return m;
}

std::vector<reader_row> rows_of(int real_right, int real_synth, int real_unsure,
                                int synth_right, int synth_real, int synth_unsure) {
    std::vector<reader_row> rows;
    auto add = [&](int k, sample_truth t, sample_call c) {
        for (int i = 0; i < k; ++i) rows.push_back({t, c});
    };
    add(real_right, sample_truth::real, sample_call::real);
    add(real_synth, sample_truth::real, sample_call::synthetic);
    add(real_unsure, sample_truth::real, sample_call::unsure);
    add(synth_right, sample_truth::synthetic, sample_call::synthetic);
    add(synth_real, sample_truth::synthetic, sample_call::real);
    add(synth_unsure, sample_truth::synthetic, sample_call::unsure);
    return rows;
}

} // namespace

TEST_CASE("dsc basics") {
    const dim3_t d{4, 3, 2};
    label_grid a(d, spacing_t{1, 1, 1}, 0), b(d, spacing_t{1, 1, 1}, 0);
    CHECK(dsc(a, b) == 1.0); // both empty

    a.at(0, 0, 0) = 1;
    a.at(1, 0, 0) = 1;
    CHECK(dsc(a, b) == 0.0);
    b.at(1, 0, 0) = 1;
    b.at(2, 0, 0) = 1;
    CHECK(dsc(a, b) == 0.5); // one shared voxel of two each
    CHECK(dsc(a, b) == dsc(b, a));
    CHECK(dsc(a, a) == 1.0);

    label_grid huge(dim3_t{5, 5, 5}, spacing_t{1, 1, 1}, 0);
    CHECK_THROWS_AS(dsc(a, huge), error);
}

TEST_CASE("nsd parallel plates hit exactly at their separation") {
    const dim3_t d{6, 6, 7};
    label_grid a(d, spacing_t{1, 1, 1}, 0), b(d, spacing_t{1, 1, 1}, 0);
    for (std::int32_t y = 0; y < 6; ++y)
        for (std::int32_t x = 0; x < 6; ++x) {
            a.at(x, y, 0) = 1;
            b.at(x, y, 5) = 1;
        }
    CHECK(nsd(a, b, {2.0}) == 0.0);
    CHECK(nsd(a, b, {4.999}) == 0.0);
    CHECK(nsd(a, b, {5.0}) == 1.0); // inclusive tolerance
    CHECK(nsd(a, a, {0.0}) == 1.0);

    const label_grid empty(d, spacing_t{1, 1, 1}, 0);
    CHECK(nsd(empty, empty, {2.0}) == 1.0);
    CHECK(nsd(a, empty, {2.0}) == 0.0);
    CHECK(nsd(empty, b, {2.0}) == 0.0);

    CHECK_THROWS_AS(nsd(a, b, {-1.0}), error);
    label_grid respaced = b;
    respaced.spacing = {2, 2, 2};
    CHECK_THROWS_AS(nsd(a, respaced, {2.0}), error);
}

TEST_CASE("overlap metrics are symmetric and bounded on random masks") {
    std::mt19937_64 gen(99);
    std::bernoulli_distribution coin(0.3);
    const dim3_t d{12, 11, 10};
    for (int trial = 0; trial < 10; ++trial) {
        label_grid a(d, spacing_t{1, 1, 1}, 0), b(d, spacing_t{1, 1, 1}, 0);
        for (auto& v : a.data) v = coin(gen);
        for (auto& v : b.data) v = coin(gen);
        const double ds = dsc(a, b);
        CHECK(ds >= 0.0);
        CHECK(ds <= 1.0);
        CHECK(ds == dsc(b, a));
        CHECK(dsc(a, a) == 1.0);
        const double ns = nsd(a, b, {1.5});
        CHECK(ns >= 0.0);
        CHECK(ns <= 1.0);
        CHECK(ns == nsd(b, a, {1.5}));
        CHECK(nsd(a, a, {0.0}) == 1.0);
        CHECK(nsd(a, b, {3.0}) >= ns); // monotone in tolerance
    }
}

TEST_CASE("nsd distance-transform path matches brute force") {
    const std::int32_t n = 56;
    const label_grid a = ball_mask(n, 25.0, {28, 28, 28});
    const label_grid b = ball_mask(n, 24.0, {28, 28, 28});

    const label_grid ba = derive_boundary(a);
    const label_grid bb = derive_boundary(b);
    std::vector<voxel_t> va, vb;
    for (std::int32_t z = 0; z < n; ++z)
        for (std::int32_t y = 0; y < n; ++y)
            for (std::int32_t x = 0; x < n; ++x) {
                if (ba.at(x, y, z)) va.push_back({x, y, z});
                if (bb.at(x, y, z)) vb.push_back({x, y, z});
            }
    REQUIRE(va.size() + vb.size() > 10000); // forces the transform path

    const double tau = 1.5, tau2 = tau * tau;
    auto hits = [&](const std::vector<voxel_t>& from, const std::vector<voxel_t>& to) {
        std::int64_t h = 0;
        for (const voxel_t& p : from)
            for (const voxel_t& q : to) {
                const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
                if (dx * dx + dy * dy + dz * dz <= tau2) {
                    ++h;
                    break;
                }
            }
        return h;
    };
    const double expected = static_cast<double>(hits(va, vb) + hits(vb, va)) /
                            static_cast<double>(va.size() + vb.size());
    CHECK(nsd(a, b, {tau}) == expected);
}

TEST_CASE("reader panel scoring") {
    SUBCASE("mixed panel") {
        const reader_scores s = reader_metrics(rows_of(19, 1, 0, 9, 11, 0));
        CHECK(s.sensitivity == doctest::Approx(0.95).epsilon(1e-12));
        CHECK(s.specificity == doctest::Approx(0.45).epsilon(1e-12));
        CHECK(s.accuracy == doctest::Approx(0.70).epsilon(1e-12));
    }
    SUBCASE("reader who calls everything real") {
        const reader_scores s = reader_metrics(rows_of(25, 0, 0, 0, 25, 0));
        CHECK(s.sensitivity == 1.0);
        CHECK(s.specificity == 0.0);
        CHECK(s.accuracy == 0.5);
    }
    SUBCASE("unsure rows count against their class by default") {
        const reader_scores s = reader_metrics(rows_of(2, 0, 1, 1, 0, 1));
        CHECK(s.sensitivity == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(s.specificity == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s.accuracy == doctest::Approx(0.6).epsilon(1e-12));
    }
    SUBCASE("the drop policy removes unsure rows") {
        const reader_scores s = reader_metrics(rows_of(2, 0, 1, 1, 0, 1), unsure_policy::drop);
        CHECK(s.sensitivity == 1.0);
        CHECK(s.specificity == 1.0);
        CHECK(s.accuracy == 1.0);
    }
    SUBCASE("degenerate panels") {
        CHECK_THROWS_AS(reader_metrics({}), error);
        CHECK_THROWS_AS(reader_metrics(rows_of(0, 0, 2, 0, 0, 3), unsure_policy::drop), error);
        const reader_scores s = reader_metrics(rows_of(4, 1, 0, 0, 0, 0));
        CHECK(s.sensitivity == 0.8);
        CHECK(std::isnan(s.specificity));
        CHECK(s.accuracy == 0.8);
    }
}

TEST_CASE("feature extraction on constructed masks") {
    SUBCASE("constant intensity collapses the histogram") {
        const dim3_t d{4, 4, 4};
        const hu_grid img(d, spacing_t{1, 1, 1}, 106);
        label_grid m(d, spacing_t{1, 1, 1}, 0);
        for (std::int32_t z = 1; z < 3; ++z)
            for (std::int32_t y = 1; y < 3; ++y)
                for (std::int32_t x = 1; x < 3; ++x) m.at(x, y, z) = 1;
        const feature_vector f = extract_features(img, m);
        CHECK(f.mean == 106.0);
        CHECK(f.stddev == 0.0);
        CHECK(f.median == 106.0);
        CHECK(f.p10 == 106.0);
        CHECK(f.p90 == 106.0);
        CHECK(f.entropy == 0.0);
        CHECK(f.volume_mm3 == 8.0);
        CHECK(f.surface_area_mm2 == 24.0);
    }

    SUBCASE("single voxel geometry") {
        const dim3_t d{3, 3, 3};
        const hu_grid img(d, spacing_t{1, 1, 1}, 0);
        label_grid m(d, spacing_t{1, 1, 1}, 0);
        m.at(1, 1, 1) = 1;
        const feature_vector f = extract_features(img, m);
        CHECK(f.volume_mm3 == 1.0);
        CHECK(f.surface_area_mm2 == 6.0);
        const double sph = std::pow(kPi, 1.0 / 3.0) * std::pow(6.0, 2.0 / 3.0) / 6.0;
        CHECK(f.sphericity == doctest::Approx(sph).epsilon(1e-12));
        CHECK(f.equivalent_diameter_mm ==
              doctest::Approx(2.0 * std::cbrt(3.0 / (4.0 * kPi))).epsilon(1e-12));
        CHECK(f.elongation == 1.0); // degenerate mass distribution

        label_grid aniso(d, spacing_t{1, 2, 3}, 0);
        aniso.at(1, 1, 1) = 1;
        const feature_vector g = extract_features(img, aniso);
        CHECK(g.volume_mm3 == 6.0);
        CHECK(g.surface_area_mm2 == 22.0); // 2*(6 + 3 + 2)
    }

    SUBCASE("intensity statistics of a ten-voxel ramp") {
        const dim3_t d{10, 1, 1};
        hu_grid img(d, spacing_t{1, 1, 1}, 0);
        label_grid m(d, spacing_t{1, 1, 1}, 1);
        for (std::int32_t x = 0; x < 10; ++x) img.at(x, 0, 0) = static_cast<std::int16_t>(x + 1);
        const feature_vector f = extract_features(img, m);
        CHECK(f.mean == doctest::Approx(5.5).epsilon(1e-12));
        CHECK(f.stddev == doctest::Approx(std::sqrt(8.25)).epsilon(1e-12));
        CHECK(f.median == 5.5);
        CHECK(f.p10 == 1.0); // nearest-rank, ceil(0.1*10) = 1st
        CHECK(f.p90 == 9.0);
        CHECK(f.entropy == doctest::Approx(std::log2(10.0)).epsilon(1e-12));
        CHECK(f.elongation < 1e-6); // a line has no second axis
    }

    SUBCASE("an even two-value split carries exactly one bit") {
        const dim3_t d{8, 1, 1};
        hu_grid img(d, spacing_t{1, 1, 1}, 0);
        label_grid m(d, spacing_t{1, 1, 1}, 1);
        for (std::int32_t x = 4; x < 8; ++x) img.at(x, 0, 0) = 100;
        CHECK(extract_features(img, m).entropy == 1.0);
    }

    SUBCASE("values outside the mask are ignored") {
        const dim3_t d{5, 5, 5};
        hu_grid img(d, spacing_t{1, 1, 1}, 55);
        const label_grid m = ball_mask(5, 1.5, {2, 2, 2});
        const feature_vector f = extract_features(img, m);
        hu_grid scrambled = img;
        for (std::int32_t z = 0; z < 5; ++z)
            for (std::int32_t y = 0; y < 5; ++y)
                for (std::int32_t x = 0; x < 5; ++x)
                    if (!m.at(x, y, z)) scrambled.at(x, y, z) = static_cast<std::int16_t>(
                        -900 + 13 * x + 7 * y + z);
        const feature_vector g = extract_features(scrambled, m);
        CHECK(f.mean == g.mean);
        CHECK(f.stddev == g.stddev);
        CHECK(f.entropy == g.entropy);
        CHECK(f.volume_mm3 == g.volume_mm3);
        CHECK(f.surface_area_mm2 == g.surface_area_mm2);
        CHECK(f.sphericity == g.sphericity);
        CHECK(f.elongation == g.elongation);
    }

    SUBCASE("failure modes") {
        const dim3_t d{3, 3, 3};
        const hu_grid img(d, spacing_t{1, 1, 1}, 0);
        const label_grid empty(d, spacing_t{1, 1, 1}, 0);
        CHECK_THROWS_AS(extract_features(img, empty), error);
        const label_grid off(dim3_t{4, 4, 4}, spacing_t{1, 1, 1}, 1);
        CHECK_THROWS_AS(extract_features(img, off), error);
    }

    SUBCASE("named export order is the CSV contract") {
        const std::vector<std::string> want{
            "mean", "std", "median", "p10", "p90", "entropy", "volume_mm3",
            "surface_area_mm2", "sphericity", "equivalent_diameter_mm", "elongation"};
        const auto named = feature_vector{}.named();
        REQUIRE(named.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(named[i].first == want[i]);
    }
}
