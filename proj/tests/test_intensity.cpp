#include <doctest.h>

#include <cmath>

#include "tumorsynth/error.hpp"
#include "tumorsynth/intensity.hpp"

using namespace tumorsynth;

namespace {

constexpr double kPi = 3.14159265358979323846;

tumor_map empty_tumor(dim3_t d) {
    tumor_map tm;
    tm.density = label_grid(d, spacing_t{1, 1, 1}, 0);
    tm.phase = label_grid(d, spacing_t{1, 1, 1}, 0);
    return tm;
}

void set_voxel(tumor_map& tm, voxel_t v, std::uint8_t density, phase_code p) {
    tm.density.at(v) = density;
    tm.phase.at(v) = static_cast<std::uint8_t>(p);
}

intensity_model flat_model(double base, double sigma = 0.0, int halfwidth = 0) {
    intensity_model m;
    m.hu_base = base;
    m.texture_sigma = sigma;
    m.blend_halfwidth = halfwidth;
    return m;
}

double mean_of(const std::vector<float>& v) {
    double s = 0.0;
    for (float x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

TEST_CASE("model validation") {
    CHECK_NOTHROW(validate_model(intensity_model{}));
    CHECK_THROWS_AS(validate_model(intensity_model{}, true), error); // base unresolved

    intensity_model m;
    m.hu_base = 200.0; // above hu_range_max
    CHECK_THROWS_AS(validate_model(m), error);
    m = intensity_model{};
    m.hu_range_min = 100.0;
    m.hu_range_max = 50.0;
    CHECK_THROWS_AS(validate_model(m), error);
    m = intensity_model{};
    m.texture_sigma = -1.0;
    CHECK_THROWS_AS(validate_model(m), error);
    m = intensity_model{};
    m.texture_scales = {};
    CHECK_THROWS_AS(validate_model(m), error);
    m = intensity_model{};
    m.texture_scales = {4, 0};
    CHECK_THROWS_AS(validate_model(m), error);
    m = intensity_model{};
    m.blend_halfwidth = -1;
    CHECK_THROWS_AS(validate_model(m), error);
    m = intensity_model{};
    m.capsule_min_radius_mm = -2.0;
    CHECK_THROWS_AS(validate_model(m), error);
}

TEST_CASE("value noise statistics and determinism") {
    const dim3_t d{48, 48, 48};
    const std::vector<int> scales{2, 4, 8};

    const grid3<float> zero = value_noise(d, scales, 0.0, counter_rng(9));
    for (float v : zero.data) CHECK(v == 0.0f);

    const grid3<float> a = value_noise(d, scales, 15.0, counter_rng(9));
    const grid3<float> b = value_noise(d, scales, 15.0, counter_rng(9));
    CHECK(a.data == b.data);
    const grid3<float> c = value_noise(d, scales, 15.0, counter_rng(10));
    CHECK(a.data != c.data);

    const double mean = mean_of(a.data);
    double var = 0.0;
    for (float v : a.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(a.data.size());
    CHECK(std::abs(mean) < 1e-3);
    CHECK(std::abs(std::sqrt(var) - 15.0) < 1e-3);

    CHECK_THROWS_AS(value_noise(d, {}, 15.0, counter_rng(1)), error);
    CHECK_THROWS_AS(value_noise(d, {0}, 15.0, counter_rng(1)), error);
}

TEST_CASE("value noise is smooth at coarse scales and white at scale 1") {
    const dim3_t d{48, 48, 48};
    auto lag4_corr = [&](const grid3<float>& g) {
        double m = mean_of(g.data), num = 0.0, den = 0.0;
        std::int64_t pairs = 0;
        for (std::int32_t z = 0; z < d.nz; ++z)
            for (std::int32_t y = 0; y < d.ny; ++y)
                for (std::int32_t x = 0; x < d.nx; ++x) {
                    const double v = g.at(x, y, z) - m;
                    den += v * v;
                    if (x + 4 < d.nx) {
                        num += v * (g.at(x + 4, y, z) - m);
                        ++pairs;
                    }
                }
        return (num / pairs) / (den / d.total());
    };
    const grid3<float> coarse = value_noise(d, {8}, 10.0, counter_rng(77));
    const grid3<float> white = value_noise(d, {1}, 10.0, counter_rng(77));
    CHECK(lag4_corr(coarse) > 0.2);
    CHECK(std::abs(lag4_corr(white)) < 0.05);
}

TEST_CASE("rendering an empty tumor is a no-op") {
    const dim3_t d{6, 5, 4};
    hu_grid ct(d, spacing_t{1, 1, 1}, 0);
    for (std::size_t i = 0; i < ct.data.size(); ++i)
        ct.data[i] = static_cast<std::int16_t>(static_cast<int>(7 * i % 301) - 50);
    const hu_grid out = render(ct, empty_tumor(d), flat_model(106.0), counter_rng(4));
    CHECK(out.data == ct.data);
}

TEST_CASE("hard-edged single-voxel lesions replace exactly one voxel") {
    const dim3_t d{7, 7, 7};
    hu_grid ct(d, spacing_t{1, 1, 1}, 0);
    for (std::size_t i = 0; i < ct.data.size(); ++i)
        ct.data[i] = static_cast<std::int16_t>(static_cast<int>(i % 90) - 20);

    tumor_map tm = empty_tumor(d);
    set_voxel(tm, {3, 3, 3}, tumor_map::kSaturated, phase_code::quiescent);
    const hu_grid out = render(ct, tm, flat_model(106.0), counter_rng(4));
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t y = 0; y < d.ny; ++y)
            for (std::int32_t x = 0; x < d.nx; ++x) {
                if (x == 3 && y == 3 && z == 3)
                    CHECK(out.at(x, y, z) == 106);
                else
                    CHECK(out.at(x, y, z) == ct.at(x, y, z));
            }

    SUBCASE("partial density blends toward the background") {
        tumor_map half = empty_tumor(d);
        set_voxel(half, {3, 3, 3}, 5, phase_code::active);
        hu_grid flat(d, spacing_t{1, 1, 1}, 60);
        const hu_grid o = render(flat, half, flat_model(106.0), counter_rng(4));
        CHECK(o.at(3, 3, 3) == 83); // 0.5*60 + 0.5*106
    }

    SUBCASE("necrotic voxels read darker") {
        tumor_map nec = empty_tumor(d);
        set_voxel(nec, {3, 3, 3}, tumor_map::kSaturated, phase_code::necrotic);
        const hu_grid o = render(ct, nec, flat_model(106.0), counter_rng(4));
        CHECK(o.at(3, 3, 3) == 76); // 106 - 30
    }

    SUBCASE("determinism") {
        const hu_grid o1 = render(ct, tm, flat_model(106.0, 15.0, 2), counter_rng(11));
        const hu_grid o2 = render(ct, tm, flat_model(106.0, 15.0, 2), counter_rng(11));
        CHECK(o1.data == o2.data);
    }

    SUBCASE("unresolved base and bad dims are rejected") {
        intensity_model m; // hu_base not set
        CHECK_THROWS_AS(render(ct, tm, m, counter_rng(4)), error);
        const hu_grid small(dim3_t{3, 3, 3}, spacing_t{1, 1, 1}, 0);
        CHECK_THROWS_AS(render(small, tm, flat_model(106.0), counter_rng(4)), error);
    }
}

TEST_CASE("cosine shell around a point lesion matches the taper formula") {
    const dim3_t d{9, 9, 9};
    const hu_grid ct(d, spacing_t{1, 1, 1}, 10);
    tumor_map tm = empty_tumor(d);
    set_voxel(tm, {4, 4, 4}, tumor_map::kSaturated, phase_code::quiescent);

    const int h = 2;
    const hu_grid out = render(ct, tm, flat_model(106.0, 0.0, h), counter_rng(4));
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t y = 0; y < d.ny; ++y)
            for (std::int32_t x = 0; x < d.nx; ++x) {
                const double dist = std::sqrt(double(x - 4) * (x - 4) + double(y - 4) * (y - 4) +
                                              double(z - 4) * (z - 4));
                if (dist >= h + 1) {
                    CHECK(out.at(x, y, z) == 10);
                    continue;
                }
                const double w = 0.5 * (1.0 + std::cos(kPi * dist / (h + 1)));
                const auto expect =
                    static_cast<std::int16_t>(std::lround((1.0 - w) * 10.0 + w * 106.0));
                CHECK(out.at(x, y, z) == expect);
            }
}

TEST_CASE("textured full-grid lesion keeps its mean near the base tone") {
    const dim3_t d{9, 9, 9};
    const hu_grid ct(d, spacing_t{1, 1, 1}, -40);
    tumor_map tm = empty_tumor(d);
    for (auto& v : tm.density.data) v = tumor_map::kSaturated;
    for (auto& v : tm.phase.data) v = static_cast<std::uint8_t>(phase_code::quiescent);

    const hu_grid out = render(ct, tm, flat_model(106.0, 15.0, 0), counter_rng(21));
    double mean = 0.0;
    std::int16_t lo = kHuMax, hi = kHuMin;
    for (std::int16_t v : out.data) {
        mean += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    mean /= static_cast<double>(out.data.size());
    CHECK(mean == doctest::Approx(106.0).epsilon(0.01));
    CHECK(lo < 106 - 5); // the texture is actually there
    CHECK(hi > 106 + 5);
}

TEST_CASE("large lesions grow a brightened capsule rim") {
    const std::int32_t n = 27;
    const dim3_t d{n, n, n};
    const hu_grid ct(d, spacing_t{1, 1, 1}, 50);
    tumor_map tm = empty_tumor(d);
    const voxel_t c{13, 13, 13};
    std::int64_t count = 0;
    for (std::int32_t z = 0; z < n; ++z)
        for (std::int32_t y = 0; y < n; ++y)
            for (std::int32_t x = 0; x < n; ++x) {
                const double dx = x - c.x, dy = y - c.y, dz = z - c.z;
                if (dx * dx + dy * dy + dz * dz <= 10.2 * 10.2) {
                    set_voxel(tm, {x, y, z}, tumor_map::kSaturated, phase_code::quiescent);
                    ++count;
                }
            }
    const double r_mm = std::cbrt(3.0 * static_cast<double>(count) / (4.0 * kPi));
    REQUIRE(r_mm >= 10.0); // gate must be open for this geometry

    const hu_grid out = render(ct, tm, flat_model(106.0, 0.0, 0), counter_rng(4));
    std::int64_t rim_voxels = 0;
    for (std::int32_t z = 0; z < n; ++z)
        for (std::int32_t y = 0; y < n; ++y)
            for (std::int32_t x = 0; x < n; ++x) {
                if (tm.density.at(x, y, z) >= 1) {
                    CHECK(out.at(x, y, z) == 106);
                    continue;
                }
                bool touches = false;
                for (int k = 0; k < 6 && !touches; ++k)
                    touches = tm.density.at_or(x + k6Neighbors[k][0], y + k6Neighbors[k][1],
                                               z + k6Neighbors[k][2], 0) >= 1;
                if (touches) {
                    CHECK(out.at(x, y, z) == 65); // ct + capsule_delta
                    ++rim_voxels;
                } else {
                    CHECK(out.at(x, y, z) == 50);
                }
            }
    CHECK(rim_voxels > 100);

    SUBCASE("the gate respects capsule_enabled") {
        intensity_model m = flat_model(106.0, 0.0, 0);
        m.capsule_enabled = false;
        const hu_grid plain = render(ct, tm, m, counter_rng(4));
        for (std::int32_t z = 0; z < n; ++z)
            for (std::int32_t y = 0; y < n; ++y)
                for (std::int32_t x = 0; x < n; ++x)
                    if (tm.density.at(x, y, z) == 0) CHECK(plain.at(x, y, z) == 50);
    }
}
