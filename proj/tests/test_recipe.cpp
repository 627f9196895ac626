#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "tumorsynth/error.hpp"
#include "tumorsynth/recipe.hpp"

using namespace tumorsynth;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct temp_file {
    std::filesystem::path path;

    explicit temp_file(const std::string& tag, const std::string& content) {
        path = std::filesystem::temp_directory_path() /
               ("tumorsynth_recipe_" + tag + "_" + std::to_string(::getpid()) + ".json");
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~temp_file() {
        std::error_code ec;
        std::filesystem::remove(path, ec);
    }
};

} // namespace

TEST_CASE("enum names round trip") {
    CHECK(backend_from_string("cellular_automata") == backend_kind::cellular_automata);
    CHECK(backend_from_string("ca") == backend_kind::cellular_automata);
    CHECK(backend_from_string("handcrafted") == backend_kind::handcrafted);
    CHECK_THROWS_AS(backend_from_string("gan"), error);
    CHECK(std::string(to_string(backend_kind::handcrafted)) == "handcrafted");

    for (organ_kind o : {organ_kind::liver, organ_kind::pancreas, organ_kind::kidney})
        CHECK(organ_from_string(to_string(o)) == o);
    CHECK_THROWS_AS(organ_from_string("spleen"), error);
}

TEST_CASE("lesion recipes survive a JSON round trip") {
    lesion_recipe r;
    r.organ = organ_kind::kidney;
    r.seed_voxel = voxel_t{12, 34, 56};
    r.target_volume_mm3 = 900.0;
    r.rules.p_grow = 0.8;
    r.rules.necrosis_depth = 3;
    r.intensity.hu_base = 75.0;
    r.intensity.hu_range_min = 20.0;
    r.intensity.hu_range_max = 80.0;
    r.mass_effect_strength = 0.33;
    r.rng_seed = 777;

    const nlohmann::json j = to_json(r);
    const lesion_recipe back = recipe_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.seed_voxel == voxel_t{12, 34, 56});
    CHECK(back.rules.p_grow == 0.8);
    CHECK(back.intensity.hu_base == 75.0);
    CHECK(back.rng_seed == 777);

    SUBCASE("handcrafted recipes carry the shape instead of the rules") {
        r.backend = backend_kind::handcrafted;
        r.shape.semiaxes_mm = {9.0, 7.0, 5.0};
        r.shape.elastic_amplitude = 0.25;
        r.shape.multifocal_count = 2;
        const nlohmann::json h = to_json(r);
        CHECK(h.contains("shape"));
        CHECK_FALSE(h.contains("rules"));
        const lesion_recipe hb = recipe_from_json(h);
        CHECK(to_json(hb) == h);
        CHECK(hb.shape.semiaxes_mm == std::array<double, 3>{9.0, 7.0, 5.0});
        CHECK(hb.shape.multifocal_count == 2);
    }
}

TEST_CASE("recipe validation flags each bad field") {
    lesion_recipe r;
    CHECK_NOTHROW(validate_recipe(r));
    r.target_volume_mm3 = 0.0;
    CHECK_THROWS_AS(validate_recipe(r), error);
    r = lesion_recipe{};
    r.level_count = 1;
    CHECK_THROWS_AS(validate_recipe(r), error);
    r = lesion_recipe{};
    r.level_count = 9;
    CHECK_THROWS_AS(validate_recipe(r), error);
    r = lesion_recipe{};
    r.mass_effect_strength = 1.5;
    CHECK_THROWS_AS(validate_recipe(r), error);
    r = lesion_recipe{};
    r.placement_retries = 0;
    CHECK_THROWS_AS(validate_recipe(r), error);
    r = lesion_recipe{};
    r.level_count = 5; // multiplier table no longer matches
    CHECK_THROWS_AS(validate_recipe(r), error);
    r = lesion_recipe{};
    r.backend = backend_kind::handcrafted;
    r.shape.elastic_amplitude = 0.9;
    CHECK_THROWS_AS(validate_recipe(r), error);
    r = lesion_recipe{};
    r.intensity.texture_sigma = -4.0;
    CHECK_THROWS_AS(validate_recipe(r), error);
}

TEST_CASE("malformed recipe JSON is rejected with invalid_config") {
    auto expect_invalid = [](const nlohmann::json& j) {
        try {
            recipe_from_json(j);
            FAIL_CHECK("expected a config error");
        } catch (const error& e) {
            CHECK(e.code() == errc::invalid_config);
        }
    };
    expect_invalid({{"backend", "diffusion"}});
    expect_invalid({{"seed_voxel", {1, 2}}});
    expect_invalid({{"seed_voxel", "center"}});
    expect_invalid({{"target_volume_mm3", "big"}});
    expect_invalid({{"intensity", {{"hu_range", {1, 2, 3}}}}});
    expect_invalid({{"rules", {{"p_grow", 7.0}}}});
}

TEST_CASE("config sampling stays inside the declared ranges") {
    synth_config cfg;

    const nlohmann::json a = to_json(make_recipe(cfg, 1234));
    const nlohmann::json b = to_json(make_recipe(cfg, 1234));
    CHECK(a == b);
    CHECK(a != to_json(make_recipe(cfg, 1235)));

    std::set<int> focal_counts;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const lesion_recipe r = make_recipe(cfg, seed);
        CHECK_FALSE(r.intensity.hu_base.has_value());
        CHECK_FALSE(r.seed_voxel.has_value());
        CHECK(r.rng_seed == seed);
        CHECK(r.intensity.hu_range_min == cfg.preset_hu_liver.lo);
        CHECK(r.intensity.hu_range_max == cfg.preset_hu_liver.hi);

        const double d = std::cbrt(6.0 * r.target_volume_mm3 / kPi);
        CHECK(d >= cfg.target_diameter_mm.lo - 1e-9);
        CHECK(d <= cfg.target_diameter_mm.hi + 1e-9);
        CHECK(r.mass_effect_strength >= cfg.mass_effect_strength.lo);
        CHECK(r.mass_effect_strength <= cfg.mass_effect_strength.hi);
        for (double ax : r.shape.semiaxes_mm) {
            CHECK(ax >= 0.75 * d / 2.0 - 1e-9);
            CHECK(ax <= 1.25 * d / 2.0 + 1e-9);
        }
        for (double e : r.shape.euler_zyx_rad) {
            CHECK(e >= 0.0);
            CHECK(e < kPi);
        }
        CHECK(r.shape.elastic_amplitude >= cfg.elastic_amplitude.lo);
        CHECK(r.shape.elastic_amplitude <= cfg.elastic_amplitude.hi);
        focal_counts.insert(r.shape.multifocal_count);
        CHECK(r.shape.multifocal_count >= 1);
        CHECK(r.shape.multifocal_count <= 3);
    }
    CHECK(focal_counts.count(1) == 1); // default 10% rate leaves mostly unifocal

    SUBCASE("the multifocal gate follows its probability") {
        cfg.multifocal_prob = 0.0;
        for (std::uint64_t seed = 1; seed <= 30; ++seed)
            CHECK(make_recipe(cfg, seed).shape.multifocal_count == 1);
        cfg.multifocal_prob = 1.0;
        std::set<int> counts;
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            const int c = make_recipe(cfg, seed).shape.multifocal_count;
            CHECK(c >= 2);
            counts.insert(c);
        }
        CHECK(counts.count(2) == 1);
        CHECK(counts.count(3) == 1);
    }

    SUBCASE("organ presets pick the matching hu range") {
        cfg.organ = organ_kind::pancreas;
        const lesion_recipe r = make_recipe(cfg, 5);
        CHECK(r.intensity.hu_range_min == cfg.preset_hu_pancreas.lo);
        CHECK(r.intensity.hu_range_max == cfg.preset_hu_pancreas.hi);
    }
}

TEST_CASE("synth config round trips and validates") {
    synth_config c;
    c.global_seed = 99;
    c.backend = backend_kind::handcrafted;
    c.organ = organ_kind::kidney;
    c.lesions_per_case = 3;
    c.target_diameter_mm = {10.0, 30.0};
    c.rules.p_invade = 0.45;
    c.elastic_amplitude = {0.1, 0.2};
    c.preset_hu_kidney = {25.0, 66.0};
    c.intensity.texture_sigma = 9.0;

    const nlohmann::json j = to_json(c);
    const synth_config back = config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.global_seed == 99);
    CHECK(back.lesions_per_case == 3);
    CHECK(back.rules.p_invade == 0.45);
    CHECK(back.preset_hu_kidney.lo == 25.0);
    CHECK(back.intensity.texture_sigma == 9.0);

    SUBCASE("bad configs are rejected") {
        auto expect_invalid = [](synth_config bad) {
            try {
                validate_config(bad);
                FAIL_CHECK("expected a config error");
            } catch (const error& e) {
                CHECK(e.code() == errc::invalid_config);
            }
        };
        synth_config bad;
        bad.lesions_per_case = 0;
        expect_invalid(bad);
        bad = synth_config{};
        bad.target_diameter_mm = {30.0, 10.0};
        expect_invalid(bad);
        bad = synth_config{};
        bad.elastic_amplitude = {0.1, 0.7};
        expect_invalid(bad);
        bad = synth_config{};
        bad.preset_hu_liver = {-2000.0, 100.0};
        expect_invalid(bad);
        bad = synth_config{};
        bad.multifocal_prob = 1.5;
        expect_invalid(bad);
    }
}

TEST_CASE("config files may carry comments") {
    const temp_file good("good", R"({
  // run-wide seed, picked arbitrarily
  "global_seed": 7,
  "backend": "handcrafted",
  "lesions_per_case": 2,
  "shape": {
    "elastic_amplitude": [0.1, 0.2] // lumpiness band
  }
})");
    const synth_config c = load_config(good.path.string());
    CHECK(c.global_seed == 7);
    CHECK(c.backend == backend_kind::handcrafted);
    CHECK(c.lesions_per_case == 2);
    CHECK(c.elastic_amplitude.lo == 0.1);
    CHECK(c.elastic_amplitude.hi == 0.2);

    const temp_file garbage("garbage", "{ not json at all");
    try {
        load_config(garbage.path.string());
        FAIL_CHECK("expected a parse error");
    } catch (const error& e) {
        CHECK(e.code() == errc::invalid_config);
    }

    try {
        load_config("/nonexistent/tumorsynth_config.json");
        FAIL_CHECK("expected an io error");
    } catch (const error& e) {
        CHECK(e.code() == errc::io_failure);
    }
}
