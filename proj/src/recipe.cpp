#include "tumorsynth/recipe.hpp"

#include <cmath>
#include <fstream>

#include "tumorsynth/error.hpp"

namespace tumorsynth {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* to_string(backend_kind b) {
    return b == backend_kind::cellular_automata ? "cellular_automata" : "handcrafted";
}

const char* to_string(organ_kind o) {
    switch (o) {
        case organ_kind::liver: return "liver";
        case organ_kind::pancreas: return "pancreas";
        case organ_kind::kidney: return "kidney";
    }
    return "liver";
}

backend_kind backend_from_string(const std::string& s) {
    if (s == "cellular_automata" || s == "ca") return backend_kind::cellular_automata;
    if (s == "handcrafted") return backend_kind::handcrafted;
    fail(errc::invalid_config, "unknown backend '" + s + "'");
}

organ_kind organ_from_string(const std::string& s) {
    if (s == "liver") return organ_kind::liver;
    if (s == "pancreas") return organ_kind::pancreas;
    if (s == "kidney") return organ_kind::kidney;
    fail(errc::invalid_config, "unknown organ '" + s + "'");
}

void validate_recipe(const lesion_recipe& recipe) {
    if (!(recipe.target_volume_mm3 > 0.0))
        fail(errc::invalid_config, "target_volume_mm3 must be positive");
    if (recipe.level_count < 2 || recipe.level_count > 8)
        fail(errc::invalid_config, "level_count must lie in [2,8]");
    if (recipe.seed_margin_voxels < 0)
        fail(errc::invalid_config, "seed_margin_voxels must be >= 0");
    if (recipe.placement_retries < 1)
        fail(errc::invalid_config, "placement_retries must be >= 1");
    if (!(recipe.mass_effect_strength >= 0.0 && recipe.mass_effect_strength <= 1.0))
        fail(errc::invalid_config, "mass_effect_strength must lie in [0,1]");
    if (!(recipe.mass_effect_d_max > 0.0))
        fail(errc::invalid_config, "mass_effect_d_max must be positive");
    if (!(recipe.mass_effect_halfwidth_voxels > 0.0))
        fail(errc::invalid_config, "mass_effect_halfwidth_voxels must be positive");
    if (!(recipe.satellite_radius_mm > 0.0))
        fail(errc::invalid_config, "satellite_radius_mm must be positive");
    if (recipe.backend == backend_kind::cellular_automata)
        validate_rules(recipe.rules, recipe.level_count);
    else
        validate_shape(recipe.shape, recipe.max_shape_extent_mm);
    validate_model(recipe.intensity);
}

namespace {

nlohmann::json rules_to_json(const growth_rules& r) {
    return {{"p_grow", r.p_grow},
            {"p_invade", r.p_invade},
            {"invade_threshold", r.invade_threshold},
            {"level_multiplier", r.level_multiplier},
            {"necrosis_depth", r.necrosis_depth},
            {"death_stall_steps", r.death_stall_steps},
            {"max_steps", r.max_steps}};
}

growth_rules rules_from_json(const nlohmann::json& j, growth_rules r = {}) {
    r.p_grow = j.value("p_grow", r.p_grow);
    r.p_invade = j.value("p_invade", r.p_invade);
    r.invade_threshold = j.value("invade_threshold", r.invade_threshold);
    r.level_multiplier = j.value("level_multiplier", r.level_multiplier);
    r.necrosis_depth = j.value("necrosis_depth", r.necrosis_depth);
    r.death_stall_steps = j.value("death_stall_steps", r.death_stall_steps);
    r.max_steps = j.value("max_steps", r.max_steps);
    return r;
}

nlohmann::json shape_to_json(const shape_spec& s) {
    return {{"semiaxes_mm", s.semiaxes_mm},
            {"euler_zyx_rad", s.euler_zyx_rad},
            {"elastic_sigma_mm", s.elastic_sigma_mm},
            {"elastic_amplitude", s.elastic_amplitude},
            {"multifocal_count", s.multifocal_count}};
}

shape_spec shape_from_json(const nlohmann::json& j, shape_spec s = {}) {
    s.semiaxes_mm = j.value("semiaxes_mm", s.semiaxes_mm);
    s.euler_zyx_rad = j.value("euler_zyx_rad", s.euler_zyx_rad);
    s.elastic_sigma_mm = j.value("elastic_sigma_mm", s.elastic_sigma_mm);
    s.elastic_amplitude = j.value("elastic_amplitude", s.elastic_amplitude);
    s.multifocal_count = j.value("multifocal_count", s.multifocal_count);
    return s;
}

nlohmann::json intensity_to_json(const intensity_model& m) {
    nlohmann::json j{{"hu_range", {m.hu_range_min, m.hu_range_max}},
                     {"necrosis_delta", m.necrosis_delta},
                     {"texture_sigma", m.texture_sigma},
                     {"texture_scales", m.texture_scales},
                     {"blend_halfwidth", m.blend_halfwidth},
                     {"capsule_enabled", m.capsule_enabled},
                     {"capsule_delta", m.capsule_delta},
                     {"capsule_min_radius_mm", m.capsule_min_radius_mm}};
    if (m.hu_base) j["hu_base"] = *m.hu_base;
    return j;
}

intensity_model intensity_from_json(const nlohmann::json& j, intensity_model m = {}) {
    if (j.contains("hu_range")) {
        const auto r = j.at("hu_range");
        if (!r.is_array() || r.size() != 2)
            fail(errc::invalid_config, "hu_range must be [min, max]");
        m.hu_range_min = r[0].get<double>();
        m.hu_range_max = r[1].get<double>();
    }
    if (j.contains("hu_base")) m.hu_base = j.at("hu_base").get<double>();
    m.necrosis_delta = j.value("necrosis_delta", m.necrosis_delta);
    m.texture_sigma = j.value("texture_sigma", m.texture_sigma);
    m.texture_scales = j.value("texture_scales", m.texture_scales);
    m.blend_halfwidth = j.value("blend_halfwidth", m.blend_halfwidth);
    m.capsule_enabled = j.value("capsule_enabled", m.capsule_enabled);
    m.capsule_delta = j.value("capsule_delta", m.capsule_delta);
    m.capsule_min_radius_mm = j.value("capsule_min_radius_mm", m.capsule_min_radius_mm);
    return m;
}

} // namespace

nlohmann::json to_json(const lesion_recipe& recipe) {
    nlohmann::json j{{"backend", to_string(recipe.backend)},
                     {"organ", to_string(recipe.organ)},
                     {"target_volume_mm3", recipe.target_volume_mm3},
                     {"intensity", intensity_to_json(recipe.intensity)},
                     {"mass_effect_strength", recipe.mass_effect_strength},
                     {"mass_effect_d_max", recipe.mass_effect_d_max},
                     {"mass_effect_halfwidth_voxels", recipe.mass_effect_halfwidth_voxels},
                     {"level_count", recipe.level_count},
                     {"seed_margin_voxels", recipe.seed_margin_voxels},
                     {"placement_retries", recipe.placement_retries},
                     {"satellite_radius_mm", recipe.satellite_radius_mm},
                     {"max_shape_extent_mm", recipe.max_shape_extent_mm},
                     {"rng_seed", recipe.rng_seed}};
    if (recipe.seed_voxel)
        j["seed_voxel"] = {recipe.seed_voxel->x, recipe.seed_voxel->y, recipe.seed_voxel->z};
    if (recipe.backend == backend_kind::cellular_automata)
        j["rules"] = rules_to_json(recipe.rules);
    else
        j["shape"] = shape_to_json(recipe.shape);
    return j;
}

lesion_recipe recipe_from_json(const nlohmann::json& j) {
    lesion_recipe r;
    try {
        if (j.contains("backend")) r.backend = backend_from_string(j.at("backend"));
        if (j.contains("organ")) r.organ = organ_from_string(j.at("organ"));
        if (j.contains("seed_voxel")) {
            const auto& s = j.at("seed_voxel");
            if (!s.is_array() || s.size() != 3)
                fail(errc::invalid_config, "seed_voxel must be [x, y, z]");
            r.seed_voxel = voxel_t{s[0].get<std::int32_t>(), s[1].get<std::int32_t>(),
                                   s[2].get<std::int32_t>()};
        }
        r.target_volume_mm3 = j.value("target_volume_mm3", r.target_volume_mm3);
        if (j.contains("rules")) r.rules = rules_from_json(j.at("rules"), r.rules);
        if (j.contains("shape")) r.shape = shape_from_json(j.at("shape"), r.shape);
        if (j.contains("intensity"))
            r.intensity = intensity_from_json(j.at("intensity"), r.intensity);
        r.mass_effect_strength = j.value("mass_effect_strength", r.mass_effect_strength);
        r.mass_effect_d_max = j.value("mass_effect_d_max", r.mass_effect_d_max);
        r.mass_effect_halfwidth_voxels =
            j.value("mass_effect_halfwidth_voxels", r.mass_effect_halfwidth_voxels);
        r.level_count = j.value("level_count", r.level_count);
        r.seed_margin_voxels = j.value("seed_margin_voxels", r.seed_margin_voxels);
        r.placement_retries = j.value("placement_retries", r.placement_retries);
        r.satellite_radius_mm = j.value("satellite_radius_mm", r.satellite_radius_mm);
        r.max_shape_extent_mm = j.value("max_shape_extent_mm", r.max_shape_extent_mm);
        r.rng_seed = j.value("rng_seed", r.rng_seed);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::invalid_config, std::string("bad recipe json: ") + e.what());
    }
    validate_recipe(r);
    return r;
}

void validate_config(const synth_config& config) {
    auto bad = [](const std::string& what) { fail(errc::invalid_config, what); };
    auto check_range = [&](sample_range r, const char* name, double lo, double hi) {
        if (!(r.lo <= r.hi) || r.lo < lo || r.hi > hi)
            bad(std::string(name) + " range is out of order or out of bounds");
    };
    if (config.lesions_per_case < 1) bad("lesions_per_case must be >= 1");
    if (config.level_count < 2 || config.level_count > 8) bad("level_count must lie in [2,8]");
    if (config.seed_margin_voxels < 0) bad("seed_margin_voxels must be >= 0");
    if (config.placement_retries < 1) bad("placement_retries must be >= 1");
    check_range(config.target_diameter_mm, "target_diameter_mm", 0.5, 500.0);
    check_range(config.mass_effect_strength, "mass_effect strength", 0.0, 1.0);
    if (!(config.mass_effect_d_max > 0.0)) bad("mass_effect d_max must be positive");
    if (!(config.mass_effect_halfwidth_voxels > 0.0))
        bad("mass_effect halfwidth must be positive");
    validate_rules(config.rules, config.level_count);
    if (!(config.elastic_sigma_mm > 0.0)) bad("elastic_sigma_mm must be positive");
    check_range(config.elastic_amplitude, "elastic_amplitude", 0.0, 0.5);
    if (!(config.multifocal_prob >= 0.0 && config.multifocal_prob <= 1.0))
        bad("multifocal_prob must lie in [0,1]");
    if (!(config.satellite_radius_mm > 0.0)) bad("satellite_radius_mm must be positive");
    validate_model(config.intensity);
    check_range(config.preset_hu_liver, "liver hu preset", -1024.0, 3071.0);
    check_range(config.preset_hu_pancreas, "pancreas hu preset", -1024.0, 3071.0);
    check_range(config.preset_hu_kidney, "kidney hu preset", -1024.0, 3071.0);
}

namespace {

nlohmann::json range_to_json(sample_range r) {
    return {r.lo, r.hi};
}

sample_range range_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_array() || j.size() != 2)
        fail(errc::invalid_config, std::string(name) + " must be [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

nlohmann::json to_json(const synth_config& config) {
    return {{"global_seed", config.global_seed},
            {"backend", to_string(config.backend)},
            {"organ", to_string(config.organ)},
            {"lesions_per_case", config.lesions_per_case},
            {"level_count", config.level_count},
            {"seed_margin_voxels", config.seed_margin_voxels},
            {"placement_retries", config.placement_retries},
            {"target_diameter_mm", range_to_json(config.target_diameter_mm)},
            {"mass_effect",
             {{"strength", range_to_json(config.mass_effect_strength)},
              {"d_max_voxels", config.mass_effect_d_max},
              {"halfwidth_voxels", config.mass_effect_halfwidth_voxels}}},
            {"growth_rules", rules_to_json(config.rules)},
            {"shape",
             {{"elastic_sigma_mm", config.elastic_sigma_mm},
              {"elastic_amplitude", range_to_json(config.elastic_amplitude)},
              {"multifocal_prob", config.multifocal_prob},
              {"satellite_radius_mm", config.satellite_radius_mm},
              {"max_extent_mm", config.max_shape_extent_mm}}},
            {"intensity", intensity_to_json(config.intensity)},
            {"organ_presets",
             {{"liver", {{"hu_range", range_to_json(config.preset_hu_liver)}}},
              {"pancreas", {{"hu_range", range_to_json(config.preset_hu_pancreas)}}},
              {"kidney", {{"hu_range", range_to_json(config.preset_hu_kidney)}}}}}};
}

synth_config config_from_json(const nlohmann::json& j) {
    synth_config c;
    try {
        c.global_seed = j.value("global_seed", c.global_seed);
        if (j.contains("backend")) c.backend = backend_from_string(j.at("backend"));
        if (j.contains("organ")) c.organ = organ_from_string(j.at("organ"));
        c.lesions_per_case = j.value("lesions_per_case", c.lesions_per_case);
        c.level_count = j.value("level_count", c.level_count);
        c.seed_margin_voxels = j.value("seed_margin_voxels", c.seed_margin_voxels);
        c.placement_retries = j.value("placement_retries", c.placement_retries);
        if (j.contains("target_diameter_mm"))
            c.target_diameter_mm =
                range_from_json(j.at("target_diameter_mm"), "target_diameter_mm");
        if (j.contains("mass_effect")) {
            const auto& m = j.at("mass_effect");
            if (m.contains("strength"))
                c.mass_effect_strength = range_from_json(m.at("strength"), "strength");
            c.mass_effect_d_max = m.value("d_max_voxels", c.mass_effect_d_max);
            c.mass_effect_halfwidth_voxels =
                m.value("halfwidth_voxels", c.mass_effect_halfwidth_voxels);
        }
        if (j.contains("growth_rules")) c.rules = rules_from_json(j.at("growth_rules"), c.rules);
        if (j.contains("shape")) {
            const auto& s = j.at("shape");
            c.elastic_sigma_mm = s.value("elastic_sigma_mm", c.elastic_sigma_mm);
            if (s.contains("elastic_amplitude"))
                c.elastic_amplitude =
                    range_from_json(s.at("elastic_amplitude"), "elastic_amplitude");
            c.multifocal_prob = s.value("multifocal_prob", c.multifocal_prob);
            c.satellite_radius_mm = s.value("satellite_radius_mm", c.satellite_radius_mm);
            c.max_shape_extent_mm = s.value("max_extent_mm", c.max_shape_extent_mm);
        }
        if (j.contains("intensity"))
            c.intensity = intensity_from_json(j.at("intensity"), c.intensity);
        if (j.contains("organ_presets")) {
            const auto& p = j.at("organ_presets");
            auto preset = [&](const char* organ, sample_range fallback) {
                if (!p.contains(organ)) return fallback;
                return range_from_json(p.at(organ).at("hu_range"), organ);
            };
            c.preset_hu_liver = preset("liver", c.preset_hu_liver);
            c.preset_hu_pancreas = preset("pancreas", c.preset_hu_pancreas);
            c.preset_hu_kidney = preset("kidney", c.preset_hu_kidney);
        }
    } catch (const nlohmann::json::exception& e) {
        fail(errc::invalid_config, std::string("bad config json: ") + e.what());
    }
    validate_config(c);
    return c;
}

synth_config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io_failure, "cannot open config file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                                  /*ignore_comments=*/true);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::invalid_config, "cannot parse " + path + ": " + e.what());
    }
    return config_from_json(j);
}

lesion_recipe make_recipe(const synth_config& config, std::uint64_t lesion_seed) {
    const counter_rng rng(lesion_seed);
    auto draw = [&](std::uint64_t tag) { return rng.uniform(rng_stream::recipe_sample, tag, 0); };
    auto in_range = [&](sample_range r, std::uint64_t tag) {
        return r.lo + draw(tag) * (r.hi - r.lo);
    };

    lesion_recipe rec;
    rec.backend = config.backend;
    rec.organ = config.organ;
    rec.level_count = config.level_count;
    rec.seed_margin_voxels = config.seed_margin_voxels;
    rec.placement_retries = config.placement_retries;
    rec.satellite_radius_mm = config.satellite_radius_mm;
    rec.max_shape_extent_mm = config.max_shape_extent_mm;
    rec.rules = config.rules;
    rec.intensity = config.intensity;
    rec.mass_effect_d_max = config.mass_effect_d_max;
    rec.mass_effect_halfwidth_voxels = config.mass_effect_halfwidth_voxels;
    rec.rng_seed = lesion_seed;

    const double diameter = in_range(config.target_diameter_mm, 0);
    rec.target_volume_mm3 = kPi / 6.0 * diameter * diameter * diameter;
    rec.mass_effect_strength = in_range(config.mass_effect_strength, 1);

    const double radius = diameter / 2.0;
    for (int i = 0; i < 3; ++i)
        rec.shape.semiaxes_mm[static_cast<std::size_t>(i)] =
            radius * (0.75 + 0.5 * draw(2 + static_cast<std::uint64_t>(i)));
    for (int i = 0; i < 3; ++i)
        rec.shape.euler_zyx_rad[static_cast<std::size_t>(i)] =
            kPi * draw(5 + static_cast<std::uint64_t>(i));
    rec.shape.elastic_sigma_mm = config.elastic_sigma_mm;
    rec.shape.elastic_amplitude = in_range(config.elastic_amplitude, 8);
    rec.shape.multifocal_count = 1;
    if (draw(9) < config.multifocal_prob)
        rec.shape.multifocal_count = 2 + (draw(10) < 0.3 ? 1 : 0);

    sample_range hu = config.preset_hu_liver;
    if (rec.organ == organ_kind::pancreas) hu = config.preset_hu_pancreas;
    if (rec.organ == organ_kind::kidney) hu = config.preset_hu_kidney;
    rec.intensity.hu_range_min = hu.lo;
    rec.intensity.hu_range_max = hu.hi;
    rec.intensity.hu_base.reset();

    validate_recipe(rec);
    return rec;
}

} // namespace tumorsynth
