#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "tumorsynth/ca_engine.hpp"
#include "tumorsynth/intensity.hpp"
#include "tumorsynth/shape.hpp"

namespace tumorsynth {

enum class backend_kind : std::uint8_t { cellular_automata, handcrafted };
enum class organ_kind : std::uint8_t { liver, pancreas, kidney };

const char* to_string(backend_kind b);
const char* to_string(organ_kind o);
backend_kind backend_from_string(const std::string& s);
organ_kind organ_from_string(const std::string& s);

/// Everything one lesion needs, fully spelled out. seed_voxel and
/// intensity.hu_base may arrive unset; synthesis samples them and the echo
/// it returns has them filled in, so echoes re-run bit-identically.
struct lesion_recipe {
    backend_kind backend = backend_kind::cellular_automata;
    organ_kind organ = organ_kind::liver;
    std::optional<voxel_t> seed_voxel;
    double target_volume_mm3 = 4188.79; // ~20 mm sphere
    growth_rules rules;                 // cellular_automata backend
    shape_spec shape;                   // handcrafted backend
    intensity_model intensity;
    double mass_effect_strength = 0.5;
    double mass_effect_d_max = 3.0;
    double mass_effect_halfwidth_voxels = 8.0;
    int level_count = 4;
    int seed_margin_voxels = 2;
    int placement_retries = 50;
    double satellite_radius_mm = 40.0;
    double max_shape_extent_mm = 200.0;
    std::uint64_t rng_seed = 1;
};

/// Throws InvalidConfig (with the offending field in the message) when any
/// nested invariant is broken.
void validate_recipe(const lesion_recipe& recipe);

nlohmann::json to_json(const lesion_recipe& recipe);
lesion_recipe recipe_from_json(const nlohmann::json& j);

/// Closed interval a value is drawn from uniformly.
struct sample_range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Run-wide settings: templates for the per-lesion recipes plus the
/// sampling ranges that make each lesion different. Loaded from a JSON
/// file that may carry // comments.
struct synth_config {
    std::uint64_t global_seed = 424242;
    backend_kind backend = backend_kind::cellular_automata;
    organ_kind organ = organ_kind::liver;
    int lesions_per_case = 1;
    int level_count = 4;
    int seed_margin_voxels = 2;
    int placement_retries = 50;
    sample_range target_diameter_mm{8.0, 55.0};
    sample_range mass_effect_strength{0.2, 0.9};
    double mass_effect_d_max = 3.0;
    double mass_effect_halfwidth_voxels = 8.0;
    growth_rules rules;
    double elastic_sigma_mm = 4.0;
    sample_range elastic_amplitude{0.05, 0.35};
    double multifocal_prob = 0.1;
    double satellite_radius_mm = 40.0;
    double max_shape_extent_mm = 200.0;
    intensity_model intensity; // hu range overridden by the organ preset
    sample_range preset_hu_liver{36.0, 162.0};
    sample_range preset_hu_pancreas{20.0, 70.0};
    sample_range preset_hu_kidney{20.0, 80.0};
};

void validate_config(const synth_config& config);
nlohmann::json to_json(const synth_config& config);
synth_config config_from_json(const nlohmann::json& j);
synth_config load_config(const std::string& path);

/// Expands the config into one lesion's recipe, drawing the per-lesion
/// values (target size, mass-effect strength, handcrafted shape) from the
/// given seed. hu_base and seed_voxel stay unset for synthesis to resolve.
lesion_recipe make_recipe(const synth_config& config, std::uint64_t lesion_seed);

} // namespace tumorsynth
