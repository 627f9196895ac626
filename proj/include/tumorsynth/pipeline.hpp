#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tumorsynth/mass_effect.hpp"
#include "tumorsynth/recipe.hpp"

namespace tumorsynth {

/// One synthesized lesion: the blended image, the exact (never warped)
/// tumor mask, the fully resolved recipe that reproduces both, the growth
/// log, and the anatomy masks after the mass-effect warp.
struct synthesis_result {
    hu_grid image;
    label_grid mask;
    lesion_recipe recipe_echo;
    std::vector<step_report> step_log;
    bool died = false;
    bool target_unreachable = false;
    label_grid warped_organ;
    std::optional<label_grid> warped_vessels;
};

/// Grows (or places) the lesion on the original anatomy, warps the CT and
/// anatomy masks by the mass-effect field, then renders the lesion onto
/// the warped background. The mask comes straight from the tumor map, so
/// image and mask agree voxel for voxel. Error messages name the stage
/// that failed.
synthesis_result synthesize(const hu_grid& ct, const mask_set& masks,
                            const lesion_recipe& recipe);

/// Several lesions on one volume: all lesions grow on the original
/// anatomy, their pressure fields are summed (clamped to d_max), the CT is
/// warped once, and every lesion renders onto it. The mask is the union.
struct case_result {
    hu_grid image;
    label_grid mask;
    std::vector<lesion_recipe> recipe_echoes;
    std::vector<std::vector<step_report>> step_logs;
    bool any_died = false;
    bool any_target_unreachable = false;
    label_grid warped_organ;
    std::optional<label_grid> warped_vessels;
};

case_result synthesize_case(const hu_grid& ct, const mask_set& masks,
                            const std::vector<lesion_recipe>& recipes);

/// Handcrafted backend: rejection-samples a placement whose shape stays
/// inside the organ and clear of vessels, stamps it (plus any satellite
/// lesions within satellite_radius_mm, each at most half the primary's
/// size) as a saturated tumor map. recipe_echo.seed_voxel is filled with
/// the accepted primary center.
tumor_map place_handcrafted(const mask_set& masks, const organ_map& organ,
                            lesion_recipe& recipe_echo, const counter_rng& rng);

/// One dataset case: a CT, its organ mask, optionally a vessel mask.
struct manifest_row {
    std::string case_id;
    std::string ct_path;
    std::string organ_path;
    std::string vessel_path; // empty when absent
    int line = 0;
};

/// Parses `case_id,ct_path,organ_path[,vessel_path]` lines ('#' comments
/// and blank lines skipped). Bad rows (wrong field count, empty or
/// non-portable case ids, duplicates) are reported in `errors` and left
/// out of the result; the caller decides whether to continue.
std::vector<manifest_row> parse_manifest(const std::string& text,
                                         std::vector<std::string>& errors);
std::vector<manifest_row> load_manifest(const std::string& path,
                                        std::vector<std::string>& errors);

/// Seed derivation: rows are keyed by case identity (not manifest order),
/// so reordering or subsetting a manifest never changes a case's output.
std::uint64_t case_seed(std::uint64_t global_seed, std::int64_t epoch,
                        const std::string& case_id);
std::uint64_t lesion_seed(std::uint64_t case_seed_value, int lesion_index);

struct epoch_outcome {
    manifest_row row;
    std::string error; // empty on success
    std::vector<std::string> written;
};

/// Synthesizes every manifest row for one epoch and writes
/// <case>_img.rvol, <case>_msk.rvol and <case>_recipe.json under out_dir.
/// Row failures are recorded (and the stream continues); outcomes come
/// back in manifest order regardless of `jobs`.
std::vector<epoch_outcome> run_epoch(const std::vector<manifest_row>& rows,
                                     const synth_config& config, std::int64_t epoch,
                                     const std::string& out_dir, int jobs = 1);

} // namespace tumorsynth
