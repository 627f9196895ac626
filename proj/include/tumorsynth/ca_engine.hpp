#pragma once

#include <cstdint>
#include <vector>

#include "tumorsynth/organ_map.hpp"
#include "tumorsynth/rng.hpp"
#include "tumorsynth/types.hpp"
#include "tumorsynth/volume_io.hpp"

namespace tumorsynth {

/// Knobs of the cellular-automata growth model. Probabilities are scaled
/// per voxel by level_multiplier[organ level]; index 0 must stay 0 so the
/// tumor can never enter vessels or leave the organ.
struct growth_rules {
    double p_grow = 0.6;
    double p_invade = 0.3;
    int invade_threshold = 10; // density required before a cell may invade
    std::vector<double> level_multiplier = {0.0, 0.25, 0.5, 0.75, 1.0};
    int necrosis_depth = 4;     // erosion depth (in saturated tissue) that kills
    int death_stall_steps = 25; // zero-growth steps before the lesion is dead
    int max_steps = 2000;
};

/// Throws InvalidConfig unless the rules are self-consistent and the
/// multiplier table covers levels 0..level_count.
void validate_rules(const growth_rules& rules, int level_count);

struct step_report {
    std::int64_t step = 0;
    std::int64_t tumor_voxels = 0;
    std::int64_t saturated_voxels = 0;
    std::int64_t necrotic_voxels = 0;
    bool grew = false; // any density changed this step
};

/// One synchronous update of the automaton:
///   1. proliferate: every tumor voxel below saturation gains one density
///      unit with probability p_grow * level_multiplier[level];
///   2. invade: every voxel at density >= invade_threshold seeds each empty
///      6-neighbor of level >= 1 with probability
///      p_invade * level_multiplier[neighbor level], giving it density 1;
///   3. classify: a tumor voxel is active while it still touches an empty
///      in-organ 6-neighbor, quiescent otherwise (necrotic is sticky);
///   4. necrose: saturated quiescent voxels buried at erosion depth
///      >= necrosis_depth inside the saturated set turn necrotic.
/// Stages 1-2 read the pre-step densities; stages 3-4 look at the updated
/// grid so phases always agree with the densities they describe. Every
/// random draw is keyed by (step, voxel), never by visit order.
step_report step(tumor_map& tumor, const organ_map& organ, const growth_rules& rules,
                 const counter_rng& rng, std::int64_t step_index);

struct growth_result {
    std::vector<step_report> reports;
    bool died = false;               // stalled for death_stall_steps
    bool target_unreachable = false; // target exceeds organ capacity
    bool hit_step_cap = false;
};

/// Repeats `step` until the tumor's physical volume reaches
/// target_volume_mm3, the lesion dies (no density change for
/// death_stall_steps in a row), or max_steps is spent. Only the bounding
/// box of the lesion is visited each step, so cost tracks lesion size, not
/// grid size. Bit-deterministic for a fixed rng seed.
growth_result run_growth(tumor_map& tumor, const organ_map& organ, const growth_rules& rules,
                         const counter_rng& rng, double target_volume_mm3);

/// Uniformly samples a parenchyma voxel (level >= 1) at least
/// min_margin_voxels away from the organ boundary and from vessels.
/// `draw_key` distinguishes repeated draws under one seed.
/// Throws NoEligibleSeed when the margin leaves no candidates.
voxel_t sample_seed(const mask_set& masks, const organ_map& organ, const counter_rng& rng,
                    int min_margin_voxels, std::uint64_t draw_key = 0);

} // namespace tumorsynth
