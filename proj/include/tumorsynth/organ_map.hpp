#pragma once

#include "tumorsynth/types.hpp"
#include "tumorsynth/volume_io.hpp"

namespace tumorsynth {

/// Per-voxel quantized tissue level. Level 0 marks voxels outside the
/// organ or inside a vessel (tumor cannot occupy them); levels 1..L
/// partition the parenchyma from densest (1) to softest (L) tissue and
/// scale the growth rules.
struct organ_map {
    label_grid levels;
    int level_count = 4;
    std::vector<std::int16_t> thresholds; // L-1 increasing HU cut points

    int level_at(std::int32_t x, std::int32_t y, std::int32_t z) const {
        return levels.at_or(x, y, z, 0);
    }
};

/// Quantize parenchyma HU into `level_count` levels using the
/// (1/L, ..., (L-1)/L) quantiles over organ-minus-vessel voxels; a voxel's
/// level is 1 + the number of thresholds strictly below its HU. Vessel and
/// non-organ voxels get level 0. A constant-intensity organ degenerates to
/// level L everywhere (softest tissue) with collapsed thresholds.
organ_map build_organ_map(const hu_grid& ct, const mask_set& masks, int level_count = 4);

enum class phase_code : std::uint8_t {
    empty = 0,
    active = 1,
    quiescent = 2,
    necrotic = 3,
};

/// Tumor cell population per voxel (0..10) plus a phase label.
/// Invariants: phase is empty iff density is zero; necrotic voxels are
/// saturated (density 10) and stay necrotic.
struct tumor_map {
    label_grid density;
    label_grid phase;

    static constexpr std::uint8_t kSaturated = 10;

    phase_code phase_at(std::int32_t x, std::int32_t y, std::int32_t z) const {
        return static_cast<phase_code>(phase.at_or(x, y, z, 0));
    }
    std::int64_t tumor_voxel_count() const {
        std::int64_t n = 0;
        for (std::uint8_t d : density.data) n += (d >= 1);
        return n;
    }
    double physical_volume_mm3() const {
        return static_cast<double>(tumor_voxel_count()) * density.spacing.voxel_mm3();
    }
    /// Binary mask of voxels with density >= 1.
    label_grid mask() const {
        label_grid m(density.dims, density.spacing, 0);
        for (std::size_t i = 0; i < density.data.size(); ++i) m.data[i] = density.data[i] >= 1;
        return m;
    }
};

/// Single-voxel lesion origin: density 1 / active phase at `seed`,
/// empty elsewhere. The seed must sit on parenchyma (level >= 1).
tumor_map init_tumor_map(const organ_map& organ, voxel_t seed);

} // namespace tumorsynth
