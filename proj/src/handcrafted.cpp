#include <cmath>

#include "tumorsynth/error.hpp"
#include "tumorsynth/pipeline.hpp"

namespace tumorsynth {

namespace {

voxel_t shape_center(const label_grid& shape) {
    return {(shape.dims.nx - 1) / 2, (shape.dims.ny - 1) / 2, (shape.dims.nz - 1) / 2};
}

// The whole shape must land on parenchyma: in bounds, inside the organ,
// outside vessels (level >= 1 is exactly organ-minus-vessel).
bool fits(const label_grid& shape, voxel_t at, const organ_map& organ) {
    const voxel_t c = shape_center(shape);
    for (std::int32_t z = 0; z < shape.dims.nz; ++z)
        for (std::int32_t y = 0; y < shape.dims.ny; ++y)
            for (std::int32_t x = 0; x < shape.dims.nx; ++x) {
                if (!shape.at(x, y, z)) continue;
                if (organ.level_at(at.x + x - c.x, at.y + y - c.y, at.z + z - c.z) < 1)
                    return false;
            }
    return true;
}

void stamp(const label_grid& shape, voxel_t at, label_grid& density) {
    const voxel_t c = shape_center(shape);
    for (std::int32_t z = 0; z < shape.dims.nz; ++z)
        for (std::int32_t y = 0; y < shape.dims.ny; ++y)
            for (std::int32_t x = 0; x < shape.dims.nx; ++x)
                if (shape.at(x, y, z))
                    density.at(at.x + x - c.x, at.y + y - c.y, at.z + z - c.z) =
                        tumor_map::kSaturated;
}

} // namespace

tumor_map place_handcrafted(const mask_set& masks, const organ_map& organ,
                            lesion_recipe& recipe_echo, const counter_rng& rng) {
    const dim3_t dims = masks.organ.dims;
    const spacing_t spacing = masks.organ.spacing;
    tumor_map tumor;
    tumor.density = label_grid(dims, spacing, 0);
    tumor.phase = label_grid(dims, spacing, 0);

    const label_grid primary =
        generate_shape(recipe_echo.shape, spacing, rng, recipe_echo.max_shape_extent_mm);

    voxel_t center{};
    bool placed = false;
    if (recipe_echo.seed_voxel) {
        center = *recipe_echo.seed_voxel;
        placed = fits(primary, center, organ);
    } else {
        for (int attempt = 0; attempt < recipe_echo.placement_retries && !placed; ++attempt) {
            center = sample_seed(masks, organ, rng, recipe_echo.seed_margin_voxels,
                                 static_cast<std::uint64_t>(attempt));
            placed = fits(primary, center, organ);
        }
    }
    if (!placed)
        fail(errc::placement_failed,
             "no placement kept the shape inside the organ after " +
                 std::to_string(recipe_echo.placement_retries) + " attempts");
    stamp(primary, center, tumor.density);
    recipe_echo.seed_voxel = center;

    // Satellites: shrunken copies of the primary scattered nearby. A
    // satellite that finds no room within its retry budget is skipped.
    for (int k = 1; k < recipe_echo.shape.multifocal_count; ++k) {
        const counter_rng srng(mix_seed(rng.seed(), 100 + static_cast<std::uint64_t>(k)));
        shape_spec sat_spec = recipe_echo.shape;
        sat_spec.multifocal_count = 1;
        const double scale =
            0.25 + 0.25 * srng.uniform(rng_stream::placement, 0, 0); // <= half the primary
        for (double& a : sat_spec.semiaxes_mm) a *= scale;
        const label_grid sat = generate_shape(sat_spec, spacing, srng,
                                              recipe_echo.max_shape_extent_mm);

        std::vector<voxel_t> candidates;
        const double r_mm = recipe_echo.satellite_radius_mm;
        const std::int32_t rx = static_cast<std::int32_t>(std::ceil(r_mm / spacing.sx));
        const std::int32_t ry = static_cast<std::int32_t>(std::ceil(r_mm / spacing.sy));
        const std::int32_t rz = static_cast<std::int32_t>(std::ceil(r_mm / spacing.sz));
        for (std::int32_t z = std::max(0, center.z - rz);
             z <= std::min(dims.nz - 1, center.z + rz); ++z)
            for (std::int32_t y = std::max(0, center.y - ry);
                 y <= std::min(dims.ny - 1, center.y + ry); ++y)
                for (std::int32_t x = std::max(0, center.x - rx);
                     x <= std::min(dims.nx - 1, center.x + rx); ++x) {
                    if (organ.level_at(x, y, z) < 1) continue;
                    const double dx = (x - center.x) * static_cast<double>(spacing.sx);
                    const double dy = (y - center.y) * static_cast<double>(spacing.sy);
                    const double dz = (z - center.z) * static_cast<double>(spacing.sz);
                    if (dx * dx + dy * dy + dz * dz <= r_mm * r_mm)
                        candidates.push_back({x, y, z});
                }
        if (candidates.empty()) continue;
        for (int attempt = 0; attempt < recipe_echo.placement_retries; ++attempt) {
            const double u =
                srng.uniform(rng_stream::placement, 1 + static_cast<std::uint64_t>(attempt), 1);
            const auto pick = static_cast<std::size_t>(
                std::min<double>(static_cast<double>(candidates.size()) - 1.0,
                                 u * static_cast<double>(candidates.size())));
            if (fits(sat, candidates[pick], organ)) {
                stamp(sat, candidates[pick], tumor.density);
                break;
            }
        }
    }

    // Phases: rim voxels active, interior quiescent (no necrosis on this
    // backend); keeps phase consistent with density.
    for (std::int32_t z = 0; z < dims.nz; ++z)
        for (std::int32_t y = 0; y < dims.ny; ++y)
            for (std::int32_t x = 0; x < dims.nx; ++x) {
                if (!tumor.density.at(x, y, z)) continue;
                bool rim = false;
                for (int d = 0; d < 6 && !rim; ++d)
                    rim = tumor.density.at_or(x + k6Neighbors[d][0], y + k6Neighbors[d][1],
                                              z + k6Neighbors[d][2], 0) == 0;
                tumor.phase.at(x, y, z) = static_cast<std::uint8_t>(
                    rim ? phase_code::active : phase_code::quiescent);
            }
    return tumor;
}

} // namespace tumorsynth
