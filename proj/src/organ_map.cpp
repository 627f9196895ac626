#include "tumorsynth/organ_map.hpp"

#include <algorithm>
#include <cmath>

#include "tumorsynth/error.hpp"

namespace tumorsynth {

organ_map build_organ_map(const hu_grid& ct, const mask_set& masks, int level_count) {
    if (level_count < 2 || level_count > 8)
        fail(errc::invalid_config, "level count must be in [2, 8]");
    if (masks.organ.dims != ct.dims)
        fail(errc::dimension_mismatch, "organ mask dims differ from CT dims");

    const std::int64_t n = ct.dims.total();
    std::vector<std::int16_t> samples;
    samples.reserve(static_cast<std::size_t>(n) / 8);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (masks.organ.data[idx] == 0) continue;
        if (masks.vessels && masks.vessels->data[idx] != 0) continue;
        samples.push_back(ct.data[idx]);
    }
    if (samples.empty()) fail(errc::empty_organ, "organ mask selects no voxels");

    std::sort(samples.begin(), samples.end());
    const bool degenerate = samples.front() == samples.back();

    organ_map out;
    out.level_count = level_count;
    out.thresholds.resize(static_cast<std::size_t>(level_count - 1));
    for (int k = 1; k < level_count; ++k) {
        // Nearest-rank quantile at p = k/L.
        const double p = static_cast<double>(k) / level_count;
        auto rank = static_cast<std::size_t>(
            std::ceil(p * static_cast<double>(samples.size())));
        rank = std::clamp<std::size_t>(rank, 1, samples.size());
        out.thresholds[static_cast<std::size_t>(k - 1)] = samples[rank - 1];
    }

    out.levels = label_grid(ct.dims, ct.spacing, 0);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (masks.organ.data[idx] == 0) continue;
        if (masks.vessels && masks.vessels->data[idx] != 0) continue;
        if (degenerate) {
            out.levels.data[idx] = static_cast<std::uint8_t>(level_count);
            continue;
        }
        int level = 1;
        for (std::int16_t t : out.thresholds) level += (t < ct.data[idx]);
        out.levels.data[idx] = static_cast<std::uint8_t>(level);
    }
    return out;
}

tumor_map init_tumor_map(const organ_map& organ, voxel_t seed) {
    if (!organ.levels.in_bounds(seed) || organ.levels.at(seed) == 0)
        fail(errc::seed_outside_organ, "seed voxel is not on parenchyma");
    tumor_map tm;
    tm.density = label_grid(organ.levels.dims, organ.levels.spacing, 0);
    tm.phase = label_grid(organ.levels.dims, organ.levels.spacing, 0);
    tm.density.at(seed) = 1;
    tm.phase.at(seed) = static_cast<std::uint8_t>(phase_code::active);
    return tm;
}

} // namespace tumorsynth
