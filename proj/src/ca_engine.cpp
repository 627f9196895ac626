#include "tumorsynth/ca_engine.hpp"

#include <algorithm>
#include <cmath>

#include "tumorsynth/edt.hpp"
#include "tumorsynth/error.hpp"

namespace tumorsynth {

void validate_rules(const growth_rules& rules, int level_count) {
    auto bad = [](const std::string& what) { fail(errc::invalid_config, what); };
    if (!(rules.p_grow >= 0.0 && rules.p_grow <= 1.0)) bad("p_grow must lie in [0,1]");
    if (!(rules.p_invade >= 0.0 && rules.p_invade <= 1.0)) bad("p_invade must lie in [0,1]");
    if (rules.invade_threshold < 1 || rules.invade_threshold > 10)
        bad("invade_threshold must lie in [1,10]");
    if (rules.level_multiplier.size() != static_cast<std::size_t>(level_count) + 1)
        bad("level_multiplier must have level_count+1 entries");
    if (rules.level_multiplier[0] != 0.0) bad("level_multiplier[0] must be 0");
    for (double m : rules.level_multiplier)
        if (!(m >= 0.0 && m <= 1.0)) bad("level multipliers must lie in [0,1]");
    if (rules.necrosis_depth < 0) bad("necrosis_depth must be >= 0");
    if (rules.death_stall_steps < 1) bad("death_stall_steps must be >= 1");
    if (rules.max_steps < 1) bad("max_steps must be >= 1");
}

namespace {

// One synchronous update confined to `bbox` (which must contain every tumor
// voxel); the box is widened in place when invasion claims new voxels.
step_report step_in_box(tumor_map& tumor, const organ_map& organ, const growth_rules& rules,
                        const counter_rng& rng, std::int64_t step_index, box3& bbox) {
    step_report rep;
    rep.step = step_index;
    if (bbox.empty()) return rep;

    label_grid& den = tumor.density;
    const dim3_t dims = den.dims;
    const box3 work = bbox.inflated(1, dims);

    const std::int32_t wx = work.hi.x - work.lo.x + 1;
    const std::int32_t wy = work.hi.y - work.lo.y + 1;
    const std::int32_t wz = work.hi.z - work.lo.z + 1;
    auto widx = [&](std::int32_t x, std::int32_t y, std::int32_t z) {
        return (x - work.lo.x) +
               static_cast<std::int64_t>(wx) *
                   ((y - work.lo.y) + static_cast<std::int64_t>(wy) * (z - work.lo.z));
    };

    // Snapshot of the pre-step densities over the work box. Every nonzero
    // voxel lies inside bbox, so anything outside the box reads as 0.
    static thread_local std::vector<std::uint8_t> old_d;
    old_d.assign(static_cast<std::size_t>(wx) * wy * wz, 0);
    for (std::int32_t z = work.lo.z; z <= work.hi.z; ++z)
        for (std::int32_t y = work.lo.y; y <= work.hi.y; ++y)
            for (std::int32_t x = work.lo.x; x <= work.hi.x; ++x)
                old_d[static_cast<std::size_t>(widx(x, y, z))] = den.at(x, y, z);
    auto old_at = [&](std::int32_t x, std::int32_t y, std::int32_t z) -> std::uint8_t {
        if (x < work.lo.x || x > work.hi.x || y < work.lo.y || y > work.hi.y || z < work.lo.z ||
            z > work.hi.z)
            return 0;
        return old_d[static_cast<std::size_t>(widx(x, y, z))];
    };

    const auto& mult = rules.level_multiplier;
    std::int64_t changes = 0;
    box3 grown = bbox;

    for (std::int32_t z = work.lo.z; z <= work.hi.z; ++z)
        for (std::int32_t y = work.lo.y; y <= work.hi.y; ++y)
            for (std::int32_t x = work.lo.x; x <= work.hi.x; ++x) {
                const std::uint8_t d = old_at(x, y, z);
                if (d == 0) continue;
                const std::uint64_t vid = static_cast<std::uint64_t>(den.index(x, y, z));
                if (d < tumor_map::kSaturated) {
                    const double p = rules.p_grow * mult[static_cast<std::size_t>(
                                                        organ.level_at(x, y, z))];
                    if (rng.bernoulli(p, rng_stream::proliferate,
                                      static_cast<std::uint64_t>(step_index), vid)) {
                        ++den.at(x, y, z);
                        ++changes;
                    }
                }
                if (d >= rules.invade_threshold) {
                    for (int dir = 0; dir < 6; ++dir) {
                        const std::int32_t nx = x + k6Neighbors[dir][0];
                        const std::int32_t ny = y + k6Neighbors[dir][1];
                        const std::int32_t nz = z + k6Neighbors[dir][2];
                        if (!den.in_bounds(nx, ny, nz)) continue;
                        if (old_at(nx, ny, nz) != 0) continue;
                        const int lvl = organ.level_at(nx, ny, nz);
                        if (lvl < 1) continue;
                        const double p = rules.p_invade * mult[static_cast<std::size_t>(lvl)];
                        if (!rng.bernoulli(p, rng_stream::invade,
                                           static_cast<std::uint64_t>(step_index), vid,
                                           static_cast<std::uint64_t>(dir)))
                            continue;
                        if (den.at(nx, ny, nz) == 0) {
                            den.at(nx, ny, nz) = 1;
                            ++changes;
                            grown.include({nx, ny, nz});
                        }
                    }
                }
            }

    bbox = grown;
    rep.grew = changes > 0;

    // Phase classification over the (possibly widened) lesion box, reading
    // the updated densities.
    const box3 cls = bbox.inflated(0, dims);
    label_grid& ph = tumor.phase;
    for (std::int32_t z = cls.lo.z; z <= cls.hi.z; ++z)
        for (std::int32_t y = cls.lo.y; y <= cls.hi.y; ++y)
            for (std::int32_t x = cls.lo.x; x <= cls.hi.x; ++x) {
                const std::uint8_t d = den.at(x, y, z);
                if (d == 0) {
                    ph.at(x, y, z) = static_cast<std::uint8_t>(phase_code::empty);
                    continue;
                }
                ++rep.tumor_voxels;
                if (d == tumor_map::kSaturated) ++rep.saturated_voxels;
                if (ph.at(x, y, z) == static_cast<std::uint8_t>(phase_code::necrotic)) {
                    ++rep.necrotic_voxels;
                    continue;
                }
                bool active = false;
                for (int dir = 0; dir < 6 && !active; ++dir) {
                    const std::int32_t nx = x + k6Neighbors[dir][0];
                    const std::int32_t ny = y + k6Neighbors[dir][1];
                    const std::int32_t nz = z + k6Neighbors[dir][2];
                    active = den.in_bounds(nx, ny, nz) && den.at(nx, ny, nz) == 0 &&
                             organ.level_at(nx, ny, nz) >= 1;
                }
                ph.at(x, y, z) = static_cast<std::uint8_t>(active ? phase_code::active
                                                                  : phase_code::quiescent);
            }

    // Necrosis: breadth-first erosion depth inside the saturated set. A
    // saturated voxel touching any non-saturated (or off-grid) neighbor has
    // depth 0; interior voxels take the hop count from that rim.
    static thread_local std::vector<std::int32_t> depth;
    static thread_local std::vector<std::int64_t> frontier, nextf;
    const std::int32_t cx = cls.hi.x - cls.lo.x + 1;
    const std::int32_t cy = cls.hi.y - cls.lo.y + 1;
    const std::int32_t cz = cls.hi.z - cls.lo.z + 1;
    auto cidx = [&](std::int32_t x, std::int32_t y, std::int32_t z) {
        return (x - cls.lo.x) +
               static_cast<std::int64_t>(cx) *
                   ((y - cls.lo.y) + static_cast<std::int64_t>(cy) * (z - cls.lo.z));
    };
    depth.assign(static_cast<std::size_t>(cx) * cy * cz, -1);
    frontier.clear();
    nextf.clear();
    auto saturated_at = [&](std::int32_t x, std::int32_t y, std::int32_t z) {
        return den.in_bounds(x, y, z) && den.at(x, y, z) == tumor_map::kSaturated;
    };
    for (std::int32_t z = cls.lo.z; z <= cls.hi.z; ++z)
        for (std::int32_t y = cls.lo.y; y <= cls.hi.y; ++y)
            for (std::int32_t x = cls.lo.x; x <= cls.hi.x; ++x) {
                if (den.at(x, y, z) != tumor_map::kSaturated) continue;
                bool rim = false;
                for (int dir = 0; dir < 6 && !rim; ++dir)
                    rim = !saturated_at(x + k6Neighbors[dir][0], y + k6Neighbors[dir][1],
                                        z + k6Neighbors[dir][2]);
                if (rim) {
                    depth[static_cast<std::size_t>(cidx(x, y, z))] = 0;
                    frontier.push_back(cidx(x, y, z));
                }
            }
    std::int32_t level = 0;
    while (!frontier.empty()) {
        nextf.clear();
        for (std::int64_t ci : frontier) {
            const std::int32_t lx = static_cast<std::int32_t>(ci % cx);
            const std::int32_t rem = static_cast<std::int32_t>(ci / cx);
            const std::int32_t ly = rem % cy;
            const std::int32_t lz = rem / cy;
            const std::int32_t x = cls.lo.x + lx, y = cls.lo.y + ly, z = cls.lo.z + lz;
            for (int dir = 0; dir < 6; ++dir) {
                const std::int32_t nx = x + k6Neighbors[dir][0];
                const std::int32_t ny = y + k6Neighbors[dir][1];
                const std::int32_t nz = z + k6Neighbors[dir][2];
                if (nx < cls.lo.x || nx > cls.hi.x || ny < cls.lo.y || ny > cls.hi.y ||
                    nz < cls.lo.z || nz > cls.hi.z)
                    continue;
                if (!saturated_at(nx, ny, nz)) continue;
                auto& dn = depth[static_cast<std::size_t>(cidx(nx, ny, nz))];
                if (dn >= 0) continue;
                dn = level + 1;
                nextf.push_back(cidx(nx, ny, nz));
            }
        }
        frontier.swap(nextf);
        ++level;
    }
    for (std::int32_t z = cls.lo.z; z <= cls.hi.z; ++z)
        for (std::int32_t y = cls.lo.y; y <= cls.hi.y; ++y)
            for (std::int32_t x = cls.lo.x; x <= cls.hi.x; ++x) {
                if (den.at(x, y, z) != tumor_map::kSaturated) continue;
                if (ph.at(x, y, z) != static_cast<std::uint8_t>(phase_code::quiescent)) continue;
                if (depth[static_cast<std::size_t>(cidx(x, y, z))] >= rules.necrosis_depth) {
                    ph.at(x, y, z) = static_cast<std::uint8_t>(phase_code::necrotic);
                    ++rep.necrotic_voxels;
                }
            }

    return rep;
}

box3 tumor_bbox(const tumor_map& tumor) {
    box3 b;
    const dim3_t d = tumor.density.dims;
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t y = 0; y < d.ny; ++y)
            for (std::int32_t x = 0; x < d.nx; ++x)
                if (tumor.density.at(x, y, z) >= 1) b.include({x, y, z});
    return b;
}

} // namespace

step_report step(tumor_map& tumor, const organ_map& organ, const growth_rules& rules,
                 const counter_rng& rng, std::int64_t step_index) {
    if (tumor.density.dims != organ.levels.dims)
        fail(errc::dimension_mismatch, "tumor and organ map dims differ");
    validate_rules(rules, organ.level_count);
    box3 bbox = tumor_bbox(tumor);
    return step_in_box(tumor, organ, rules, rng, step_index, bbox);
}

growth_result run_growth(tumor_map& tumor, const organ_map& organ, const growth_rules& rules,
                         const counter_rng& rng, double target_volume_mm3) {
    if (tumor.density.dims != organ.levels.dims)
        fail(errc::dimension_mismatch, "tumor and organ map dims differ");
    validate_rules(rules, organ.level_count);
    if (!(target_volume_mm3 > 0.0)) fail(errc::invalid_config, "target volume must be positive");

    growth_result res;

    std::int64_t capacity_voxels = 0;
    for (std::uint8_t lvl : organ.levels.data) capacity_voxels += (lvl >= 1);
    const double voxel_mm3 = tumor.density.spacing.voxel_mm3();
    res.target_unreachable = target_volume_mm3 > static_cast<double>(capacity_voxels) * voxel_mm3;

    box3 bbox = tumor_bbox(tumor);
    double volume = tumor.physical_volume_mm3();
    int stall = 0;
    for (std::int64_t s = 1; s <= rules.max_steps; ++s) {
        if (volume >= target_volume_mm3) return res;
        const step_report rep = step_in_box(tumor, organ, rules, rng, s, bbox);
        res.reports.push_back(rep);
        volume = static_cast<double>(rep.tumor_voxels) * voxel_mm3;
        stall = rep.grew ? 0 : stall + 1;
        if (stall >= rules.death_stall_steps) {
            res.died = true;
            return res;
        }
    }
    res.hit_step_cap = volume < target_volume_mm3;
    return res;
}

voxel_t sample_seed(const mask_set& masks, const organ_map& organ, const counter_rng& rng,
                    int min_margin_voxels, std::uint64_t draw_key) {
    if (organ.levels.dims != masks.organ.dims)
        fail(errc::dimension_mismatch, "organ map and mask dims differ");
    const dim3_t d = organ.levels.dims;

    // Keep-away set: organ boundary plus vessels, measured in voxel steps.
    label_grid avoid = masks.boundary;
    if (masks.vessels)
        for (std::size_t i = 0; i < avoid.data.size(); ++i)
            avoid.data[i] = avoid.data[i] || masks.vessels->data[i];
    const std::vector<double> sq = squared_edt(avoid, 1.0, 1.0, 1.0);

    const double margin2 =
        static_cast<double>(min_margin_voxels) * static_cast<double>(min_margin_voxels);
    std::vector<std::int64_t> eligible;
    for (std::int64_t i = 0; i < d.total(); ++i)
        if (organ.levels.data[static_cast<std::size_t>(i)] >= 1 &&
            sq[static_cast<std::size_t>(i)] >= margin2)
            eligible.push_back(i);
    if (eligible.empty())
        fail(errc::no_eligible_seed, "no organ voxel clears the seed margin of " +
                                         std::to_string(min_margin_voxels) + " voxels");

    const double u = rng.uniform(rng_stream::seed_sample, draw_key, 0);
    const auto pick = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(eligible.size()) - 1.0,
                         u * static_cast<double>(eligible.size())));
    const std::int64_t idx = eligible[pick];
    const std::int32_t x = static_cast<std::int32_t>(idx % d.nx);
    const std::int32_t y = static_cast<std::int32_t>((idx / d.nx) % d.ny);
    const std::int32_t z = static_cast<std::int32_t>(idx / (static_cast<std::int64_t>(d.nx) * d.ny));
    return {x, y, z};
}

} // namespace tumorsynth
