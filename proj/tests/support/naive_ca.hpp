#pragma once

// Straight-line re-implementation of the automaton update used as an
// oracle: full-grid passes, no bounding box, layer-peeling erosion instead
// of BFS. Shares nothing with the engine except the RNG keying contract.

#include <cstdint>
#include <vector>

#include "tumorsynth/ca_engine.hpp"
#include "tumorsynth/organ_map.hpp"
#include "tumorsynth/rng.hpp"

namespace tsupport {

inline tumorsynth::step_report naive_step(tumorsynth::tumor_map& tumor,
                                          const tumorsynth::organ_map& organ,
                                          const tumorsynth::growth_rules& rules,
                                          const tumorsynth::counter_rng& rng,
                                          std::int64_t step_index) {
    using namespace tumorsynth;
    label_grid& den = tumor.density;
    label_grid& ph = tumor.phase;
    const dim3_t d = den.dims;
    const std::vector<std::uint8_t> before = den.data;
    auto old_of = [&](std::int32_t x, std::int32_t y, std::int32_t z) -> std::uint8_t {
        if (!den.in_bounds(x, y, z)) return 0;
        return before[static_cast<std::size_t>(den.index(x, y, z))];
    };

    step_report rep;
    rep.step = step_index;
    std::int64_t changes = 0;

    // Pass 1: proliferation, judged purely on pre-step densities.
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t y = 0; y < d.ny; ++y)
            for (std::int32_t x = 0; x < d.nx; ++x) {
                const std::uint8_t v = old_of(x, y, z);
                if (v < 1 || v >= tumor_map::kSaturated) continue;
                const double p =
                    rules.p_grow *
                    rules.level_multiplier[static_cast<std::size_t>(organ.level_at(x, y, z))];
                if (rng.bernoulli(p, rng_stream::proliferate,
                                  static_cast<std::uint64_t>(step_index),
                                  static_cast<std::uint64_t>(den.index(x, y, z)))) {
                    den.at(x, y, z) = static_cast<std::uint8_t>(v + 1);
                    ++changes;
                }
            }

    // Pass 2: invasion from sources at or above the threshold (pre-step
    // densities again); a target invaded by several sources still lands at
    // density 1.
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t y = 0; y < d.ny; ++y)
            for (std::int32_t x = 0; x < d.nx; ++x) {
                if (old_of(x, y, z) < rules.invade_threshold) continue;
                for (int dir = 0; dir < 6; ++dir) {
                    const std::int32_t nx = x + k6Neighbors[dir][0];
                    const std::int32_t ny = y + k6Neighbors[dir][1];
                    const std::int32_t nz = z + k6Neighbors[dir][2];
                    if (!den.in_bounds(nx, ny, nz)) continue;
                    if (old_of(nx, ny, nz) != 0) continue;
                    const int lvl = organ.level_at(nx, ny, nz);
                    if (lvl < 1) continue;
                    const double p =
                        rules.p_invade *
                        rules.level_multiplier[static_cast<std::size_t>(lvl)];
                    if (rng.bernoulli(p, rng_stream::invade,
                                      static_cast<std::uint64_t>(step_index),
                                      static_cast<std::uint64_t>(den.index(x, y, z)),
                                      static_cast<std::uint64_t>(dir)) &&
                        den.at(nx, ny, nz) == 0) {
                        den.at(nx, ny, nz) = 1;
                        ++changes;
                    }
                }
            }
    rep.grew = changes > 0;

    // Pass 3: phase classification against the updated densities.
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t y = 0; y < d.ny; ++y)
            for (std::int32_t x = 0; x < d.nx; ++x) {
                if (den.at(x, y, z) == 0) {
                    ph.at(x, y, z) = static_cast<std::uint8_t>(phase_code::empty);
                    continue;
                }
                ++rep.tumor_voxels;
                if (den.at(x, y, z) == tumor_map::kSaturated) ++rep.saturated_voxels;
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

    // Pass 4: erosion depth by repeated layer peeling of the saturated set.
    std::vector<std::int32_t> depth(den.data.size(), -1);
    std::vector<std::uint8_t> sat(den.data.size(), 0);
    for (std::size_t i = 0; i < den.data.size(); ++i)
        sat[i] = den.data[i] == tumor_map::kSaturated;
    for (std::int32_t layer = 0;; ++layer) {
        std::vector<std::int64_t> peel;
        for (std::int32_t z = 0; z < d.nz; ++z)
            for (std::int32_t y = 0; y < d.ny; ++y)
                for (std::int32_t x = 0; x < d.nx; ++x) {
                    const std::int64_t i = den.index(x, y, z);
                    if (!sat[static_cast<std::size_t>(i)]) continue;
                    bool exposed = false;
                    for (int dir = 0; dir < 6 && !exposed; ++dir) {
                        const std::int32_t nx = x + k6Neighbors[dir][0];
                        const std::int32_t ny = y + k6Neighbors[dir][1];
                        const std::int32_t nz = z + k6Neighbors[dir][2];
                        exposed = !den.in_bounds(nx, ny, nz) ||
                                  !sat[static_cast<std::size_t>(den.index(nx, ny, nz))];
                    }
                    if (exposed) peel.push_back(i);
                }
        if (peel.empty()) break;
        for (std::int64_t i : peel) {
            depth[static_cast<std::size_t>(i)] = layer;
            sat[static_cast<std::size_t>(i)] = 0;
        }
    }
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t y = 0; y < d.ny; ++y)
            for (std::int32_t x = 0; x < d.nx; ++x) {
                const std::int64_t i = den.index(x, y, z);
                if (den.data[static_cast<std::size_t>(i)] != tumor_map::kSaturated) continue;
                if (ph.data[static_cast<std::size_t>(i)] !=
                    static_cast<std::uint8_t>(phase_code::quiescent))
                    continue;
                if (depth[static_cast<std::size_t>(i)] >= rules.necrosis_depth) {
                    ph.data[static_cast<std::size_t>(i)] =
                        static_cast<std::uint8_t>(phase_code::necrotic);
                    ++rep.necrotic_voxels;
                }
            }
    return rep;
}

} // namespace tsupport
