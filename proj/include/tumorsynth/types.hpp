#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <vector>

namespace tumorsynth {

constexpr std::int16_t kHuMin = -1024;
constexpr std::int16_t kHuMax = 3071;

struct dim3_t {
    std::int32_t nx = 0;
    std::int32_t ny = 0;
    std::int32_t nz = 0;

    std::int64_t total() const {
        return static_cast<std::int64_t>(nx) * ny * nz;
    }
    bool operator==(const dim3_t&) const = default;
};

struct spacing_t {
    float sx = 1.0f;
    float sy = 1.0f;
    float sz = 1.0f;

    double voxel_mm3() const {
        return static_cast<double>(sx) * sy * sz;
    }
    bool operator==(const spacing_t&) const = default;
};

struct voxel_t {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t z = 0;
    bool operator==(const voxel_t&) const = default;
};

/// Dense 3D scalar grid stored x-fastest (then y, then z), with physical
/// voxel spacing in millimeters. The workhorse container for CT intensities
/// (int16) and label/density bytes (uint8).
template <class T>
struct grid3 {
    dim3_t dims;
    spacing_t spacing;
    std::vector<T> data;

    grid3() = default;
    grid3(dim3_t d, spacing_t s, T fill = T{})
        : dims(d), spacing(s), data(static_cast<std::size_t>(d.total()), fill) {}

    std::int64_t index(std::int32_t x, std::int32_t y, std::int32_t z) const {
        return x + static_cast<std::int64_t>(dims.nx) * (y + static_cast<std::int64_t>(dims.ny) * z);
    }
    bool in_bounds(std::int32_t x, std::int32_t y, std::int32_t z) const {
        return x >= 0 && x < dims.nx && y >= 0 && y < dims.ny && z >= 0 && z < dims.nz;
    }
    bool in_bounds(voxel_t v) const { return in_bounds(v.x, v.y, v.z); }

    T& at(std::int32_t x, std::int32_t y, std::int32_t z) {
        assert(in_bounds(x, y, z));
        return data[static_cast<std::size_t>(index(x, y, z))];
    }
    const T& at(std::int32_t x, std::int32_t y, std::int32_t z) const {
        assert(in_bounds(x, y, z));
        return data[static_cast<std::size_t>(index(x, y, z))];
    }
    T& at(voxel_t v) { return at(v.x, v.y, v.z); }
    const T& at(voxel_t v) const { return at(v.x, v.y, v.z); }

    /// Value at (x,y,z), or `outside` when the coordinate is off-grid.
    T at_or(std::int32_t x, std::int32_t y, std::int32_t z, T outside) const {
        return in_bounds(x, y, z) ? at(x, y, z) : outside;
    }

    bool operator==(const grid3&) const = default;
};

using hu_grid = grid3<std::int16_t>;
using label_grid = grid3<std::uint8_t>;

/// Face-neighbor offsets (6-connectivity), fixed order: -x +x -y +y -z +z.
inline constexpr std::int32_t k6Neighbors[6][3] = {
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1},
};

/// Inclusive voxel-index bounding box.
struct box3 {
    voxel_t lo{0, 0, 0};
    voxel_t hi{-1, -1, -1};

    bool empty() const { return hi.x < lo.x || hi.y < lo.y || hi.z < lo.z; }
    void include(voxel_t v) {
        if (empty()) {
            lo = hi = v;
            return;
        }
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        lo.z = std::min(lo.z, v.z);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
        hi.z = std::max(hi.z, v.z);
    }
    /// Grow by `m` voxels on every side, clamped to `dims`.
    box3 inflated(std::int32_t m, dim3_t dims) const {
        if (empty()) return *this;
        box3 b;
        b.lo = {std::max(0, lo.x - m), std::max(0, lo.y - m), std::max(0, lo.z - m)};
        b.hi = {std::min(dims.nx - 1, hi.x + m), std::min(dims.ny - 1, hi.y + m),
                std::min(dims.nz - 1, hi.z + m)};
        return b;
    }
};

} // namespace tumorsynth
