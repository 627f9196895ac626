#pragma once

#include <filesystem>
#include <optional>
#include <variant>

#include "tumorsynth/error.hpp"
#include "tumorsynth/types.hpp"

namespace tumorsynth {

enum class voxel_kind : std::uint8_t {
    hu_int16 = 0,
    label_u8 = 1,
};

/// A loaded volume: either calibrated CT intensities or label bytes.
using volume = std::variant<hu_grid, label_grid>;

voxel_kind kind_of(const volume& v);
dim3_t dims_of(const volume& v);
spacing_t spacing_of(const volume& v);

/// Load an RVOL container or an uncompressed single-file NIfTI-1 volume.
///
/// RVOL (little-endian): magic "RVOL", version u32 = 1, kind u8
/// (0 = HU int16, 1 = label u8), 3 reserved zero bytes, nx/ny/nz u32,
/// sx/sy/sz f32, then the payload in x-fastest order. The payload byte
/// count must equal nx*ny*nz*bytes-per-voxel exactly; short or long files
/// are rejected rather than silently truncated.
///
/// NIfTI-1 (read-only): datatype 4 (int16) or 2 (uint8), dims from
/// dim[1..3], spacing from pixdim[1..3]; byte order is normalized to the
/// host; all other header fields are ignored. Values outside the HU range
/// [-1024, 3071] are clamped on ingest.
volume load_volume(const std::filesystem::path& path);

/// Write `v` as an RVOL container. Reloading yields an equal volume.
void save_volume(const volume& v, const std::filesystem::path& path);

/// Organ-shell extraction: output voxel = 1 iff the organ voxel has at
/// least one zero 6-neighbor (out-of-grid counts as zero).
label_grid derive_boundary(const label_grid& organ);

/// Organ mask plus optional vessel mask plus the derived boundary shell.
struct mask_set {
    label_grid organ;
    std::optional<label_grid> vessels;
    label_grid boundary;

    bool has_vessel(std::int32_t x, std::int32_t y, std::int32_t z) const {
        return vessels && vessels->at(x, y, z) != 0;
    }
};

/// Validates binarity, matching geometry, and vessel containment
/// (vessel voxels must lie inside the organ), then derives the boundary.
mask_set make_mask_set(label_grid organ, std::optional<label_grid> vessels = std::nullopt);

mask_set load_mask_set(const std::filesystem::path& organ_path,
                       const std::optional<std::filesystem::path>& vessel_path = std::nullopt);

} // namespace tumorsynth
