#pragma once

#include <array>

#include "tumorsynth/rng.hpp"
#include "tumorsynth/types.hpp"

namespace tumorsynth {

/// Geometry of one hand-crafted lesion: a rotated ellipsoid whose surface
/// radius is scaled by (1 + elastic_amplitude * n(direction)), n being
/// smooth noise bounded in [-1,1] with angular correlation set by
/// elastic_sigma_mm. Amplitude 0 is the exact ellipsoid; larger amplitudes
/// read as lumpier, less spherical lesions.
struct shape_spec {
    std::array<double, 3> semiaxes_mm = {10.0, 10.0, 10.0};
    std::array<double, 3> euler_zyx_rad = {0.0, 0.0, 0.0};
    double elastic_sigma_mm = 4.0;
    double elastic_amplitude = 0.2; // fraction of radius, in [0, 0.5]
    int multifocal_count = 1;       // 1 primary + (count-1) satellites
};

/// Throws InvalidConfig when fields are out of range or the shape cannot
/// fit in a max_extent_mm cube.
void validate_shape(const shape_spec& spec, double max_extent_mm = 200.0);

/// Rasterizes the shape on a lesion-local grid (odd dims, center voxel at
/// the middle) at the given spacing and returns the 6-connected component
/// containing the center. The center voxel is always inside.
label_grid generate_shape(const shape_spec& spec, spacing_t spacing, const counter_rng& rng,
                          double max_extent_mm = 200.0);

} // namespace tumorsynth
