#pragma once

#include "tumorsynth/organ_map.hpp"
#include "tumorsynth/types.hpp"
#include "tumorsynth/volume_io.hpp"

namespace tumorsynth {

/// Per-voxel displacement in voxel units, one scalar grid per component.
/// `support` bounds the voxels that may carry a nonzero vector; warp treats
/// everything outside it as zero displacement and copies those voxels
/// bitwise, which is what makes the locality guarantee exact.
struct displacement_field {
    grid3<float> ux, uy, uz;
    box3 support;

    displacement_field() = default;
    displacement_field(dim3_t d, spacing_t s)
        : ux(d, s, 0.0f), uy(d, s, 0.0f), uz(d, s, 0.0f) {}

    double max_magnitude() const;
};

/// Radial pressure field around the lesion: u(x) = A g(r) (x-c)/r with
/// c the density-weighted centroid. g ramps quadratically from 0 at the
/// centroid to 1 at the equivalent-sphere radius, then decays by a cosine
/// to 0 at r_influence, so anatomy at the tumor surface moves outward by
/// up to strength * d_max voxels and nothing beyond r_influence moves at
/// all. Lesions under a few millimeters get a zero field (small tumors do
/// not push), and the amplitude is capped so the warp can never fold
/// (per-axis displacement gradients stay below 1).
displacement_field mass_effect_field(const tumor_map& tumor, double strength, double d_max,
                                     double r_influence_voxels);

/// Convenience: r_influence = equivalent-sphere radius + halfwidth_voxels.
displacement_field mass_effect_field_auto(const tumor_map& tumor, double strength, double d_max,
                                          double halfwidth_voxels = 8.0);

/// Pointwise sum of two fields over the union support, with the combined
/// magnitude clamped to d_max (used when a case carries several lesions).
displacement_field add_clamped(const displacement_field& a, const displacement_field& b,
                               double d_max);

/// Backward warp, trilinear interpolation with round-to-nearest HU:
/// out(x) = in(x - u(x)), sampling positions clamped to the grid edge.
hu_grid warp(const hu_grid& in, const displacement_field& field);

/// Backward warp, nearest-neighbor: labels keep their original value set.
label_grid warp(const label_grid& in, const displacement_field& field);

} // namespace tumorsynth
