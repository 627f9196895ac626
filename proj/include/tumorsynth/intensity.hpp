#pragma once

#include <optional>
#include <vector>

#include "tumorsynth/organ_map.hpp"
#include "tumorsynth/rng.hpp"
#include "tumorsynth/types.hpp"

namespace tumorsynth {

/// How a lesion reads in HU. hu_base is the per-lesion tone, normally
/// sampled uniformly from the organ preset's [hu_range_min, hu_range_max];
/// value noise adds texture_sigma of multiscale texture on top, necrotic
/// voxels drop by necrosis_delta, and lesions past the capsule size gate
/// get a one-voxel brightened rim.
struct intensity_model {
    std::optional<double> hu_base;
    double hu_range_min = 36.0;
    double hu_range_max = 162.0;
    double necrosis_delta = -30.0;
    double texture_sigma = 15.0;
    std::vector<int> texture_scales = {2, 4, 8}; // wavelengths in voxels
    int blend_halfwidth = 2;                     // voxels of rim smoothing
    bool capsule_enabled = true;
    double capsule_delta = 15.0;
    double capsule_min_radius_mm = 10.0;
};

/// Throws InvalidConfig on out-of-range fields (resolved hu_base outside
/// hu_range, negative sigma, empty or non-positive scales, ...).
void validate_model(const intensity_model& model, bool require_resolved_base = false);

/// Multiscale value noise: a sum of trilinearly interpolated lattices of
/// uniform [-1,1] node values (one lattice per wavelength in `scales`),
/// rescaled to mean 0 and standard deviation `sigma` over the whole field.
/// Node draws are keyed by (scale index, node index) on `stream`, so the
/// field is a pure function of (rng seed, dims, scales, sigma).
grid3<float> value_noise(dim3_t dims, const std::vector<int>& scales, double sigma,
                         const counter_rng& rng, rng_stream stream = rng_stream::texture);

/// Blends the lesion into the CT: out = (1-w) ct + w T with
///   w(x) = max over tumor voxels t of density(t)/10 * taper(|x-t|),
///   taper = cosine rolloff hitting 0 at blend_halfwidth+1 voxels,
/// so saturated voxels read pure tumor (w=1) and the shell fades over
/// blend_halfwidth voxels; blend_halfwidth 0 gives w = density/10 exactly.
/// T = hu_base + texture noise, necrosis_delta lower on necrotic voxels.
/// When the capsule gate passes, the one-voxel rim outside the mask gets
/// ct + capsule_delta as its background before blending. Voxels with w = 0
/// off the rim come out bit-identical; results clamp to valid HU.
hu_grid render(const hu_grid& ct, const tumor_map& tumor, const intensity_model& model,
               const counter_rng& rng);

} // namespace tumorsynth
