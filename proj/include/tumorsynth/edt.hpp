#pragma once

#include "tumorsynth/types.hpp"

namespace tumorsynth {

/// Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher,
/// separable lower-envelope scan per axis). `source` marks the zero-distance
/// voxels; distances are measured between voxel centers, scaled per axis by
/// `step` (millimeters, or 1 for voxel units). Returns +inf everywhere when
/// the source set is empty.
std::vector<double> squared_edt(const label_grid& source, double step_x, double step_y,
                                double step_z);

} // namespace tumorsynth
