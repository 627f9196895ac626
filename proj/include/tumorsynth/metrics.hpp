#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tumorsynth/types.hpp"

namespace tumorsynth {

/// Overlap 2|A∩B| / (|A|+|B|), nonzero voxels as members; 1.0 when both
/// masks are empty.
double dsc(const label_grid& a, const label_grid& b);

struct surface_tolerance {
    double tau_mm = 2.0;
};

/// Fraction of the two masks' boundary voxels lying within tau (mm,
/// inclusive) of the other mask's boundary:
///   (|dA within tau of dB| + |dB within tau of dA|) / (|dA| + |dB|).
/// Both masks empty: 1.0; exactly one empty: 0.0. Pairwise distances for
/// small boundaries, a distance transform above 10^4 boundary voxels; the
/// two paths agree exactly.
double nsd(const label_grid& a, const label_grid& b, surface_tolerance tol);

enum class sample_truth : std::uint8_t { real, synthetic };
enum class sample_call : std::uint8_t { real, synthetic, unsure };

struct reader_row {
    sample_truth truth;
    sample_call call;
};

/// What to do with "unsure" answers: score them as wrong for their truth
/// class (default), or drop those rows before scoring.
enum class unsure_policy : std::uint8_t { incorrect, drop };

struct reader_scores {
    double sensitivity; // real cases called real
    double specificity; // synthetic cases called synthetic
    double accuracy;
};

/// Two-class confusion metrics with real cases as positives. A score whose
/// class is absent from the rows comes back NaN.
reader_scores reader_metrics(const std::vector<reader_row>& rows,
                             unsure_policy policy = unsure_policy::incorrect);

/// First-order intensity statistics over the mask plus mask geometry.
struct feature_vector {
    double mean = 0, stddev = 0, median = 0, p10 = 0, p90 = 0, entropy = 0;
    double volume_mm3 = 0, surface_area_mm2 = 0, sphericity = 0;
    double equivalent_diameter_mm = 0, elongation = 0;

    /// Fixed-order (name, value) pairs for CSV emission.
    std::vector<std::pair<std::string, double>> named() const;
};

/// Intensity stats use the image values at nonzero mask voxels; surface
/// area counts exposed voxel faces weighted by physical face areas;
/// sphericity = pi^(1/3) (6V)^(2/3) / A; elongation = sqrt of the ratio of
/// the two largest principal moments of the voxel positions (1 for
/// degenerate masks). Entropy uses 32 equal-width bins in bits.
feature_vector extract_features(const hu_grid& image, const label_grid& mask);

} // namespace tumorsynth
