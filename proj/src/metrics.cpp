#include "tumorsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tumorsynth/edt.hpp"
#include "tumorsynth/error.hpp"
#include "tumorsynth/volume_io.hpp"

namespace tumorsynth {

double dsc(const label_grid& a, const label_grid& b) {
    if (a.dims != b.dims) fail(errc::dimension_mismatch, "dsc mask dims differ");
    std::int64_t na = 0, nb = 0, inter = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool va = a.data[i] != 0, vb = b.data[i] != 0;
        na += va;
        nb += vb;
        inter += (va && vb);
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

namespace {

std::vector<voxel_t> boundary_voxels(const label_grid& boundary) {
    std::vector<voxel_t> out;
    for (std::int32_t z = 0; z < boundary.dims.nz; ++z)
        for (std::int32_t y = 0; y < boundary.dims.ny; ++y)
            for (std::int32_t x = 0; x < boundary.dims.nx; ++x)
                if (boundary.at(x, y, z)) out.push_back({x, y, z});
    return out;
}

// d^2 <= tau^2 hits, pairwise.
std::int64_t hits_brute(const std::vector<voxel_t>& from, const std::vector<voxel_t>& to,
                        spacing_t sp, double tau2) {
    std::int64_t hits = 0;
    for (const voxel_t& p : from) {
        bool ok = false;
        for (const voxel_t& q : to) {
            const double dx = (p.x - q.x) * static_cast<double>(sp.sx);
            const double dy = (p.y - q.y) * static_cast<double>(sp.sy);
            const double dz = (p.z - q.z) * static_cast<double>(sp.sz);
            if (dx * dx + dy * dy + dz * dz <= tau2) {
                ok = true;
                break;
            }
        }
        hits += ok;
    }
    return hits;
}

std::int64_t hits_edt(const std::vector<voxel_t>& from, const label_grid& to_boundary,
                      spacing_t sp, double tau2) {
    const std::vector<double> sq = squared_edt(to_boundary, sp.sx, sp.sy, sp.sz);
    std::int64_t hits = 0;
    for (const voxel_t& p : from)
        hits += sq[static_cast<std::size_t>(to_boundary.index(p.x, p.y, p.z))] <= tau2;
    return hits;
}

} // namespace

double nsd(const label_grid& a, const label_grid& b, surface_tolerance tol) {
    if (a.dims != b.dims) fail(errc::dimension_mismatch, "nsd mask dims differ");
    if (!(a.spacing == b.spacing)) fail(errc::dimension_mismatch, "nsd mask spacings differ");
    if (!(tol.tau_mm >= 0.0)) fail(errc::invalid_config, "nsd tolerance must be >= 0");

    const label_grid ba = derive_boundary(a);
    const label_grid bb = derive_boundary(b);
    const std::vector<voxel_t> va = boundary_voxels(ba);
    const std::vector<voxel_t> vb = boundary_voxels(bb);
    if (va.empty() && vb.empty()) return 1.0;
    if (va.empty() || vb.empty()) return 0.0;

    const double tau2 = tol.tau_mm * tol.tau_mm;
    constexpr std::size_t kBruteLimit = 10000;
    std::int64_t hits;
    if (va.size() + vb.size() <= kBruteLimit)
        hits = hits_brute(va, vb, a.spacing, tau2) + hits_brute(vb, va, a.spacing, tau2);
    else
        hits = hits_edt(va, bb, a.spacing, tau2) + hits_edt(vb, ba, a.spacing, tau2);
    return static_cast<double>(hits) / static_cast<double>(va.size() + vb.size());
}

reader_scores reader_metrics(const std::vector<reader_row>& rows, unsure_policy policy) {
    if (rows.empty()) fail(errc::empty_input, "reader metrics need at least one row");
    std::int64_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (const reader_row& r : rows) {
        if (r.call == sample_call::unsure && policy == unsure_policy::drop) continue;
        const bool correct = (r.truth == sample_truth::real && r.call == sample_call::real) ||
                             (r.truth == sample_truth::synthetic &&
                              r.call == sample_call::synthetic);
        if (r.truth == sample_truth::real)
            correct ? ++tp : ++fn;
        else
            correct ? ++tn : ++fp;
    }
    const std::int64_t n = tp + fn + tn + fp;
    if (n == 0) fail(errc::empty_input, "every row was dropped as unsure");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    reader_scores s;
    s.sensitivity = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : nan;
    s.specificity = (tn + fp) ? static_cast<double>(tn) / (tn + fp) : nan;
    s.accuracy = static_cast<double>(tp + tn) / static_cast<double>(n);
    return s;
}

std::vector<std::pair<std::string, double>> feature_vector::named() const {
    return {{"mean", mean},
            {"std", stddev},
            {"median", median},
            {"p10", p10},
            {"p90", p90},
            {"entropy", entropy},
            {"volume_mm3", volume_mm3},
            {"surface_area_mm2", surface_area_mm2},
            {"sphericity", sphericity},
            {"equivalent_diameter_mm", equivalent_diameter_mm},
            {"elongation", elongation}};
}

namespace {

// Largest two eigenvalues of a symmetric 3x3 via cyclic Jacobi sweeps.
std::array<double, 3> sym3_eigenvalues(double m[3][3]) {
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(m[p][q]) < 1e-18) continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double mkp = m[k][p], mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double mpk = m[p][k], mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
    }
    std::array<double, 3> ev{m[0][0], m[1][1], m[2][2]};
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

constexpr double kPi = 3.14159265358979323846;

} // namespace

feature_vector extract_features(const hu_grid& image, const label_grid& mask) {
    if (image.dims != mask.dims) fail(errc::dimension_mismatch, "image and mask dims differ");

    std::vector<double> vals;
    std::vector<voxel_t> vox;
    for (std::int32_t z = 0; z < mask.dims.nz; ++z)
        for (std::int32_t y = 0; y < mask.dims.ny; ++y)
            for (std::int32_t x = 0; x < mask.dims.nx; ++x)
                if (mask.at(x, y, z)) {
                    vals.push_back(image.at(x, y, z));
                    vox.push_back({x, y, z});
                }
    if (vals.empty()) fail(errc::empty_mask, "feature extraction needs a nonempty mask");
    const auto n = static_cast<double>(vals.size());

    feature_vector f;
    for (double v : vals) f.mean += v;
    f.mean /= n;
    for (double v : vals) f.stddev += (v - f.mean) * (v - f.mean);
    f.stddev = std::sqrt(f.stddev / n);

    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t half = sorted.size() / 2;
    f.median = (sorted.size() % 2) ? sorted[half] : 0.5 * (sorted[half - 1] + sorted[half]);
    auto nearest_rank = [&](double p) {
        auto r = static_cast<std::size_t>(std::ceil(p * n));
        r = std::clamp<std::size_t>(r, 1, sorted.size());
        return sorted[r - 1];
    };
    f.p10 = nearest_rank(0.10);
    f.p90 = nearest_rank(0.90);

    const double lo = sorted.front(), hi = sorted.back();
    if (hi > lo) {
        constexpr int kBins = 32;
        std::array<std::int64_t, kBins> bins{};
        for (double v : vals) {
            auto b = static_cast<int>((v - lo) / (hi - lo) * kBins);
            ++bins[static_cast<std::size_t>(std::min(b, kBins - 1))];
        }
        for (std::int64_t c : bins)
            if (c > 0) {
                const double p = static_cast<double>(c) / n;
                f.entropy -= p * std::log2(p);
            }
    }

    const spacing_t sp = mask.spacing;
    f.volume_mm3 = n * sp.voxel_mm3();
    const double face_area[3] = {static_cast<double>(sp.sy) * sp.sz,
                                 static_cast<double>(sp.sx) * sp.sz,
                                 static_cast<double>(sp.sx) * sp.sy};
    for (const voxel_t& v : vox)
        for (int k = 0; k < 6; ++k)
            if (!mask.at_or(v.x + k6Neighbors[k][0], v.y + k6Neighbors[k][1],
                            v.z + k6Neighbors[k][2], 0))
                f.surface_area_mm2 += face_area[k / 2];
    f.sphericity = std::pow(kPi, 1.0 / 3.0) * std::pow(6.0 * f.volume_mm3, 2.0 / 3.0) /
                   f.surface_area_mm2;
    f.equivalent_diameter_mm = 2.0 * std::cbrt(3.0 * f.volume_mm3 / (4.0 * kPi));

    double cx = 0, cy = 0, cz = 0;
    for (const voxel_t& v : vox) {
        cx += v.x * static_cast<double>(sp.sx);
        cy += v.y * static_cast<double>(sp.sy);
        cz += v.z * static_cast<double>(sp.sz);
    }
    cx /= n;
    cy /= n;
    cz /= n;
    double cov[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (const voxel_t& v : vox) {
        const double d[3] = {v.x * static_cast<double>(sp.sx) - cx,
                             v.y * static_cast<double>(sp.sy) - cy,
                             v.z * static_cast<double>(sp.sz) - cz};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) cov[i][j] += d[i] * d[j] / n;
    }
    const auto ev = sym3_eigenvalues(cov);
    f.elongation = ev[0] > 1e-12 ? std::sqrt(std::max(0.0, ev[1]) / ev[0]) : 1.0;
    return f;
}

} // namespace tumorsynth
