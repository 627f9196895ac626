#include "tumorsynth/mass_effect.hpp"

#include <algorithm>
#include <cmath>

#include "tumorsynth/error.hpp"

namespace tumorsynth {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Fraction of full pressure as a function of equivalent-sphere radius in
// millimeters: tiny lesions push nothing, full effect from 8 mm up.
double size_gate(double radius_mm) {
    constexpr double lo = 2.0, hi = 8.0;
    if (radius_mm <= lo) return 0.0;
    if (radius_mm >= hi) return 1.0;
    const double t = (radius_mm - lo) / (hi - lo);
    return t * t * (3.0 - 2.0 * t);
}

} // namespace

double displacement_field::max_magnitude() const {
    if (support.empty()) return 0.0;
    double best = 0.0;
    for (std::int32_t z = support.lo.z; z <= support.hi.z; ++z)
        for (std::int32_t y = support.lo.y; y <= support.hi.y; ++y)
            for (std::int32_t x = support.lo.x; x <= support.hi.x; ++x) {
                const double a = ux.at(x, y, z), b = uy.at(x, y, z), c = uz.at(x, y, z);
                best = std::max(best, a * a + b * b + c * c);
            }
    return std::sqrt(best);
}

displacement_field mass_effect_field(const tumor_map& tumor, double strength, double d_max,
                                     double r_influence_voxels) {
    if (!(strength >= 0.0 && strength <= 1.0))
        fail(errc::invalid_config, "mass-effect strength must lie in [0,1]");
    if (!(d_max > 0.0)) fail(errc::invalid_config, "d_max must be positive");
    if (!(r_influence_voxels > 0.0)) fail(errc::invalid_config, "r_influence must be positive");

    const label_grid& den = tumor.density;
    displacement_field f(den.dims, den.spacing);

    double wsum = 0.0, cx = 0.0, cy = 0.0, cz = 0.0;
    std::int64_t count = 0;
    for (std::int32_t z = 0; z < den.dims.nz; ++z)
        for (std::int32_t y = 0; y < den.dims.ny; ++y)
            for (std::int32_t x = 0; x < den.dims.nx; ++x) {
                const double w = den.at(x, y, z);
                if (w <= 0.0) continue;
                wsum += w;
                cx += w * x;
                cy += w * y;
                cz += w * z;
                ++count;
            }
    if (count == 0) fail(errc::empty_tumor, "mass effect needs a nonempty tumor");
    cx /= wsum;
    cy /= wsum;
    cz /= wsum;

    const double r_t = std::cbrt(3.0 * static_cast<double>(count) / (4.0 * kPi));
    const double r_mm = std::cbrt(3.0 * static_cast<double>(count) * den.spacing.voxel_mm3() /
                                  (4.0 * kPi));
    const double falloff = r_influence_voxels - r_t;
    double amp = strength * d_max * size_gate(r_mm);
    if (falloff <= 0.0) amp = 0.0;
    // Keep per-axis displacement gradients under 1 so the warp stays
    // injective: the ramp slope is 2A/r_t, the falloff slope A*pi/(2W).
    if (amp > 0.0)
        amp = std::min(amp, 0.9 * std::min(r_t / 2.0, 2.0 * falloff / kPi));
    if (amp <= 0.0) return f; // empty support: identity warp

    box3 sup;
    sup.include({static_cast<std::int32_t>(std::floor(cx - r_influence_voxels)),
                 static_cast<std::int32_t>(std::floor(cy - r_influence_voxels)),
                 static_cast<std::int32_t>(std::floor(cz - r_influence_voxels))});
    sup.include({static_cast<std::int32_t>(std::ceil(cx + r_influence_voxels)),
                 static_cast<std::int32_t>(std::ceil(cy + r_influence_voxels)),
                 static_cast<std::int32_t>(std::ceil(cz + r_influence_voxels))});
    sup.lo = {std::max(sup.lo.x, 0), std::max(sup.lo.y, 0), std::max(sup.lo.z, 0)};
    sup.hi = {std::min(sup.hi.x, den.dims.nx - 1), std::min(sup.hi.y, den.dims.ny - 1),
              std::min(sup.hi.z, den.dims.nz - 1)};
    if (sup.hi.x < sup.lo.x || sup.hi.y < sup.lo.y || sup.hi.z < sup.lo.z) return f;
    f.support = sup;

    for (std::int32_t z = sup.lo.z; z <= sup.hi.z; ++z)
        for (std::int32_t y = sup.lo.y; y <= sup.hi.y; ++y)
            for (std::int32_t x = sup.lo.x; x <= sup.hi.x; ++x) {
                const double dx = x - cx, dy = y - cy, dz = z - cz;
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (r <= 0.0 || r >= r_influence_voxels) continue;
                double g;
                if (r <= r_t)
                    g = (r / r_t) * (r / r_t);
                else
                    g = 0.5 * (1.0 + std::cos(kPi * (r - r_t) / falloff));
                const double s = amp * g / r;
                f.ux.at(x, y, z) = static_cast<float>(s * dx);
                f.uy.at(x, y, z) = static_cast<float>(s * dy);
                f.uz.at(x, y, z) = static_cast<float>(s * dz);
            }
    return f;
}

displacement_field mass_effect_field_auto(const tumor_map& tumor, double strength, double d_max,
                                          double halfwidth_voxels) {
    std::int64_t count = 0;
    for (std::uint8_t d : tumor.density.data) count += (d >= 1);
    if (count == 0) fail(errc::empty_tumor, "mass effect needs a nonempty tumor");
    const double r_t = std::cbrt(3.0 * static_cast<double>(count) / (4.0 * kPi));
    return mass_effect_field(tumor, strength, d_max, r_t + halfwidth_voxels);
}

displacement_field add_clamped(const displacement_field& a, const displacement_field& b,
                               double d_max) {
    if (a.ux.dims != b.ux.dims) fail(errc::dimension_mismatch, "field dims differ");
    displacement_field out(a.ux.dims, a.ux.spacing);
    out.support = a.support;
    if (!b.support.empty()) {
        if (out.support.empty())
            out.support = b.support;
        else {
            out.support.include(b.support.lo);
            out.support.include(b.support.hi);
        }
    }
    if (out.support.empty()) return out;
    for (std::int32_t z = out.support.lo.z; z <= out.support.hi.z; ++z)
        for (std::int32_t y = out.support.lo.y; y <= out.support.hi.y; ++y)
            for (std::int32_t x = out.support.lo.x; x <= out.support.hi.x; ++x) {
                double vx = static_cast<double>(a.ux.at(x, y, z)) + b.ux.at(x, y, z);
                double vy = static_cast<double>(a.uy.at(x, y, z)) + b.uy.at(x, y, z);
                double vz = static_cast<double>(a.uz.at(x, y, z)) + b.uz.at(x, y, z);
                const double mag = std::sqrt(vx * vx + vy * vy + vz * vz);
                if (mag > d_max) {
                    const double s = d_max / mag;
                    vx *= s;
                    vy *= s;
                    vz *= s;
                }
                out.ux.at(x, y, z) = static_cast<float>(vx);
                out.uy.at(x, y, z) = static_cast<float>(vy);
                out.uz.at(x, y, z) = static_cast<float>(vz);
            }
    return out;
}

namespace {

template <class T>
void check_warp_dims(const grid3<T>& in, const displacement_field& field) {
    if (!field.support.empty() && in.dims != field.ux.dims)
        fail(errc::dimension_mismatch, "volume and displacement field dims differ");
}

} // namespace

hu_grid warp(const hu_grid& in, const displacement_field& field) {
    check_warp_dims(in, field);
    hu_grid out = in;
    const box3& sup = field.support;
    if (sup.empty()) return out;
    const dim3_t d = in.dims;
    for (std::int32_t z = sup.lo.z; z <= sup.hi.z; ++z)
        for (std::int32_t y = sup.lo.y; y <= sup.hi.y; ++y)
            for (std::int32_t x = sup.lo.x; x <= sup.hi.x; ++x) {
                double px = x - static_cast<double>(field.ux.at(x, y, z));
                double py = y - static_cast<double>(field.uy.at(x, y, z));
                double pz = z - static_cast<double>(field.uz.at(x, y, z));
                px = std::clamp(px, 0.0, static_cast<double>(d.nx - 1));
                py = std::clamp(py, 0.0, static_cast<double>(d.ny - 1));
                pz = std::clamp(pz, 0.0, static_cast<double>(d.nz - 1));
                const auto x0 = static_cast<std::int32_t>(std::floor(px));
                const auto y0 = static_cast<std::int32_t>(std::floor(py));
                const auto z0 = static_cast<std::int32_t>(std::floor(pz));
                const std::int32_t x1 = std::min(x0 + 1, d.nx - 1);
                const std::int32_t y1 = std::min(y0 + 1, d.ny - 1);
                const std::int32_t z1 = std::min(z0 + 1, d.nz - 1);
                const double fx = px - x0, fy = py - y0, fz = pz - z0;
                const double c00 = in.at(x0, y0, z0) * (1 - fx) + in.at(x1, y0, z0) * fx;
                const double c10 = in.at(x0, y1, z0) * (1 - fx) + in.at(x1, y1, z0) * fx;
                const double c01 = in.at(x0, y0, z1) * (1 - fx) + in.at(x1, y0, z1) * fx;
                const double c11 = in.at(x0, y1, z1) * (1 - fx) + in.at(x1, y1, z1) * fx;
                const double c0 = c00 * (1 - fy) + c10 * fy;
                const double c1 = c01 * (1 - fy) + c11 * fy;
                const double v = c0 * (1 - fz) + c1 * fz;
                const long r = std::lround(v);
                out.at(x, y, z) = static_cast<std::int16_t>(
                    std::clamp<long>(r, kHuMin, kHuMax));
            }
    return out;
}

label_grid warp(const label_grid& in, const displacement_field& field) {
    check_warp_dims(in, field);
    label_grid out = in;
    const box3& sup = field.support;
    if (sup.empty()) return out;
    const dim3_t d = in.dims;
    for (std::int32_t z = sup.lo.z; z <= sup.hi.z; ++z)
        for (std::int32_t y = sup.lo.y; y <= sup.hi.y; ++y)
            for (std::int32_t x = sup.lo.x; x <= sup.hi.x; ++x) {
                const double px = x - static_cast<double>(field.ux.at(x, y, z));
                const double py = y - static_cast<double>(field.uy.at(x, y, z));
                const double pz = z - static_cast<double>(field.uz.at(x, y, z));
                const auto sx = static_cast<std::int32_t>(
                    std::clamp<long>(std::lround(px), 0, d.nx - 1));
                const auto sy = static_cast<std::int32_t>(
                    std::clamp<long>(std::lround(py), 0, d.ny - 1));
                const auto sz = static_cast<std::int32_t>(
                    std::clamp<long>(std::lround(pz), 0, d.nz - 1));
                out.at(x, y, z) = in.at(sx, sy, sz);
            }
    return out;
}

} // namespace tumorsynth
