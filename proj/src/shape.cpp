#include "tumorsynth/shape.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tumorsynth/error.hpp"

namespace tumorsynth {

void validate_shape(const shape_spec& spec, double max_extent_mm) {
    auto bad = [](const std::string& what) { fail(errc::invalid_config, what); };
    for (double a : spec.semiaxes_mm)
        if (!(a > 0.0)) bad("semiaxes must be positive");
    if (!(spec.elastic_sigma_mm > 0.0)) bad("elastic_sigma_mm must be positive");
    if (!(spec.elastic_amplitude >= 0.0 && spec.elastic_amplitude <= 0.5))
        bad("elastic_amplitude must lie in [0, 0.5]");
    if (spec.multifocal_count < 1) bad("multifocal_count must be >= 1");
    const double reach =
        *std::max_element(spec.semiaxes_mm.begin(), spec.semiaxes_mm.end()) *
        (1.0 + spec.elastic_amplitude);
    if (2.0 * reach > max_extent_mm) bad("shape exceeds the maximum lesion extent");
}

namespace {

// Rows of the rotation matrix R = Rz(a) Ry(b) Rx(c); q = R^T p maps a world
// offset into the ellipsoid frame.
struct rotation {
    double m[3][3];

    static rotation from_euler_zyx(const std::array<double, 3>& e) {
        const double ca = std::cos(e[0]), sa = std::sin(e[0]);
        const double cb = std::cos(e[1]), sb = std::sin(e[1]);
        const double cc = std::cos(e[2]), sc = std::sin(e[2]);
        rotation r;
        r.m[0][0] = ca * cb;
        r.m[0][1] = ca * sb * sc - sa * cc;
        r.m[0][2] = ca * sb * cc + sa * sc;
        r.m[1][0] = sa * cb;
        r.m[1][1] = sa * sb * sc + ca * cc;
        r.m[1][2] = sa * sb * cc - ca * sc;
        r.m[2][0] = -sb;
        r.m[2][1] = cb * sc;
        r.m[2][2] = cb * cc;
        return r;
    }
    std::array<double, 3> transposed_apply(double x, double y, double z) const {
        return {m[0][0] * x + m[1][0] * y + m[2][0] * z,
                m[0][1] * x + m[1][1] * y + m[2][1] * z,
                m[0][2] * x + m[1][2] * y + m[2][2] * z};
    }
};

// Smooth bounded noise over unit directions: one trilinear lattice spanning
// [-1,1]^3, node spacing = angular correlation in radians (chord ~ angle).
struct direction_noise {
    const counter_rng& rng;
    double h;
    std::int32_t nodes;

    direction_noise(const counter_rng& r, double corr_angle) : rng(r) {
        h = std::clamp(corr_angle, 0.05, 2.0);
        nodes = static_cast<std::int32_t>(std::ceil(2.0 / h)) + 2;
    }
    double node(std::int32_t ix, std::int32_t iy, std::int32_t iz) const {
        const std::uint64_t id =
            static_cast<std::uint64_t>(ix) +
            static_cast<std::uint64_t>(nodes) *
                (static_cast<std::uint64_t>(iy) +
                 static_cast<std::uint64_t>(nodes) * static_cast<std::uint64_t>(iz));
        return rng.uniform_pm1(rng_stream::shape_noise, 0, id);
    }
    double at(double dx, double dy, double dz) const {
        const double u = (dx + 1.0) / h, v = (dy + 1.0) / h, w = (dz + 1.0) / h;
        const auto i0 = static_cast<std::int32_t>(std::floor(u));
        const auto j0 = static_cast<std::int32_t>(std::floor(v));
        const auto k0 = static_cast<std::int32_t>(std::floor(w));
        const double fu = u - i0, fv = v - j0, fw = w - k0;
        auto cl = [&](std::int32_t i) { return std::clamp(i, 0, nodes - 1); };
        auto n = [&](std::int32_t i, std::int32_t j, std::int32_t k) {
            return node(cl(i), cl(j), cl(k));
        };
        const double c00 = n(i0, j0, k0) * (1 - fu) + n(i0 + 1, j0, k0) * fu;
        const double c10 = n(i0, j0 + 1, k0) * (1 - fu) + n(i0 + 1, j0 + 1, k0) * fu;
        const double c01 = n(i0, j0, k0 + 1) * (1 - fu) + n(i0 + 1, j0, k0 + 1) * fu;
        const double c11 = n(i0, j0 + 1, k0 + 1) * (1 - fu) + n(i0 + 1, j0 + 1, k0 + 1) * fu;
        return (c00 * (1 - fv) + c10 * fv) * (1 - fw) + (c01 * (1 - fv) + c11 * fv) * fw;
    }
};

} // namespace

label_grid generate_shape(const shape_spec& spec, spacing_t spacing, const counter_rng& rng,
                          double max_extent_mm) {
    validate_shape(spec, max_extent_mm);
    const double a = spec.semiaxes_mm[0], b = spec.semiaxes_mm[1], c = spec.semiaxes_mm[2];
    const double reach = std::max({a, b, c}) * (1.0 + spec.elastic_amplitude);

    auto half_voxels = [&](float step) {
        return static_cast<std::int32_t>(std::ceil(reach / step)) + 1;
    };
    const std::int32_t hx = half_voxels(spacing.sx);
    const std::int32_t hy = half_voxels(spacing.sy);
    const std::int32_t hz = half_voxels(spacing.sz);
    const dim3_t dims{2 * hx + 1, 2 * hy + 1, 2 * hz + 1};
    label_grid inside(dims, spacing, 0);

    const rotation rot = rotation::from_euler_zyx(spec.euler_zyx_rad);
    const double mean_radius = std::cbrt(a * b * c);
    const direction_noise noise(rng, spec.elastic_sigma_mm / mean_radius);
    const bool perturb = spec.elastic_amplitude > 0.0;

    for (std::int32_t z = 0; z < dims.nz; ++z)
        for (std::int32_t y = 0; y < dims.ny; ++y)
            for (std::int32_t x = 0; x < dims.nx; ++x) {
                const double px = (x - hx) * static_cast<double>(spacing.sx);
                const double py = (y - hy) * static_cast<double>(spacing.sy);
                const double pz = (z - hz) * static_cast<double>(spacing.sz);
                const auto q = rot.transposed_apply(px, py, pz);
                const double rho =
                    std::sqrt((q[0] / a) * (q[0] / a) + (q[1] / b) * (q[1] / b) +
                              (q[2] / c) * (q[2] / c));
                double limit = 1.0;
                if (perturb && rho > 0.0) {
                    const double qn = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
                    limit += spec.elastic_amplitude *
                             noise.at(q[0] / qn, q[1] / qn, q[2] / qn);
                }
                if (rho <= limit) inside.at(x, y, z) = 1;
            }

    // Keep only the piece the center voxel belongs to.
    label_grid out(dims, spacing, 0);
    if (!inside.at(hx, hy, hz)) fail(errc::degenerate_shape, "shape center rasterized empty");
    std::vector<voxel_t> frontier{{hx, hy, hz}}, next;
    out.at(hx, hy, hz) = 1;
    while (!frontier.empty()) {
        next.clear();
        for (voxel_t v : frontier)
            for (const auto& d : k6Neighbors) {
                const voxel_t n{v.x + d[0], v.y + d[1], v.z + d[2]};
                if (!out.in_bounds(n) || !inside.at(n) || out.at(n)) continue;
                out.at(n) = 1;
                next.push_back(n);
            }
        frontier.swap(next);
    }
    return out;
}

} // namespace tumorsynth
