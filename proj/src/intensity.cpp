#include "tumorsynth/intensity.hpp"

#include <algorithm>
#include <cmath>

#include "tumorsynth/error.hpp"

namespace tumorsynth {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void validate_model(const intensity_model& model, bool require_resolved_base) {
    auto bad = [](const std::string& what) { fail(errc::invalid_config, what); };
    if (model.hu_range_min > model.hu_range_max) bad("hu_range_min exceeds hu_range_max");
    if (require_resolved_base && !model.hu_base) bad("hu_base is unresolved");
    if (model.hu_base &&
        (*model.hu_base < model.hu_range_min || *model.hu_base > model.hu_range_max))
        bad("hu_base falls outside hu_range");
    if (!(model.texture_sigma >= 0.0)) bad("texture_sigma must be >= 0");
    if (model.blend_halfwidth < 0) bad("blend_halfwidth must be >= 0");
    if (model.texture_scales.empty()) bad("texture_scales must be nonempty");
    for (int s : model.texture_scales)
        if (s < 1) bad("texture scales must be >= 1 voxel");
    if (!(model.capsule_min_radius_mm >= 0.0)) bad("capsule_min_radius_mm must be >= 0");
}

grid3<float> value_noise(dim3_t dims, const std::vector<int>& scales, double sigma,
                         const counter_rng& rng, rng_stream stream) {
    if (scales.empty()) fail(errc::invalid_config, "value noise needs at least one scale");
    for (int s : scales)
        if (s < 1) fail(errc::invalid_config, "value noise scales must be >= 1 voxel");
    grid3<float> out(dims, spacing_t{1.0f, 1.0f, 1.0f}, 0.0f);
    const std::int64_t n = dims.total();
    if (n == 0 || sigma == 0.0) return out;

    std::vector<double> raw(static_cast<std::size_t>(n), 0.0);
    std::vector<double> lattice;
    for (std::size_t si = 0; si < scales.size(); ++si) {
        const std::int32_t lam = scales[si];
        const std::int32_t nnx = (dims.nx - 1) / lam + 2;
        const std::int32_t nny = (dims.ny - 1) / lam + 2;
        const std::int32_t nnz = (dims.nz - 1) / lam + 2;
        lattice.assign(static_cast<std::size_t>(nnx) * nny * nnz, 0.0);
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(lattice.size()); ++i)
            lattice[static_cast<std::size_t>(i)] =
                rng.uniform_pm1(stream, static_cast<std::uint64_t>(si),
                                static_cast<std::uint64_t>(i));
        auto node = [&](std::int32_t ix, std::int32_t iy, std::int32_t iz) {
            return lattice[static_cast<std::size_t>(
                ix + static_cast<std::int64_t>(nnx) * (iy + static_cast<std::int64_t>(nny) * iz))];
        };
        std::int64_t vi = 0;
        for (std::int32_t z = 0; z < dims.nz; ++z) {
            const std::int32_t z0 = z / lam;
            const double fz = static_cast<double>(z - z0 * lam) / lam;
            for (std::int32_t y = 0; y < dims.ny; ++y) {
                const std::int32_t y0 = y / lam;
                const double fy = static_cast<double>(y - y0 * lam) / lam;
                for (std::int32_t x = 0; x < dims.nx; ++x, ++vi) {
                    const std::int32_t x0 = x / lam;
                    const double fx = static_cast<double>(x - x0 * lam) / lam;
                    const double c00 =
                        node(x0, y0, z0) * (1 - fx) + node(x0 + 1, y0, z0) * fx;
                    const double c10 =
                        node(x0, y0 + 1, z0) * (1 - fx) + node(x0 + 1, y0 + 1, z0) * fx;
                    const double c01 =
                        node(x0, y0, z0 + 1) * (1 - fx) + node(x0 + 1, y0, z0 + 1) * fx;
                    const double c11 =
                        node(x0, y0 + 1, z0 + 1) * (1 - fx) + node(x0 + 1, y0 + 1, z0 + 1) * fx;
                    raw[static_cast<std::size_t>(vi)] +=
                        (c00 * (1 - fy) + c10 * fy) * (1 - fz) + (c01 * (1 - fy) + c11 * fy) * fz;
                }
            }
        }
    }

    double mean = 0.0;
    for (double v : raw) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : raw) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd < 1e-12) return out; // flat field: nothing to scale
    const double k = sigma / sd;
    for (std::int64_t i = 0; i < n; ++i)
        out.data[static_cast<std::size_t>(i)] =
            static_cast<float>((raw[static_cast<std::size_t>(i)] - mean) * k);
    return out;
}

hu_grid render(const hu_grid& ct, const tumor_map& tumor, const intensity_model& model,
               const counter_rng& rng) {
    if (ct.dims != tumor.density.dims)
        fail(errc::dimension_mismatch, "ct and tumor map dims differ");
    validate_model(model, /*require_resolved_base=*/true);

    hu_grid out = ct;
    const label_grid& den = tumor.density;
    const dim3_t dims = ct.dims;

    box3 bbox;
    std::int64_t mask_count = 0;
    for (std::int32_t z = 0; z < dims.nz; ++z)
        for (std::int32_t y = 0; y < dims.ny; ++y)
            for (std::int32_t x = 0; x < dims.nx; ++x)
                if (den.at(x, y, z) >= 1) {
                    bbox.include({x, y, z});
                    ++mask_count;
                }
    if (mask_count == 0) return out;

    const int h = model.blend_halfwidth;
    const box3 work = bbox.inflated(h + 1, dims);
    const dim3_t wd{work.hi.x - work.lo.x + 1, work.hi.y - work.lo.y + 1,
                    work.hi.z - work.lo.z + 1};

    grid3<float> noise;
    if (model.texture_sigma > 0.0)
        noise = value_noise(wd, model.texture_scales, model.texture_sigma, rng);

    // Cosine taper sampled at every integer offset it can reach.
    struct tap {
        std::int32_t dx, dy, dz;
        double t;
    };
    std::vector<tap> taps;
    for (std::int32_t dz = -h; dz <= h; ++dz)
        for (std::int32_t dy = -h; dy <= h; ++dy)
            for (std::int32_t dx = -h; dx <= h; ++dx) {
                const double d = std::sqrt(double(dx) * dx + double(dy) * dy + double(dz) * dz);
                if (d >= h + 1) continue;
                taps.push_back({dx, dy, dz, 0.5 * (1.0 + std::cos(kPi * d / (h + 1)))});
            }

    const double r_mm =
        std::cbrt(3.0 * static_cast<double>(mask_count) * den.spacing.voxel_mm3() / (4.0 * kPi));
    const bool capsule = model.capsule_enabled && r_mm >= model.capsule_min_radius_mm;
    const double base = *model.hu_base;

    for (std::int32_t z = work.lo.z; z <= work.hi.z; ++z)
        for (std::int32_t y = work.lo.y; y <= work.hi.y; ++y)
            for (std::int32_t x = work.lo.x; x <= work.hi.x; ++x) {
                double w = 0.0;
                for (const tap& o : taps) {
                    const std::uint8_t dv = den.at_or(x + o.dx, y + o.dy, z + o.dz, 0);
                    if (dv == 0) continue;
                    w = std::max(w, o.t * dv / 10.0);
                }
                bool rim = false;
                if (capsule && den.at(x, y, z) == 0)
                    for (int k = 0; k < 6 && !rim; ++k)
                        rim = den.at_or(x + k6Neighbors[k][0], y + k6Neighbors[k][1],
                                        z + k6Neighbors[k][2], 0) >= 1;
                if (w == 0.0 && !rim) continue;
                double bg = ct.at(x, y, z);
                if (rim) bg += model.capsule_delta;
                double t = base;
                if (model.texture_sigma > 0.0)
                    t += noise.at(x - work.lo.x, y - work.lo.y, z - work.lo.z);
                if (tumor.phase_at(x, y, z) == phase_code::necrotic) t += model.necrosis_delta;
                const double v = (1.0 - w) * bg + w * t;
                out.at(x, y, z) = static_cast<std::int16_t>(
                    std::clamp<long>(std::lround(v), kHuMin, kHuMax));
            }
    return out;
}

} // namespace tumorsynth
