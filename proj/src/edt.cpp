#include "tumorsynth/edt.hpp"

#include <algorithm>
#include <limits>

namespace tumorsynth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared-distance lower envelope: out[i] = min_j (f[j] + w^2 (i-j)^2),
// taken over the j with finite f[j].
void edt_1d(const double* f, double* out, int n, double w) {
    static thread_local std::vector<int> v;
    static thread_local std::vector<double> z;
    v.assign(static_cast<std::size_t>(n), 0);
    z.assign(static_cast<std::size_t>(n) + 1, 0.0);

    const double w2 = w * w;
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s;
        while (true) {
            const int p = v[static_cast<std::size_t>(k)];
            s = ((f[q] + w2 * q * q) - (f[p] + w2 * p * p)) / (2.0 * w2 * (q - p));
            if (k > 0 && s <= z[static_cast<std::size_t>(k)]) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = s;
        z[static_cast<std::size_t>(k) + 1] = kInf;
    }

    if (k < 0) {
        std::fill(out, out + n, kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
        const int p = v[static_cast<std::size_t>(j)];
        out[q] = f[p] + w2 * (q - p) * (q - p);
    }
}

} // namespace

std::vector<double> squared_edt(const label_grid& source, double step_x, double step_y,
                                double step_z) {
    const dim3_t d = source.dims;
    const std::int64_t n = d.total();
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        dist[static_cast<std::size_t>(i)] = source.data[static_cast<std::size_t>(i)] ? 0.0 : kInf;

    std::vector<double> line(static_cast<std::size_t>(std::max({d.nx, d.ny, d.nz})));
    std::vector<double> lout(line.size());

    // x pass
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t y = 0; y < d.ny; ++y) {
            const std::int64_t base = source.index(0, y, z);
            for (std::int32_t x = 0; x < d.nx; ++x)
                line[static_cast<std::size_t>(x)] = dist[static_cast<std::size_t>(base + x)];
            edt_1d(line.data(), lout.data(), d.nx, step_x);
            for (std::int32_t x = 0; x < d.nx; ++x)
                dist[static_cast<std::size_t>(base + x)] = lout[static_cast<std::size_t>(x)];
        }
    // y pass
    for (std::int32_t z = 0; z < d.nz; ++z)
        for (std::int32_t x = 0; x < d.nx; ++x) {
            for (std::int32_t y = 0; y < d.ny; ++y)
                line[static_cast<std::size_t>(y)] =
                    dist[static_cast<std::size_t>(source.index(x, y, z))];
            edt_1d(line.data(), lout.data(), d.ny, step_y);
            for (std::int32_t y = 0; y < d.ny; ++y)
                dist[static_cast<std::size_t>(source.index(x, y, z))] =
                    lout[static_cast<std::size_t>(y)];
        }
    // z pass
    for (std::int32_t y = 0; y < d.ny; ++y)
        for (std::int32_t x = 0; x < d.nx; ++x) {
            for (std::int32_t z = 0; z < d.nz; ++z)
                line[static_cast<std::size_t>(z)] =
                    dist[static_cast<std::size_t>(source.index(x, y, z))];
            edt_1d(line.data(), lout.data(), d.nz, step_z);
            for (std::int32_t z = 0; z < d.nz; ++z)
                dist[static_cast<std::size_t>(source.index(x, y, z))] =
                    lout[static_cast<std::size_t>(z)];
        }
    return dist;
}

} // namespace tumorsynth
