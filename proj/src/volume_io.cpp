#include "tumorsynth/volume_io.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

namespace tumorsynth {

namespace {

constexpr char kRvolMagic[4] = {'R', 'V', 'O', 'L'};
constexpr std::uint32_t kRvolVersion = 1;
constexpr std::size_t kRvolHeaderBytes = 36;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) {
    std::uint32_t bits = get_u32(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

std::uint16_t bswap16(std::uint16_t v) {
    return static_cast<std::uint16_t>((v >> 8) | (v << 8));
}

std::uint32_t bswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0x0000FF00u) | ((v << 8) & 0x00FF0000u) | (v << 24);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(errc::io_failure, "read error on " + path.string());
    return bytes;
}

volume load_rvol(const std::string& bytes, const std::filesystem::path& path) {
    if (bytes.size() < kRvolHeaderBytes)
        fail(errc::malformed_header, "truncated RVOL header in " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (get_u32(p + 4) != kRvolVersion)
        fail(errc::malformed_header, "unsupported RVOL version in " + path.string());
    const std::uint8_t kind = p[8];
    if (kind > 1) fail(errc::unsupported_datatype, "unknown RVOL kind in " + path.string());
    if (p[9] != 0 || p[10] != 0 || p[11] != 0)
        fail(errc::malformed_header, "nonzero reserved bytes in " + path.string());

    dim3_t dims{static_cast<std::int32_t>(get_u32(p + 12)),
                static_cast<std::int32_t>(get_u32(p + 16)),
                static_cast<std::int32_t>(get_u32(p + 20))};
    spacing_t spacing{get_f32(p + 24), get_f32(p + 28), get_f32(p + 32)};
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
        fail(errc::malformed_header, "nonpositive dims in " + path.string());
    if (!(spacing.sx > 0.0f) || !(spacing.sy > 0.0f) || !(spacing.sz > 0.0f))
        fail(errc::malformed_header, "nonpositive spacing in " + path.string());

    const std::int64_t n = dims.total();
    const std::size_t bpp = (kind == 0) ? 2 : 1;
    const std::size_t expected = kRvolHeaderBytes + static_cast<std::size_t>(n) * bpp;
    if (bytes.size() != expected)
        fail(errc::dimension_mismatch, "payload size does not match header dims in " +
                                           path.string());

    if (kind == 0) {
        hu_grid g(dims, spacing);
        const unsigned char* q = p + kRvolHeaderBytes;
        for (std::int64_t i = 0; i < n; ++i) {
            const auto u = static_cast<std::uint16_t>(q[2 * i] | (q[2 * i + 1] << 8));
            const auto v = static_cast<std::int16_t>(u);
            if (v < kHuMin || v > kHuMax)
                fail(errc::malformed_header, "HU value out of range in " + path.string());
            g.data[static_cast<std::size_t>(i)] = v;
        }
        return g;
    }
    label_grid g(dims, spacing);
    std::memcpy(g.data.data(), p + kRvolHeaderBytes, static_cast<std::size_t>(n));
    return g;
}

// Minimal NIfTI-1 single-file reader. Only the fields named below are
// interpreted; everything else in the 348-byte header is ignored.
volume load_nifti(const std::string& bytes, const std::filesystem::path& path) {
    constexpr std::size_t kHeader = 348;
    if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1F &&
        static_cast<unsigned char>(bytes[1]) == 0x8B)
        fail(errc::unsupported_datatype, "compressed NIfTI not supported: " + path.string());
    if (bytes.size() < kHeader + 4)
        fail(errc::malformed_header, "file too small for NIfTI-1: " + path.string());

    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    std::uint32_t sizeof_hdr = get_u32(p);
    bool swap = false;
    if (sizeof_hdr != kHeader) {
        if (bswap32(sizeof_hdr) == kHeader) {
            swap = true;
        } else {
            fail(errc::malformed_header, "unrecognized header in " + path.string());
        }
    }
    auto rd_i16 = [&](std::size_t off) {
        std::uint16_t v = static_cast<std::uint16_t>(p[off] | (p[off + 1] << 8));
        if (swap) v = bswap16(v);
        return static_cast<std::int16_t>(v);
    };
    auto rd_f32 = [&](std::size_t off) {
        std::uint32_t bits = get_u32(p + off);
        if (swap) bits = bswap32(bits);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    };

    if (std::memcmp(bytes.data() + 344, "n+1\0", 4) != 0)
        fail(errc::malformed_header, "not a single-file NIfTI-1 (.nii): " + path.string());

    const std::int16_t rank = rd_i16(40);
    if (rank < 3 || rank > 7)
        fail(errc::malformed_header, "unsupported NIfTI rank in " + path.string());
    dim3_t dims{rd_i16(42), rd_i16(44), rd_i16(46)};
    for (int d = 4; d <= rank; ++d) {
        if (rd_i16(40 + 2 * static_cast<std::size_t>(d)) > 1)
            fail(errc::unsupported_datatype, "multi-frame NIfTI not supported: " + path.string());
    }
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
        fail(errc::malformed_header, "nonpositive dims in " + path.string());

    spacing_t spacing{rd_f32(80), rd_f32(84), rd_f32(88)};
    if (!(spacing.sx > 0.0f) || !(spacing.sy > 0.0f) || !(spacing.sz > 0.0f))
        fail(errc::malformed_header, "nonpositive pixdim in " + path.string());

    const std::int16_t datatype = rd_i16(70);
    std::size_t bpp;
    if (datatype == 4) {
        bpp = 2;
    } else if (datatype == 2) {
        bpp = 1;
    } else {
        fail(errc::unsupported_datatype,
             "NIfTI datatype " + std::to_string(datatype) + " not supported: " + path.string());
    }

    const float vox_offset_f = rd_f32(108);
    if (!(vox_offset_f >= static_cast<float>(kHeader)))
        fail(errc::malformed_header, "bad vox_offset in " + path.string());
    const auto vox_offset = static_cast<std::size_t>(vox_offset_f);

    const std::int64_t n = dims.total();
    if (bytes.size() < vox_offset + static_cast<std::size_t>(n) * bpp)
        fail(errc::dimension_mismatch, "payload shorter than header dims in " + path.string());

    const unsigned char* q = p + vox_offset;
    if (datatype == 4) {
        hu_grid g(dims, spacing);
        for (std::int64_t i = 0; i < n; ++i) {
            auto u = static_cast<std::uint16_t>(q[2 * i] | (q[2 * i + 1] << 8));
            if (swap) u = bswap16(u);
            const auto v = static_cast<std::int16_t>(u);
            g.data[static_cast<std::size_t>(i)] = std::clamp(v, kHuMin, kHuMax);
        }
        return g;
    }
    label_grid g(dims, spacing);
    std::memcpy(g.data.data(), q, static_cast<std::size_t>(n));
    return g;
}

} // namespace

voxel_kind kind_of(const volume& v) {
    return std::holds_alternative<hu_grid>(v) ? voxel_kind::hu_int16 : voxel_kind::label_u8;
}

dim3_t dims_of(const volume& v) {
    return std::visit([](const auto& g) { return g.dims; }, v);
}

spacing_t spacing_of(const volume& v) {
    return std::visit([](const auto& g) { return g.spacing; }, v);
}

volume load_volume(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(errc::io_failure, "no such file: " + path.string());
    const std::string bytes = read_file(path);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kRvolMagic, 4) == 0)
        return load_rvol(bytes, path);
    return load_nifti(bytes, path);
}

void save_volume(const volume& v, const std::filesystem::path& path) {
    std::string out;
    const dim3_t dims = dims_of(v);
    const spacing_t sp = spacing_of(v);
    out.append(kRvolMagic, 4);
    put_u32(out, kRvolVersion);
    out.push_back(static_cast<char>(kind_of(v)));
    out.append(3, '\0');
    put_u32(out, static_cast<std::uint32_t>(dims.nx));
    put_u32(out, static_cast<std::uint32_t>(dims.ny));
    put_u32(out, static_cast<std::uint32_t>(dims.nz));
    put_f32(out, sp.sx);
    put_f32(out, sp.sy);
    put_f32(out, sp.sz);

    if (const auto* hu = std::get_if<hu_grid>(&v)) {
        out.reserve(out.size() + hu->data.size() * 2);
        for (std::int16_t s : hu->data) {
            const auto u = static_cast<std::uint16_t>(s);
            out.push_back(static_cast<char>(u & 0xFF));
            out.push_back(static_cast<char>(u >> 8));
        }
    } else {
        const auto& g = std::get<label_grid>(v);
        out.append(reinterpret_cast<const char*>(g.data.data()), g.data.size());
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(errc::io_failure, "cannot open for write: " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) fail(errc::io_failure, "write failed: " + path.string());
}

label_grid derive_boundary(const label_grid& organ) {
    for (std::uint8_t v : organ.data)
        if (v > 1) fail(errc::non_binary_mask, "organ mask must be binary");

    label_grid out(organ.dims, organ.spacing, 0);
    const dim3_t d = organ.dims;
    for (std::int32_t z = 0; z < d.nz; ++z) {
        for (std::int32_t y = 0; y < d.ny; ++y) {
            for (std::int32_t x = 0; x < d.nx; ++x) {
                if (organ.at(x, y, z) == 0) continue;
                for (const auto& o : k6Neighbors) {
                    if (organ.at_or(x + o[0], y + o[1], z + o[2], 0) == 0) {
                        out.at(x, y, z) = 1;
                        break;
                    }
                }
            }
        }
    }
    return out;
}

mask_set make_mask_set(label_grid organ, std::optional<label_grid> vessels) {
    for (std::uint8_t v : organ.data)
        if (v > 1) fail(errc::non_binary_mask, "organ mask must be binary");
    if (vessels) {
        if (vessels->dims != organ.dims || vessels->spacing != organ.spacing)
            fail(errc::dimension_mismatch, "vessel mask geometry differs from organ mask");
        for (std::size_t i = 0; i < vessels->data.size(); ++i) {
            if (vessels->data[i] > 1) fail(errc::non_binary_mask, "vessel mask must be binary");
            if (vessels->data[i] == 1 && organ.data[i] == 0)
                fail(errc::inconsistent_masks, "vessel voxel outside the organ mask");
        }
    }
    mask_set ms;
    ms.boundary = derive_boundary(organ);
    ms.organ = std::move(organ);
    ms.vessels = std::move(vessels);
    return ms;
}

mask_set load_mask_set(const std::filesystem::path& organ_path,
                       const std::optional<std::filesystem::path>& vessel_path) {
    volume org = load_volume(organ_path);
    if (kind_of(org) != voxel_kind::label_u8)
        fail(errc::unsupported_datatype, "organ mask must be a label volume: " +
                                             organ_path.string());
    std::optional<label_grid> vess;
    if (vessel_path) {
        volume v = load_volume(*vessel_path);
        if (kind_of(v) != voxel_kind::label_u8)
            fail(errc::unsupported_datatype, "vessel mask must be a label volume: " +
                                                 vessel_path->string());
        vess = std::move(std::get<label_grid>(v));
    }
    return make_mask_set(std::move(std::get<label_grid>(org)), std::move(vess));
}

} // namespace tumorsynth
