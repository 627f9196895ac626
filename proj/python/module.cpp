// Python face of the toolkit. Volumes cross the boundary as C-order numpy
// arrays shaped (nz, ny, nx) with an explicit (sx, sy, sz) spacing tuple;
// recipes and configs cross as JSON strings so the two languages share one
// schema.

#include <array>
#include <cstring>
#include <optional>
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "tumorsynth/error.hpp"
#include "tumorsynth/metrics.hpp"
#include "tumorsynth/pipeline.hpp"
#include "tumorsynth/recipe.hpp"
#include "tumorsynth/volume_io.hpp"

namespace py = pybind11;
using namespace tumorsynth;

namespace {

spacing_t to_spacing(const std::array<double, 3>& s) {
    return spacing_t{static_cast<float>(s[0]), static_cast<float>(s[1]),
                     static_cast<float>(s[2])};
}

template <class T>
grid3<T> grid_from_array(const py::array_t<T, py::array::c_style | py::array::forcecast>& arr,
                         spacing_t sp) {
    if (arr.ndim() != 3) throw error(errc::dimension_mismatch, "expected a 3-d array");
    const dim3_t d{static_cast<std::int32_t>(arr.shape(2)),
                   static_cast<std::int32_t>(arr.shape(1)),
                   static_cast<std::int32_t>(arr.shape(0))};
    grid3<T> g(d, sp);
    std::memcpy(g.data.data(), arr.data(), sizeof(T) * g.data.size());
    return g;
}

template <class T>
py::array_t<T> array_from_grid(const grid3<T>& g) {
    py::array_t<T> arr({g.dims.nz, g.dims.ny, g.dims.nx});
    std::memcpy(arr.mutable_data(), g.data.data(), sizeof(T) * g.data.size());
    return arr;
}

using hu_array = py::array_t<std::int16_t, py::array::c_style | py::array::forcecast>;
using label_array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

mask_set masks_from_arrays(const label_array& organ, const std::optional<label_array>& vessels,
                           spacing_t sp) {
    std::optional<label_grid> vg;
    if (vessels) vg = grid_from_array<std::uint8_t>(*vessels, sp);
    return make_mask_set(grid_from_array<std::uint8_t>(organ, sp), std::move(vg));
}

py::dict py_synthesize(const hu_array& ct, const label_array& organ,
                       const std::array<double, 3>& spacing, const std::string& recipe_json,
                       const std::optional<label_array>& vessels) {
    const spacing_t sp = to_spacing(spacing);
    const hu_grid ct_grid = grid_from_array<std::int16_t>(ct, sp);
    const mask_set masks = masks_from_arrays(organ, vessels, sp);
    lesion_recipe recipe = recipe_from_json(nlohmann::json::parse(recipe_json));
    validate_recipe(recipe);

    synthesis_result res;
    {
        py::gil_scoped_release release;
        res = synthesize(ct_grid, masks, recipe);
    }

    py::dict out;
    out["image"] = array_from_grid(res.image);
    out["mask"] = array_from_grid(res.mask);
    out["recipe"] = to_json(res.recipe_echo).dump();
    out["died"] = res.died;
    out["target_unreachable"] = res.target_unreachable;
    out["steps"] = res.step_log.size();
    return out;
}

double py_dsc(const label_array& a, const label_array& b) {
    const spacing_t sp{1, 1, 1};
    return dsc(grid_from_array<std::uint8_t>(a, sp), grid_from_array<std::uint8_t>(b, sp));
}

double py_nsd(const label_array& a, const label_array& b, const std::array<double, 3>& spacing,
              double tau_mm) {
    const spacing_t sp = to_spacing(spacing);
    return nsd(grid_from_array<std::uint8_t>(a, sp), grid_from_array<std::uint8_t>(b, sp),
               surface_tolerance{tau_mm});
}

py::dict py_features(const hu_array& image, const label_array& mask,
                     const std::array<double, 3>& spacing) {
    const spacing_t sp = to_spacing(spacing);
    const feature_vector fv = extract_features(grid_from_array<std::int16_t>(image, sp),
                                               grid_from_array<std::uint8_t>(mask, sp));
    py::dict out;
    for (const auto& [name, value] : fv.named()) out[py::str(name)] = value;
    return out;
}

py::tuple py_load_volume(const std::string& path) {
    const volume v = load_volume(path);
    const spacing_t sp = spacing_of(v);
    const py::tuple spacing = py::make_tuple(sp.sx, sp.sy, sp.sz);
    if (std::holds_alternative<hu_grid>(v))
        return py::make_tuple(array_from_grid(std::get<hu_grid>(v)), spacing);
    return py::make_tuple(array_from_grid(std::get<label_grid>(v)), spacing);
}

void py_save_volume(const std::string& path, const py::array& arr,
                    const std::array<double, 3>& spacing) {
    const spacing_t sp = to_spacing(spacing);
    if (py::isinstance<py::array_t<std::int16_t>>(arr)) {
        save_volume(grid_from_array<std::int16_t>(hu_array::ensure(arr), sp), path);
    } else if (py::isinstance<py::array_t<std::uint8_t>>(arr)) {
        save_volume(grid_from_array<std::uint8_t>(label_array::ensure(arr), sp), path);
    } else {
        throw error(errc::unsupported_datatype, "expected an int16 or uint8 array");
    }
}

std::string py_default_config() {
    return to_json(synth_config{}).dump(2);
}

std::string py_make_recipe(const std::string& config_json, std::uint64_t seed) {
    synth_config cfg = config_from_json(nlohmann::json::parse(config_json));
    validate_config(cfg);
    return to_json(make_recipe(cfg, seed)).dump(2);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Synthetic tumors in CT volumes: cellular-automata growth, mass-effect "
              "warping, texture rendering, and the paired-mask metrics.";

    py::register_exception<error>(m, "CoreError", PyExc_RuntimeError);

    m.def("synthesize", &py_synthesize, py::arg("ct"), py::arg("organ"), py::arg("spacing"),
          py::arg("recipe"), py::arg("vessels") = std::nullopt,
          "Grow one lesion described by a recipe JSON string inside a CT volume.\n"
          "Arrays are (nz, ny, nx); returns dict with image, mask, the resolved\n"
          "recipe echo (re-running it reproduces the output bit for bit), and flags.");
    m.def("dsc", &py_dsc, py::arg("a"), py::arg("b"),
          "Dice overlap of two label arrays (nonzero voxels are members).");
    m.def("nsd", &py_nsd, py::arg("a"), py::arg("b"), py::arg("spacing"),
          py::arg("tau_mm") = 2.0,
          "Normalized surface distance at tolerance tau_mm.");
    m.def("extract_features", &py_features, py::arg("image"), py::arg("mask"),
          py::arg("spacing"),
          "First-order intensity and shape features over the mask, as a dict.");
    m.def("load_volume", &py_load_volume, py::arg("path"),
          "Load an RVOL or uncompressed NIfTI-1 file -> (array, (sx, sy, sz)).");
    m.def("save_volume", &py_save_volume, py::arg("path"), py::arg("array"),
          py::arg("spacing"), "Write an int16 or uint8 array as an RVOL file.");
    m.def("default_config", &py_default_config,
          "The built-in run configuration as a JSON string.");
    m.def("make_recipe", &py_make_recipe, py::arg("config"), py::arg("seed"),
          "Expand a config JSON string into one lesion recipe drawn from `seed`.");
    m.def("case_seed", &case_seed, py::arg("global_seed"), py::arg("epoch"),
          py::arg("case_id"),
          "Seed for one manifest case; depends on identity, not manifest order.");
    m.def("lesion_seed", &lesion_seed, py::arg("case_seed"), py::arg("lesion_index"),
          "Seed for one lesion of a case.");

    m.attr("__version__") = "0.1.0";
}
