#include "tumorsynth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "tumorsynth/error.hpp"
#include "tumorsynth/intensity.hpp"

namespace tumorsynth {

namespace {

// Rethrows module errors with the pipeline stage tacked on, so a failed
// case reports where in the chain it broke.
template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const error& e) {
        throw error(e.code(), std::string(name) + " stage: " + e.message());
    }
}

struct lesion_build {
    tumor_map tumor;
    lesion_recipe echo;
    std::vector<step_report> log;
    bool died = false;
    bool unreachable = false;
};

lesion_build build_lesion(const mask_set& masks, const organ_map& organ,
                          const lesion_recipe& recipe) {
    lesion_build lb;
    lb.echo = recipe;
    const counter_rng rng(recipe.rng_seed);
    if (recipe.backend == backend_kind::cellular_automata) {
        voxel_t seed;
        if (recipe.seed_voxel)
            seed = *recipe.seed_voxel;
        else
            seed = stage("seed-selection", [&] {
                return sample_seed(masks, organ, rng, recipe.seed_margin_voxels, 0);
            });
        lb.echo.seed_voxel = seed;
        lb.tumor = stage("seed-init", [&] { return init_tumor_map(organ, seed); });
        growth_result res = stage("growth", [&] {
            return run_growth(lb.tumor, organ, recipe.rules, rng, recipe.target_volume_mm3);
        });
        lb.log = std::move(res.reports);
        lb.died = res.died;
        lb.unreachable = res.target_unreachable;
    } else {
        lb.tumor = stage("placement",
                         [&] { return place_handcrafted(masks, organ, lb.echo, rng); });
    }
    if (!lb.echo.intensity.hu_base) {
        const double u = rng.uniform(rng_stream::hu_base, 0, 0);
        lb.echo.intensity.hu_base =
            recipe.intensity.hu_range_min +
            u * (recipe.intensity.hu_range_max - recipe.intensity.hu_range_min);
    }
    return lb;
}

} // namespace

case_result synthesize_case(const hu_grid& ct, const mask_set& masks,
                            const std::vector<lesion_recipe>& recipes) {
    if (recipes.empty()) fail(errc::empty_input, "need at least one lesion recipe");
    if (ct.dims != masks.organ.dims)
        fail(errc::dimension_mismatch, "ct and organ mask dims differ");
    if (!(ct.spacing == masks.organ.spacing))
        fail(errc::dimension_mismatch, "ct and organ mask spacings differ");
    for (const lesion_recipe& r : recipes) {
        validate_recipe(r);
        if (r.level_count != recipes.front().level_count)
            fail(errc::invalid_config, "lesions of one case must share level_count");
    }

    const organ_map organ = stage(
        "organ-map", [&] { return build_organ_map(ct, masks, recipes.front().level_count); });

    std::vector<lesion_build> lesions;
    lesions.reserve(recipes.size());
    for (const lesion_recipe& r : recipes) lesions.push_back(build_lesion(masks, organ, r));

    displacement_field field = stage("mass-effect", [&] {
        return mass_effect_field_auto(lesions[0].tumor, lesions[0].echo.mass_effect_strength,
                                      lesions[0].echo.mass_effect_d_max,
                                      lesions[0].echo.mass_effect_halfwidth_voxels);
    });
    for (std::size_t i = 1; i < lesions.size(); ++i) {
        const displacement_field fi = stage("mass-effect", [&] {
            return mass_effect_field_auto(lesions[i].tumor, lesions[i].echo.mass_effect_strength,
                                          lesions[i].echo.mass_effect_d_max,
                                          lesions[i].echo.mass_effect_halfwidth_voxels);
        });
        field = add_clamped(field, fi, lesions[i].echo.mass_effect_d_max);
    }

    // Push the anatomy aside first, then paint the lesions onto the warped
    // background: the tumor masks stay exactly where the lesions grew.
    case_result out;
    out.image = stage("warp", [&] { return warp(ct, field); });
    out.warped_organ = warp(masks.organ, field);
    if (masks.vessels) out.warped_vessels = warp(*masks.vessels, field);

    out.mask = label_grid(ct.dims, ct.spacing, 0);
    for (lesion_build& lb : lesions) {
        out.image = stage("render", [&] {
            return render(out.image, lb.tumor, lb.echo.intensity,
                          counter_rng(lb.echo.rng_seed));
        });
        for (std::size_t i = 0; i < out.mask.data.size(); ++i)
            if (lb.tumor.density.data[i] >= 1) out.mask.data[i] = 1;
        out.any_died = out.any_died || lb.died;
        out.any_target_unreachable = out.any_target_unreachable || lb.unreachable;
        out.recipe_echoes.push_back(std::move(lb.echo));
        out.step_logs.push_back(std::move(lb.log));
    }
    return out;
}

synthesis_result synthesize(const hu_grid& ct, const mask_set& masks,
                            const lesion_recipe& recipe) {
    case_result cr = synthesize_case(ct, masks, {recipe});
    synthesis_result out;
    out.image = std::move(cr.image);
    out.mask = std::move(cr.mask);
    out.recipe_echo = std::move(cr.recipe_echoes.front());
    out.step_log = std::move(cr.step_logs.front());
    out.died = cr.any_died;
    out.target_unreachable = cr.any_target_unreachable;
    out.warped_organ = std::move(cr.warped_organ);
    out.warped_vessels = std::move(cr.warped_vessels);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool portable_case_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            return false;
    return true;
}

} // namespace

std::vector<manifest_row> parse_manifest(const std::string& text,
                                         std::vector<std::string>& errors) {
    std::vector<manifest_row> rows;
    std::unordered_set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        std::vector<std::string> fields;
        std::string part;
        std::istringstream ls(line);
        while (std::getline(ls, part, ',')) fields.push_back(trim(part));
        if (line.back() == ',') fields.push_back("");

        auto reject = [&](const std::string& why) {
            errors.push_back("line " + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() < 3 || fields.size() > 4) {
            reject("expected case_id,ct_path,organ_path[,vessel_path]");
            continue;
        }
        if (!portable_case_id(fields[0])) {
            reject("case id must be nonempty [A-Za-z0-9._-]");
            continue;
        }
        if (fields[1].empty() || fields[2].empty()) {
            reject("ct and organ paths must be nonempty");
            continue;
        }
        if (!seen.insert(fields[0]).second) {
            reject("duplicate case id '" + fields[0] + "'");
            continue;
        }
        manifest_row row;
        row.case_id = fields[0];
        row.ct_path = fields[1];
        row.organ_path = fields[2];
        row.vessel_path = fields.size() == 4 ? fields[3] : "";
        row.line = line_no;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<manifest_row> load_manifest(const std::string& path,
                                        std::vector<std::string>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open manifest " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str(), errors);
}

std::uint64_t case_seed(std::uint64_t global_seed, std::int64_t epoch,
                        const std::string& case_id) {
    return mix_seed(global_seed, static_cast<std::uint64_t>(epoch),
                    fnv1a64(case_id.data(), case_id.size()));
}

std::uint64_t lesion_seed(std::uint64_t case_seed_value, int lesion_index) {
    return mix_seed(case_seed_value, static_cast<std::uint64_t>(lesion_index) + 1);
}

namespace {

epoch_outcome process_row(const manifest_row& row, const synth_config& config,
                          std::int64_t epoch, const std::filesystem::path& out_dir) {
    epoch_outcome out;
    out.row = row;
    try {
        volume ctv = load_volume(row.ct_path);
        const hu_grid* ct = std::get_if<hu_grid>(&ctv);
        if (!ct) fail(errc::unsupported_datatype, "ct volume must be int16 HU");
        std::optional<std::filesystem::path> vessel;
        if (!row.vessel_path.empty()) vessel = row.vessel_path;
        const mask_set masks = load_mask_set(row.organ_path, vessel);

        const std::uint64_t cs = case_seed(config.global_seed, epoch, row.case_id);
        std::vector<lesion_recipe> recipes;
        for (int i = 0; i < config.lesions_per_case; ++i)
            recipes.push_back(make_recipe(config, lesion_seed(cs, i)));

        const case_result res = synthesize_case(*ct, masks, recipes);

        const std::filesystem::path img = out_dir / (row.case_id + "_img.rvol");
        const std::filesystem::path msk = out_dir / (row.case_id + "_msk.rvol");
        const std::filesystem::path rec = out_dir / (row.case_id + "_recipe.json");
        save_volume(volume(res.image), img);
        save_volume(volume(res.mask), msk);

        nlohmann::json lesions = nlohmann::json::array();
        for (const lesion_recipe& echo : res.recipe_echoes) lesions.push_back(to_json(echo));
        const nlohmann::json meta{{"case_id", row.case_id},
                                  {"epoch", epoch},
                                  {"died", res.any_died},
                                  {"target_unreachable", res.any_target_unreachable},
                                  {"lesions", lesions}};
        std::ofstream jf(rec, std::ios::binary);
        if (!jf) fail(errc::io_failure, "cannot write " + rec.string());
        jf << meta.dump(2) << '\n';
        if (!jf) fail(errc::io_failure, "short write to " + rec.string());

        out.written = {img.string(), msk.string(), rec.string()};
    } catch (const error& e) {
        out.error = e.what();
    } catch (const std::exception& e) {
        out.error = std::string("Internal: ") + e.what();
    }
    return out;
}

} // namespace

std::vector<epoch_outcome> run_epoch(const std::vector<manifest_row>& rows,
                                     const synth_config& config, std::int64_t epoch,
                                     const std::string& out_dir, int jobs) {
    validate_config(config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(errc::io_failure, "cannot create output directory " + out_dir);

    std::vector<epoch_outcome> outcomes(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) return;
            outcomes[i] = process_row(rows[i], config, epoch, out_dir);
        }
    };
    const int n = std::clamp(jobs, 1, 64);
    if (n == 1 || rows.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return outcomes;
}

} // namespace tumorsynth
