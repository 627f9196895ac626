// Command line front end: batch synthesis plus the evaluation utilities.
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tumorsynth/error.hpp"
#include "tumorsynth/metrics.hpp"
#include "tumorsynth/pipeline.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kInternal = 3;

using namespace tumorsynth;

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

label_grid load_mask_arg(const std::string& path, const char* what) {
    volume v = load_volume(path);
    if (const label_grid* m = std::get_if<label_grid>(&v)) return *m;
    fail(errc::unsupported_datatype, std::string(what) + " must be a label volume: " + path);
}

hu_grid load_image_arg(const std::string& path, const char* what) {
    volume v = load_volume(path);
    if (const hu_grid* g = std::get_if<hu_grid>(&v)) return *g;
    fail(errc::unsupported_datatype, std::string(what) + " must be an HU volume: " + path);
}

void emit_rows(const std::string& case_id,
               const std::vector<std::pair<std::string, double>>& rows) {
    std::cout << "case_id,metric,value\n";
    std::cout << std::setprecision(10);
    for (const auto& [name, value] : rows)
        std::cout << case_id << ',' << name << ',' << value << '\n';
}

int run_synth(const std::string& manifest_path, const std::string& config_path,
              std::int64_t epoch, const std::string& out_dir, const std::string& backend,
              std::int64_t seed, bool seed_set, int jobs) {
    synth_config config = load_config(config_path);
    if (!backend.empty()) config.backend = backend_from_string(backend);
    if (seed_set) config.global_seed = static_cast<std::uint64_t>(seed);

    std::vector<std::string> manifest_errors;
    const std::vector<manifest_row> rows = load_manifest(manifest_path, manifest_errors);
    for (const std::string& e : manifest_errors)
        std::cerr << "manifest: skipped " << e << '\n';
    if (rows.empty()) {
        std::cerr << "manifest has no usable rows\n";
        return kDataError;
    }

    const std::vector<epoch_outcome> outcomes = run_epoch(rows, config, epoch, out_dir, jobs);
    int failures = static_cast<int>(manifest_errors.size());
    for (const epoch_outcome& o : outcomes) {
        if (o.error.empty()) {
            std::cout << o.row.case_id << ": ok";
            for (const std::string& p : o.written) std::cout << ' ' << p;
            std::cout << '\n';
        } else {
            ++failures;
            std::cerr << o.row.case_id << ": failed: " << o.error << '\n';
        }
    }
    return failures == 0 ? kOk : kDataError;
}

int run_eval(const std::string& which, const std::string& pred_path,
             const std::string& gt_path, double tau) {
    const label_grid pred = load_mask_arg(pred_path, "--pred");
    const label_grid gt = load_mask_arg(gt_path, "--gt");
    std::vector<std::pair<std::string, double>> rows;
    if (which == "dsc") {
        rows.emplace_back("dsc", dsc(pred, gt));
    } else {
        surface_tolerance tol;
        tol.tau_mm = tau;
        char label[32];
        std::snprintf(label, sizeof(label), "nsd@%gmm", tau);
        rows.emplace_back(label, nsd(pred, gt, tol));
    }
    emit_rows(stem_of(pred_path), rows);
    return kOk;
}

int run_features(const std::string& image_path, const std::string& mask_path) {
    const hu_grid image = load_image_arg(image_path, "--image");
    const label_grid mask = load_mask_arg(mask_path, "--mask");
    const feature_vector fv = extract_features(image, mask);
    emit_rows(stem_of(image_path), fv.named());
    return kOk;
}

int run_reader_metrics(const std::string& csv_path, const std::string& unsure) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) fail(errc::io_failure, "cannot open " + csv_path);
    std::vector<reader_row> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line == "truth,call") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            fail(errc::manifest_row_invalid,
                 "line " + std::to_string(line_no) + ": expected truth,call");
        const std::string truth = line.substr(0, comma);
        const std::string call = line.substr(comma + 1);
        reader_row row;
        if (truth == "real")
            row.truth = sample_truth::real;
        else if (truth == "synthetic")
            row.truth = sample_truth::synthetic;
        else
            fail(errc::manifest_row_invalid,
                 "line " + std::to_string(line_no) + ": truth must be real|synthetic");
        if (call == "real")
            row.call = sample_call::real;
        else if (call == "synthetic")
            row.call = sample_call::synthetic;
        else if (call == "unsure")
            row.call = sample_call::unsure;
        else
            fail(errc::manifest_row_invalid,
                 "line " + std::to_string(line_no) + ": call must be real|synthetic|unsure");
        rows.push_back(row);
    }
    const unsure_policy policy =
        unsure == "drop" ? unsure_policy::drop : unsure_policy::incorrect;
    const reader_scores s = reader_metrics(rows, policy);
    emit_rows(stem_of(csv_path), {{"sensitivity", s.sensitivity},
                                  {"specificity", s.specificity},
                                  {"accuracy", s.accuracy}});
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic tumor generation and evaluation toolkit"};
    app.require_subcommand(1);

    std::string manifest_path, config_path, out_dir, backend;
    std::int64_t epoch = 0, seed = 0;
    int jobs = 1;
    CLI::App* synth = app.add_subcommand("synth", "Synthesize one epoch of a manifest");
    synth->add_option("--manifest", manifest_path, "case_id,ct,organ[,vessel] rows")->required();
    synth->add_option("--config", config_path, "JSON config (// comments allowed)")->required();
    synth->add_option("--epoch", epoch, "epoch index")->required();
    synth->add_option("--out", out_dir, "output directory")->required();
    synth->add_option("--backend", backend)->check(CLI::IsMember({"ca", "handcrafted"}));
    CLI::Option* seed_opt = synth->add_option("--seed", seed, "override global seed");
    synth->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 64));

    std::string pred_path, gt_path;
    double tau = 2.0;
    CLI::App* eval = app.add_subcommand("eval", "Compare a predicted mask against a reference");
    eval->require_subcommand(1);
    CLI::App* eval_dsc = eval->add_subcommand("dsc", "Dice similarity coefficient");
    CLI::App* eval_nsd = eval->add_subcommand("nsd", "Normalized surface distance");
    for (CLI::App* sub : {eval_dsc, eval_nsd}) {
        sub->add_option("--pred", pred_path)->required();
        sub->add_option("--gt", gt_path)->required();
    }
    eval_nsd->add_option("--tau", tau, "surface tolerance in mm")->check(CLI::NonNegativeNumber);

    std::string image_path, mask_path;
    CLI::App* features = app.add_subcommand("features", "First-order and shape features");
    features->add_option("--image", image_path)->required();
    features->add_option("--mask", mask_path)->required();

    std::string csv_path, unsure = "incorrect";
    CLI::App* reader = app.add_subcommand("reader-metrics", "Score a visual reader study");
    reader->add_option("--csv", csv_path, "rows of truth,call")->required();
    reader->add_option("--unsure", unsure)->check(CLI::IsMember({"incorrect", "drop"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (synth->parsed())
            return run_synth(manifest_path, config_path, epoch, out_dir, backend, seed,
                             !seed_opt->empty(), jobs);
        if (eval->parsed())
            return run_eval(eval_dsc->parsed() ? "dsc" : "nsd", pred_path, gt_path, tau);
        if (features->parsed()) return run_features(image_path, mask_path);
        if (reader->parsed()) return run_reader_metrics(csv_path, unsure);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
