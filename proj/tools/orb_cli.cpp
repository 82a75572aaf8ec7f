// Command-line driver: single renders, canned experiments, parameter sweeps.
// Exit codes: 0 success, 2 input error, 3 render error, 4 predicate failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "orb/experiments.hpp"
#include "orb/render.hpp"
#include "orb/scene_format.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitRender = 3;
constexpr int kExitPredicate = 4;

orb::SceneConfig load_scene_or_default(const std::string& path) {
    if (path.empty()) return orb::default_scene();
    std::ifstream in(path);
    if (!in) throw orb::ConfigError("cannot open scene file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return orb::parse_scene(buf.str());
}

struct KeyValue {
    std::string key, value;
};

std::vector<KeyValue> split_overrides(const std::vector<std::string>& sets) {
    std::vector<KeyValue> out;
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw orb::ConfigError("override must be key=value, got '" + s + "'");
        out.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
    return out;
}

int cmd_render(const std::string& scene_path, const std::string& out_path,
               const std::vector<std::string>& sets, int spp, long long seed, int threads,
               bool strict, bool fast) {
    orb::SceneConfig cfg;
    try {
        cfg = load_scene_or_default(scene_path);
        for (const auto& kv : split_overrides(sets)) {
            orb::apply_scene_override(cfg, kv.key, kv.value);
            std::cerr << "override " << kv.key << " = " << kv.value << "\n";
        }
        if (spp > 0) cfg.render.samples_per_pixel = spp;
        if (seed >= 0) cfg.render.seed = static_cast<uint64_t>(seed);
        if (threads > 0) cfg.render.threads = threads;
        if (strict) cfg.render.strict = true;
        if (fast) {
            cfg.camera.width = cfg.camera.height = 256;
            cfg.render.samples_per_pixel = std::min(cfg.render.samples_per_pixel, 16);
        }
        orb::validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        orb::RenderStats stats;
        orb::Image img = orb::render_config(cfg, &stats);
        orb::write_image_file(img, out_path, cfg.render.gamma);
        std::fprintf(stderr,
                     "rendered %dx%d spp=%d seed=%llu in %.2fs (%.0f paths/s)\n",
                     cfg.camera.width, cfg.camera.height, cfg.render.samples_per_pixel,
                     static_cast<unsigned long long>(cfg.render.seed), stats.seconds,
                     stats.seconds > 0 ? stats.paths / stats.seconds : 0.0);
        if (stats.nonfinite_samples || stats.inconsistent_paths)
            std::fprintf(stderr, "warning: %lld non-finite samples, %lld inconsistent paths\n",
                         stats.nonfinite_samples, stats.inconsistent_paths);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "render error: " << e.what() << "\n";
        return kExitRender;
    }
}

int cmd_experiment(const std::string& id_name, const orb::ExperimentOptions& opt) {
    auto id = orb::parse_experiment_id(id_name);
    if (!id) {
        std::cerr << "error: unknown experiment '" << id_name << "'\n";
        return kExitInput;
    }
    try {
        orb::ExperimentResult result = orb::run_experiment(*id, opt);
        std::cout << result.report;
        if (!result.passed) {
            std::cerr << "experiment " << id_name << " predicate failed\n";
            return kExitPredicate;
        }
        return kExitOk;
    } catch (const orb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "render error: " << e.what() << "\n";
        return kExitRender;
    }
}

double sweep_metric(const std::string& metric, const orb::SceneConfig& cfg,
                    const orb::Image& img, const orb::Image* baseline) {
    orb::Point2 c = orb::silhouette_center_px(cfg);
    double r = orb::silhouette_radius_px(cfg);
    if (metric == "fold_displacement") {
        auto report = orb::measure_folds(img, cfg);
        return orb::max_nonexempt_displacement(report, cfg.relief.fold_azimuths_deg.size());
    }
    if (metric == "inversion") return orb::detect_inversion(img, *baseline, c, r).score;
    if (metric == "rmse_interior") {
        auto mask = orb::interior_mask(img, c, r);
        return orb::image_rmse(img, *baseline, &mask);
    }
    throw orb::ConfigError("unknown metric: " + metric);
}

int cmd_sweep(const std::string& scene_path, const std::string& param,
              const std::vector<double>& values, const std::string& metric,
              const std::string& out_path, bool fast, int threads) {
    orb::SceneConfig base;
    try {
        base = load_scene_or_default(scene_path);
        if (threads > 0) base.render.threads = threads;
        if (fast) {
            base.camera.width = base.camera.height = 256;
            base.render.samples_per_pixel = 16;
        }
        if (metric != "fold_displacement" && metric != "inversion" && metric != "rmse_interior")
            throw orb::ConfigError("unknown metric: " + metric);
        // the parameter must address a numeric scene field
        orb::SceneConfig probe = base;
        orb::apply_scene_override(probe, param, "1.0");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        std::optional<orb::Image> baseline;
        if (metric != "fold_displacement") {
            orb::SceneConfig no_orb = base;
            no_orb.orb.enabled = false;
            baseline = orb::render_config(no_orb);
        }
        std::ostringstream csv;
        csv << param << "," << metric << "\n";
        for (double v : values) {
            orb::SceneConfig cfg = base;
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            orb::apply_scene_override(cfg, param, buf);
            orb::validate(cfg);
            orb::Image img = orb::render_config(cfg);
            csv << buf << "," << sweep_metric(metric, cfg, img, baseline ? &*baseline : nullptr)
                << "\n";
        }
        std::cout << csv.str();
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            out << csv.str();
        }
        return kExitOk;
    } catch (const orb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const orb::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "render error: " << e.what() << "\n";
        return kExitRender;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"orb renderer and experiment harness"};
    app.require_subcommand(1);

    // render
    auto* render_cmd = app.add_subcommand("render", "render a scene file to an image");
    std::string scene_path, out_path = "out.ppm";
    std::vector<std::string> sets;
    int spp = 0, threads = 0;
    long long seed = -1;
    bool strict = false, fast = false;
    render_cmd->add_option("scene", scene_path, "scene file (defaults to the built-in scene)");
    render_cmd->add_option("-o,--output", out_path, "output image (.ppm or .png)");
    render_cmd->add_option("--set", sets, "override scene values, block.key=value");
    render_cmd->add_option("--spp", spp, "samples per pixel");
    render_cmd->add_option("--seed", seed, "render seed");
    render_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
    render_cmd->add_flag("--strict", strict, "fail fast on non-finite radiance");
    render_cmd->add_flag("--fast", fast, "256x256 preview at low spp");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "run a canned experiment");
    std::string exp_id, exp_out = "experiment_out";
    bool exp_fast = false;
    int exp_threads = 0;
    long long exp_seed = 7;
    exp_cmd->add_option("id", exp_id,
                        "one of: solid_vs_hollow three_lines three_lines_bent fold_convergence "
                        "thickness_sweep shift_1cm calcite_birefringence")
        ->required();
    exp_cmd->add_option("-o,--out-dir", exp_out, "output directory");
    exp_cmd->add_flag("--fast", exp_fast, "preview resolution");
    exp_cmd->add_option("--threads", exp_threads, "worker threads");
    exp_cmd->add_option("--seed", exp_seed, "render seed");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "render a scene across parameter values");
    std::string sweep_scene, sweep_param, sweep_metric_name = "fold_displacement",
                sweep_out;
    std::vector<double> sweep_values;
    bool sweep_fast = false;
    int sweep_threads = 0;
    sweep_cmd->add_option("--scene", sweep_scene, "base scene file (default: built-in)");
    sweep_cmd->add_option("--param", sweep_param, "dotted numeric parameter path")->required();
    sweep_cmd->add_option("--values", sweep_values, "values to sweep")->required();
    sweep_cmd->add_option("--metric", sweep_metric_name,
                          "fold_displacement | inversion | rmse_interior");
    sweep_cmd->add_option("-o,--output", sweep_out, "CSV output file");
    sweep_cmd->add_flag("--fast", sweep_fast, "preview resolution");
    sweep_cmd->add_option("--threads", sweep_threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // normalize CLI11's exit codes: 0 for --help, 2 for any usage error
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    if (render_cmd->parsed())
        return cmd_render(scene_path, out_path, sets, spp, seed, threads, strict, fast);
    if (exp_cmd->parsed()) {
        orb::ExperimentOptions opt;
        opt.out_dir = exp_out;
        opt.fast = exp_fast;
        opt.threads = exp_threads;
        opt.seed = static_cast<uint64_t>(exp_seed);
        return cmd_experiment(exp_id, opt);
    }
    if (sweep_cmd->parsed())
        return cmd_sweep(sweep_scene, sweep_param, sweep_values, sweep_metric_name, sweep_out,
                         sweep_fast, sweep_threads);
    return kExitInput;
}
