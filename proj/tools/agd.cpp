#include "agd/app.hpp"
#include "agd/errors.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

/// Config file first, then --set overrides in the order given.
agd::RunConfig resolve(const std::string& config_path, const std::vector<std::string>& overrides) {
    agd::RunConfig cfg;
    if (!config_path.empty()) {
        cfg.load_file(config_path);
    }
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw agd::ConfigError("--set expects key=value, got '" + kv + "'");
        }
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Abnormal trajectory gap detection"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "key = value configuration file");
    app.add_option("--set", overrides, "override a configuration key (key=value), repeatable")
        ->allow_extra_args(false);

    std::string keys_help = "Configuration keys:";
    for (const auto& [k, v] : agd::RunConfig{}.effective()) {
        keys_help += "\n  " + k + " (default " + v + ")";
    }
    app.footer(keys_help);

    agd::BuildScmArgs build;
    auto* build_cmd = app.add_subcommand("build-scm", "build a signal coverage map from an AIS CSV");
    build_cmd->add_option("-i,--input", build.input, "AIS CSV")->required();
    build_cmd->add_option("-o,--output", build.output, "SCM artifact to write")->required();

    agd::DetectArgs detect;
    auto* detect_cmd = app.add_subcommand("detect", "score trajectory gaps against a coverage map");
    detect_cmd->add_option("-i,--input", detect.input, "AIS CSV")->required();
    detect_cmd->add_option("-s,--scm", detect.scm, "SCM artifact")->required();
    detect_cmd->add_option("-o,--output", detect.output, "results CSV")->required();
    detect_cmd->add_option("-g,--geojson", detect.geojson, "GeoJSON output (detector methods)");
    std::string method;
    detect_cmd->add_option("-m,--method", method, "linear, knn, memo_agd, stagd or stagd_drm");

    agd::SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a labelled synthetic dataset");
    synth_cmd->add_option("-o,--out-dir", synth.out_dir, "directory for ais.csv, labels.csv and scm.txt")->required();

    agd::BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "run a parameter sweep on synthetic data");
    bench_cmd->add_option("-o,--output", bench.output, "metrics CSV; timings go to <stem>.timing.csv")->required();

    agd::EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "accuracy of each method against ground-truth labels");
    eval_cmd->add_option("-i,--input", eval.input, "AIS CSV")->required();
    eval_cmd->add_option("-s,--scm", eval.scm, "SCM artifact")->required();
    eval_cmd->add_option("-l,--labels", eval.labels, "labels CSV")->required();
    eval_cmd->add_option("-o,--output", eval.output, "accuracy CSV")->required();

    CLI11_PARSE(app, argc, argv);

    // Only the output location may come from the environment.
    auto in_out_dir = [](std::string& path) {
        if (const char* dir = std::getenv("AGD_OUTPUT_DIR"); dir && *dir && !path.empty() && path.front() != '/') {
            path = std::string(dir) + "/" + path;
        }
    };

    return agd::guarded(
        [&] {
            agd::RunConfig cfg = resolve(config_path, overrides);
            if (!method.empty()) {
                cfg.set("method", method);
            }
            if (*build_cmd) {
                in_out_dir(build.output);
                agd::cmd_build_scm(build, cfg, std::cout);
            } else if (*detect_cmd) {
                in_out_dir(detect.output);
                in_out_dir(detect.geojson);
                agd::cmd_detect(detect, cfg, std::cout);
            } else if (*synth_cmd) {
                in_out_dir(synth.out_dir);
                agd::cmd_synth(synth, cfg, std::cout);
            } else if (*bench_cmd) {
                in_out_dir(bench.output);
                agd::cmd_bench(bench, cfg, std::cout);
            } else if (*eval_cmd) {
                in_out_dir(eval.output);
                agd::cmd_eval(eval, cfg, std::cout);
            }
        },
        std::cerr);
}
