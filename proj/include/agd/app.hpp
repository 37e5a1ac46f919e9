#pragma once

#include "agd/baselines.hpp"
#include "agd/coverage.hpp"
#include "agd/detect.hpp"
#include "agd/ingest.hpp"
#include "agd/report.hpp"
#include "agd/synth.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agd {

enum class Method { linear, knn, memo_agd, stagd, stagd_drm };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);
bool is_detector(Method m);
std::vector<Method> parse_method_list(std::string_view csv);

/**
 * Every tunable of the command line tools. Values are set by key from a
 * key = value file and from --set overrides; unknown keys are rejected.
 */
struct RunConfig {
    double cell_m{1000.0};
    std::uint32_t theta{10};
    DetectionConfig detection;
    TimeStamp emp_threshold{1800};
    std::string speed_policy{"fixed"};
    double s_max{15.0};
    int sog_window{5};
    TimeStamp trip_split{kDefaultTripSplit};
    std::size_t knn_k{kDefaultKnn};
    TimeStamp impute_step{kDefaultImputeStep};
    std::string knn_pool{"all"};
    std::string method{"stagd_drm"};
    SynthConfig synth;
    std::string sweep_param{"gps_points"};
    std::vector<double> sweep_values{125000};
    std::vector<Method> sweep_methods{Method::linear, Method::knn, Method::memo_agd, Method::stagd_drm};
    int sweep_reps{5};

    void set(std::string_view key, std::string_view value);
    void load(std::istream& in, std::string_view origin = "config");
    void load_file(const std::string& path);
    /// Effective settings as (key, value), sorted by key.
    std::vector<std::pair<std::string, std::string>> effective() const;
    static std::vector<std::string> keys();

    GapRules gap_rules() const;
    /// Synthetic generator settings with the shared grid, threshold, gap and speed settings applied.
    SynthConfig synth_config() const;
    void validate() const;
};

/// Applies one sweep point to a copy of the configuration.
RunConfig apply_sweep(const RunConfig& base, std::string_view param, double value);

struct MethodOutcome {
    Method method{Method::stagd_drm};
    std::vector<GapScoreRow> gap_rows;  // one per input gap, in input order
    std::optional<DetectionResult> detection;
    double elapsed_ms{0.0};
};

/// Scores every gap with one method. Detectors score a gap with its group's AGM.
MethodOutcome run_method(Method m, std::span<const TrajectoryGap> gaps, const std::vector<Trajectory>& trajectories,
                         const SignalCoverageMap& scm, const RunConfig& cfg);

std::vector<GapLabel> predict_labels(const MethodOutcome& outcome, double threshold);

std::vector<GapLabel> read_labels_csv(std::istream& in);

struct BuildScmArgs {
    std::string input;
    std::string output;
};
struct DetectArgs {
    std::string input;
    std::string scm;
    std::string output;
    std::string geojson;  // optional
};
struct SynthArgs {
    std::string out_dir;
};
struct BenchArgs {
    std::string output;
};
struct EvalArgs {
    std::string input;
    std::string scm;
    std::string labels;
    std::string output;
};

void cmd_build_scm(const BuildScmArgs& args, const RunConfig& cfg, std::ostream& log);
void cmd_detect(const DetectArgs& args, const RunConfig& cfg, std::ostream& log);
void cmd_synth(const SynthArgs& args, const RunConfig& cfg, std::ostream& log);
void cmd_bench(const BenchArgs& args, const RunConfig& cfg, std::ostream& log);
void cmd_eval(const EvalArgs& args, const RunConfig& cfg, std::ostream& log);

/// Runs a command and maps failures to exit codes: 2 for input, schema and
/// configuration errors, 3 for an empty gap set, 1 otherwise.
int guarded(const std::function<void()>& f, std::ostream& err);

/// Path of the timing sidecar written next to a bench CSV.
std::string timing_path(const std::string& bench_csv);

}  // namespace agd
