#include "agd/app.hpp"

#include "agd/errors.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

namespace agd {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
    }
    return out;
}

std::int64_t to_int(std::string_view key, std::string_view v) {
    std::int64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
        throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
    }
    return out;
}

std::uint64_t to_count(std::string_view key, std::string_view v) {
    const std::int64_t n = to_int(key, v);
    if (n < 0) {
        throw ConfigError("'" + std::string(key) + "' must not be negative");
    }
    return static_cast<std::uint64_t>(n);
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("'" + std::string(key) + "' expects true or false");
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Field {
    std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field real(T RunConfig::*member) {
    return {[member](RunConfig& c, std::string_view k, std::string_view v) { c.*member = to_double(k, v); },
            [member](const RunConfig& c) { return fmt(c.*member); }};
}

template <class T>
Field integral(T RunConfig::*member) {
    return {[member](RunConfig& c, std::string_view k, std::string_view v) {
                c.*member = static_cast<T>(to_int(k, v));
            },
            [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

template <class T>
Field synth_real(T SynthConfig::*member) {
    return {[member](RunConfig& c, std::string_view k, std::string_view v) { c.synth.*member = to_double(k, v); },
            [member](const RunConfig& c) { return fmt(c.synth.*member); }};
}

template <class T>
Field synth_int(T SynthConfig::*member) {
    return {[member](RunConfig& c, std::string_view k, std::string_view v) {
                c.synth.*member = static_cast<T>(to_int(k, v));
            },
            [member](const RunConfig& c) { return std::to_string(c.synth.*member); }};
}

template <class T>
Field det_real(T DetectionConfig::*member) {
    return {[member](RunConfig& c, std::string_view k, std::string_view v) { c.detection.*member = to_double(k, v); },
            [member](const RunConfig& c) { return fmt(c.detection.*member); }};
}

Field text(std::string RunConfig::*member, std::vector<std::string> allowed) {
    return {[member, allowed](RunConfig& c, std::string_view k, std::string_view v) {
                if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
                    throw ConfigError("'" + std::string(k) + "' does not accept '" + std::string(v) + "'");
                }
                c.*member = std::string(v);
            },
            [member](const RunConfig& c) { return c.*member; }};
}

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = [] {
        std::map<std::string, Field, std::less<>> t;
        t["cell_m"] = real(&RunConfig::cell_m);
        t["theta"] = integral(&RunConfig::theta);
        t["lambda"] = det_real(&DetectionConfig::lambda);
        t["delta"] = det_real(&DetectionConfig::delta);
        t["min_agm"] = det_real(&DetectionConfig::min_agm);
        t["k"] = {[](RunConfig& c, std::string_view k, std::string_view v) { c.detection.k = to_count(k, v); },
                  [](const RunConfig& c) { return std::to_string(c.detection.k); }};
        t["shadow_check"] = {
            [](RunConfig& c, std::string_view k, std::string_view v) { c.detection.shadow_check = to_bool(k, v); },
            [](const RunConfig& c) { return std::string(c.detection.shadow_check ? "true" : "false"); }};
        t["emp_threshold"] = integral(&RunConfig::emp_threshold);
        t["speed_policy"] = text(&RunConfig::speed_policy, {"fixed", "avg_sog"});
        t["s_max"] = real(&RunConfig::s_max);
        t["sog_window"] = integral(&RunConfig::sog_window);
        t["trip_split"] = integral(&RunConfig::trip_split);
        t["knn_k"] = {[](RunConfig& c, std::string_view k, std::string_view v) { c.knn_k = to_count(k, v); },
                      [](const RunConfig& c) { return std::to_string(c.knn_k); }};
        t["impute_step"] = integral(&RunConfig::impute_step);
        t["knn_pool"] = text(&RunConfig::knn_pool, {"all", "same_vessel"});
        t["method"] = text(&RunConfig::method, {"linear", "knn", "memo_agd", "stagd", "stagd_drm"});
        t["synth.lon_min"] = synth_real(&SynthConfig::lon_min);
        t["synth.lon_max"] = synth_real(&SynthConfig::lon_max);
        t["synth.lat_min"] = synth_real(&SynthConfig::lat_min);
        t["synth.lat_max"] = synth_real(&SynthConfig::lat_max);
        t["synth.vessels"] = synth_int(&SynthConfig::n_vessels);
        t["synth.points"] = synth_int(&SynthConfig::n_points_total);
        t["synth.gaps"] = synth_int(&SynthConfig::n_gaps);
        t["synth.t_begin"] = synth_int(&SynthConfig::t_begin);
        t["synth.t_end"] = synth_int(&SynthConfig::t_end);
        t["synth.emp_min"] = synth_int(&SynthConfig::emp_min);
        t["synth.emp_max"] = synth_int(&SynthConfig::emp_max);
        t["synth.speed_min"] = synth_real(&SynthConfig::speed_min);
        t["synth.speed_max"] = synth_real(&SynthConfig::speed_max);
        t["synth.report_interval"] = synth_int(&SynthConfig::report_interval);
        t["synth.leg_min"] = synth_int(&SynthConfig::leg_min);
        t["synth.leg_max"] = synth_int(&SynthConfig::leg_max);
        t["synth.grounds"] = synth_int(&SynthConfig::n_grounds);
        t["synth.ground_km"] = synth_real(&SynthConfig::ground_km);
        t["synth.label_threshold"] = synth_real(&SynthConfig::label_threshold);
        t["synth.seed"] = {[](RunConfig& c, std::string_view k, std::string_view v) { c.synth.seed = to_count(k, v); },
                           [](const RunConfig& c) { return std::to_string(c.synth.seed); }};
        t["sweep.param"] = text(&RunConfig::sweep_param, {"gps_points", "objects", "gaps", "emp", "speed",
                                                          "do_threshold"});
        t["sweep.values"] = {[](RunConfig& c, std::string_view k, std::string_view v) {
                                 std::vector<double> vals;
                                 for (std::string_view part : split(v, ',')) {
                                     vals.push_back(to_double(k, part));
                                 }
                                 c.sweep_values = std::move(vals);
                             },
                             [](const RunConfig& c) {
                                 std::string s;
                                 for (double d : c.sweep_values) {
                                     s += (s.empty() ? "" : ",") + fmt(d);
                                 }
                                 return s;
                             }};
        t["sweep.methods"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                                  c.sweep_methods = parse_method_list(v);
                              },
                              [](const RunConfig& c) {
                                  std::string s;
                                  for (Method m : c.sweep_methods) {
                                      s += (s.empty() ? "" : ",") + std::string(method_name(m));
                                  }
                                  return s;
                              }};
        t["sweep.reps"] = integral(&RunConfig::sweep_reps);
        return t;
    }();
    return table;
}

std::string read_file(const std::string& path, std::string_view role) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + std::string(role) + " '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path + "'");
    }
    out << content;
    if (!out) {
        throw IoError("failed while writing '" + path + "'");
    }
}

Provenance provenance(std::string_view command, const RunConfig& cfg,
                      const std::vector<std::pair<std::string, std::string>>& inputs) {
    Provenance p{"agd " + std::string(command)};
    for (const auto& [k, v] : cfg.effective()) {
        p.push_back("config " + k + " = " + v);
    }
    for (const auto& [role, content] : inputs) {
        p.push_back("input " + role + " fnv1a64=" + hex64(fnv1a64(content)));
    }
    return p;
}

struct LoadedInput {
    std::vector<Trajectory> trajectories;
    std::vector<Fix> traces;
    ParseStats stats;
};

LoadedInput load_ais(const std::string& content) {
    std::istringstream in(content);
    ParsedAis parsed = parse_ais_csv(in);
    LoadedInput out;
    out.stats = parsed.stats;
    out.trajectories = assemble_trajectories(std::move(parsed.records));
    for (const Trajectory& t : out.trajectories) {
        out.traces.insert(out.traces.end(), t.fixes.begin(), t.fixes.end());
    }
    return out;
}

SignalCoverageMap load_scm(const std::string& content, const std::string& path) {
    std::istringstream in(content);
    try {
        return read_scm(in);
    } catch (const FormatError& e) {
        throw FormatError("SCM artifact '" + path + "': " + e.what());
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

Method parse_method(std::string_view name) {
    if (name == "linear") return Method::linear;
    if (name == "knn") return Method::knn;
    if (name == "memo_agd") return Method::memo_agd;
    if (name == "stagd") return Method::stagd;
    if (name == "stagd_drm") return Method::stagd_drm;
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
    switch (m) {
        case Method::linear: return "linear";
        case Method::knn: return "knn";
        case Method::memo_agd: return "memo_agd";
        case Method::stagd: return "stagd";
        case Method::stagd_drm: return "stagd_drm";
    }
    return "?";
}

bool is_detector(Method m) {
    return m == Method::memo_agd || m == Method::stagd || m == Method::stagd_drm;
}

std::vector<Method> parse_method_list(std::string_view csv) {
    std::vector<Method> out;
    for (std::string_view part : split(csv, ',')) {
        out.push_back(parse_method(part));
    }
    if (out.empty()) {
        throw ConfigError("method list is empty");
    }
    return out;
}

void RunConfig::set(std::string_view key, std::string_view value) {
    const auto it = fields().find(trim(key));
    if (it == fields().end()) {
        throw ConfigError("unknown configuration key '" + std::string(trim(key)) + "'");
    }
    it->second.set(*this, it->first, trim(value));
}

void RunConfig::load(std::istream& in, std::string_view origin) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') {
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
        }
        set(s.substr(0, eq), s.substr(eq + 1));
    }
}

void RunConfig::load_file(const std::string& path) {
    std::istringstream in(read_file(path, "config file"));
    load(in, path);
}

std::vector<std::pair<std::string, std::string>> RunConfig::effective() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, f] : fields()) {
        out.emplace_back(k, f.get(*this));
    }
    return out;
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& [k, f] : fields()) {
        out.push_back(k);
    }
    return out;
}

GapRules RunConfig::gap_rules() const {
    GapRules r;
    r.emp_threshold = emp_threshold;
    r.speed = speed_policy == "avg_sog" ? SpeedPolicy::avg_sog(s_max, sog_window) : SpeedPolicy::fixed(s_max);
    r.trip_split = trip_split;
    return r;
}

SynthConfig RunConfig::synth_config() const {
    SynthConfig s = synth;
    s.s_max = s_max;
    s.cell_m = cell_m;
    s.theta = theta;
    s.emp_threshold = emp_threshold;
    return s;
}

void RunConfig::validate() const {
    detection.validate();
    if (!(cell_m > 0.0) || theta == 0) {
        throw ConfigError("cell_m and theta must be positive");
    }
    if (emp_threshold <= 0 || !(s_max > 0.0)) {
        throw ConfigError("emp_threshold and s_max must be positive");
    }
    if (knn_k == 0 || impute_step <= 0) {
        throw ConfigError("knn_k and impute_step must be positive");
    }
    if (sweep_values.empty() || sweep_reps < 1) {
        throw ConfigError("sweep needs at least one value and one repetition");
    }
}

RunConfig apply_sweep(const RunConfig& base, std::string_view param, double value) {
    RunConfig c = base;
    auto count = [&]() {
        if (!(value >= 1.0) || value != std::floor(value)) {
            throw ConfigError("sweep value for '" + std::string(param) + "' must be a positive integer");
        }
        return static_cast<std::size_t>(value);
    };
    if (param == "gps_points") {
        c.synth.n_points_total = count();
    } else if (param == "objects") {
        c.synth.n_vessels = count();
    } else if (param == "gaps") {
        c.synth.n_gaps = count();
    } else if (param == "emp") {
        const auto v = static_cast<TimeStamp>(count());
        const TimeStamp spread = base.synth.emp_max - base.synth.emp_min;
        c.emp_threshold = v;
        c.synth.emp_min = v + 1;
        c.synth.emp_max = v + 1 + spread;
    } else if (param == "speed") {
        c.s_max = value;
    } else if (param == "do_threshold") {
        c.detection.lambda = value;
    } else {
        throw ConfigError("unknown sweep parameter '" + std::string(param) + "'");
    }
    return c;
}

namespace {

/// Fixes immediately before and including the gap start, projected.
std::vector<TimedPoint> history_before(const Trajectory& traj, const TrajectoryGap& gap, const Projection& proj) {
    const auto it = std::lower_bound(traj.fixes.begin(), traj.fixes.end(), gap.t_start(),
                                     [](const Fix& f, TimeStamp t) { return f.t < t; });
    std::vector<TimedPoint> out;
    if (it == traj.fixes.end() || it->t != gap.t_start()) {
        return out;
    }
    const auto end = it + 1;
    const auto begin = end - std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(kCvmWindow), end - traj.fixes.begin());
    for (auto f = begin; f != end; ++f) {
        out.push_back({proj.project(f->position), f->t});
    }
    return out;
}

}  // namespace

MethodOutcome run_method(Method m, std::span<const TrajectoryGap> gaps, const std::vector<Trajectory>& trajectories,
                         const SignalCoverageMap& scm, const RunConfig& cfg) {
    using clock = std::chrono::steady_clock;
    MethodOutcome out;
    out.method = m;
    const GridSpec& grid = scm.grid();

    if (is_detector(m)) {
        const auto t0 = clock::now();
        DetectionResult res = m == Method::memo_agd ? memo_agd(gaps, scm, cfg.detection)
                              : m == Method::stagd  ? stagd(gaps, scm, cfg.detection)
                                                    : stagd_drm(gaps, scm, cfg.detection);
        out.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        std::unordered_map<GapId, const MergedGroup*> group_of;
        for (const MergedGroup& g : res.groups) {
            for (GapId id : g.member_gap_ids) {
                group_of[id] = &g;
            }
        }
        for (const TrajectoryGap& gap : gaps) {
            const MergedGroup& g = *group_of.at(gap.gap_id);
            out.gap_rows.push_back(
                {gap.gap_id, g.union_cells.size(), g.reported_in_union, g.agm, gap.t_start(), gap.t_end()});
        }
        out.detection = std::move(res);
        return out;
    }

    auto score = [&](const TrajectoryGap& gap, const CellSet& cells) {
        const std::size_t rep = count_reported(cells, scm);
        out.gap_rows.push_back({gap.gap_id, cells.size(), rep,
                                cells.empty() ? 0.0 : static_cast<double>(rep) / static_cast<double>(cells.size()),
                                gap.t_start(), gap.t_end()});
    };

    if (m == Method::linear) {
        const auto t0 = clock::now();
        for (const TrajectoryGap& gap : gaps) {
            score(gap, path_cells(linear_path(gap), grid));
        }
        out.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        return out;
    }

    // k-NN imputation: the pool is every fix, or only the gap's own vessel.
    const Projection& proj = scm.projection();
    std::map<VesselId, std::size_t> traj_of;
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        traj_of[trajectories[i].vessel] = i;
    }
    auto project_all = [&](const Trajectory& t, std::vector<PlanarPoint>& pts) {
        for (const Fix& f : t.fixes) {
            pts.push_back(proj.project(f.position));
        }
    };
    std::optional<KnnIndex> shared;
    std::map<std::size_t, KnnIndex> per_vessel;
    if (cfg.knn_pool == "all") {
        std::vector<PlanarPoint> pts;
        for (const Trajectory& t : trajectories) {
            project_all(t, pts);
        }
        shared.emplace(std::move(pts));
    }
    const auto t0 = clock::now();
    for (const TrajectoryGap& gap : gaps) {
        const auto it = traj_of.find(gap.vessel);
        std::vector<TimedPoint> before;
        if (it != traj_of.end()) {
            before = history_before(trajectories[it->second], gap, proj);
        }
        const KnnIndex* pool = nullptr;
        if (shared) {
            pool = &*shared;
        } else if (it != traj_of.end()) {
            auto pv = per_vessel.find(it->second);
            if (pv == per_vessel.end()) {
                std::vector<PlanarPoint> pts;
                project_all(trajectories[it->second], pts);
                pv = per_vessel.emplace(it->second, KnnIndex(std::move(pts))).first;
            }
            pool = &pv->second;
        }
        if (pool == nullptr || before.size() < 2) {
            // Not enough history for the velocity model: fall back to the straight segment.
            score(gap, path_cells(linear_path(gap), grid));
            continue;
        }
        score(gap, path_cells(knn_path(gap, before, *pool, cfg.impute_step, cfg.knn_k), grid));
    }
    out.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    return out;
}

std::vector<GapLabel> predict_labels(const MethodOutcome& outcome, double threshold) {
    std::vector<GapLabel> out;
    out.reserve(outcome.gap_rows.size());
    for (const GapScoreRow& r : outcome.gap_rows) {
        out.push_back({r.gap_id, r.agm > threshold});
    }
    return out;
}

std::vector<GapLabel> read_labels_csv(std::istream& in) {
    std::string line;
    std::vector<GapLabel> out;
    bool header = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') {
            continue;
        }
        if (!header) {
            if (s.substr(0, 12) != "gap_id,label") {
                throw SchemaError("labels CSV must start with a gap_id,label header");
            }
            header = true;
            continue;
        }
        const auto parts = split(s, ',');
        if (parts.size() < 2 || (parts[1] != "abnormal" && parts[1] != "normal")) {
            throw SchemaError("labels CSV line " + std::to_string(lineno) + " is malformed");
        }
        const std::int64_t id = to_int("gap_id", parts[0]);
        out.push_back({static_cast<GapId>(id), parts[1] == "abnormal"});
    }
    if (!header) {
        throw SchemaError("labels CSV is empty");
    }
    return out;
}

std::string timing_path(const std::string& bench_csv) {
    std::filesystem::path p(bench_csv);
    const std::string stem = p.stem().string();
    p.replace_filename(stem + ".timing.csv");
    return p.string();
}

int guarded(const std::function<void()>& f, std::ostream& err) {
    try {
        f();
        return 0;
    } catch (const EmptyGapSet& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const EmptyInput& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const LabelSetMismatch& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

void cmd_build_scm(const BuildScmArgs& args, const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    const std::string content = read_file(args.input, "input");
    const LoadedInput in = load_ais(content);
    if (in.traces.empty()) {
        throw EmptyInput("no valid fixes in '" + args.input + "'");
    }
    const auto [proj, grid] = study_frame(in.traces, cfg.cell_m);
    const SignalCoverageMap scm = build_scm(in.traces, grid, proj, cfg.theta);
    std::ostringstream out;
    write_scm(out, scm, provenance("build-scm", cfg, {{"ais", content}}));
    write_file(args.output, out.str());
    log << "scm: " << grid.ncols << " x " << grid.nrows << " cells, " << scm.reported_cell_count()
        << " reported at theta " << cfg.theta << ", " << in.traces.size() << " fixes (" << in.stats.malformed
        << " malformed rows, " << in.stats.duplicates << " duplicates skipped)\n";
}

void cmd_detect(const DetectArgs& args, const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    const Method m = parse_method(cfg.method);
    const std::string content = read_file(args.input, "input");
    const std::string scm_text = read_file(args.scm, "SCM artifact");
    const SignalCoverageMap scm = load_scm(scm_text, args.scm);
    const LoadedInput in = load_ais(content);
    GapExtraction ex = extract_all_gaps(in.trajectories, cfg.gap_rules(), scm.projection());
    for (const GapReject& r : ex.rejects) {
        log << "skipped infeasible gap of vessel " << r.vessel.mmsi << " at " << format_iso8601(r.start_fix.t) << ": "
            << r.reason << '\n';
    }
    if (ex.gaps.empty()) {
        throw EmptyGapSet("no gaps longer than " + std::to_string(cfg.emp_threshold) + " s in '" + args.input + "'");
    }
    const MethodOutcome res = run_method(m, ex.gaps, in.trajectories, scm, cfg);
    const Provenance prov = provenance("detect", cfg, {{"ais", content}, {"scm", scm_text}});
    std::ostringstream out;
    if (res.detection) {
        write_group_csv(out, method_name(m), res.detection->groups, scm.projection(), prov);
    } else {
        write_gap_csv(out, method_name(m), res.gap_rows, prov);
    }
    write_file(args.output, out.str());
    if (!args.geojson.empty() && res.detection) {
        std::vector<std::pair<std::string, std::string>> meta;
        for (const std::string& line : prov) {
            const std::size_t eq = line.find(" = ");
            if (line.rfind("config ", 0) == 0 && eq != std::string::npos) {
                meta.emplace_back(line.substr(7, eq - 7), line.substr(eq + 3));
            } else if (line.rfind("input ", 0) == 0) {
                const std::size_t sp = line.find(' ', 6);
                meta.emplace_back("input." + line.substr(6, sp - 6), line.substr(sp + 1));
            }
        }
        std::ostringstream gj;
        write_geojson(gj, res.detection->groups, ex.gaps, scm.projection(), meta);
        write_file(args.geojson, gj.str());
    }
    log << method_name(m) << ": " << ex.gaps.size() << " gaps";
    if (res.detection) {
        log << ", " << res.detection->groups.size() << " groups\n";
        for (const MergedGroup& g : top_k(res.detection->groups, cfg.detection.k, cfg.detection.min_agm)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "  group %u  agm %.4f  members %zu  cells %zu\n", g.group_id, g.agm,
                          g.member_gap_ids.size(), g.union_cells.size());
            log << buf;
        }
    } else {
        log << '\n';
    }
}

void cmd_synth(const SynthArgs& args, const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    const SynthData data = generate(cfg.synth_config());
    const Provenance prov = provenance("synth", cfg, {});
    const std::filesystem::path dir(args.out_dir);

    std::ostringstream ais;
    for (const std::string& line : prov) {
        ais << "# " << line << '\n';
    }
    ais << data.ais_csv;
    write_file((dir / "ais.csv").string(), ais.str());

    std::ostringstream labels;
    for (const std::string& line : prov) {
        labels << "# " << line << '\n';
    }
    write_labels_csv(labels, data.gaps);
    write_file((dir / "labels.csv").string(), labels.str());

    std::ostringstream scm;
    write_scm(scm, data.scm, prov);
    write_file((dir / "scm.txt").string(), scm.str());

    std::size_t abnormal = 0;
    for (const LabeledGap& g : data.gaps) {
        abnormal += g.abnormal ? 1 : 0;
    }
    log << "synth: " << data.trajectories.size() << " vessels, " << data.gaps.size() << " gaps (" << abnormal
        << " abnormal), " << data.scm.reported_cell_count() << " reported cells of " << data.scm.grid().cell_count()
        << '\n';
}

void cmd_bench(const BenchArgs& args, const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    std::ostringstream metrics;
    std::ostringstream timing;
    const Provenance prov = provenance("bench", cfg, {});
    for (const std::string& line : prov) {
        metrics << "# " << line << '\n';
        timing << "# " << line << '\n';
    }
    metrics << "param,value,method,reps,n_gaps,accuracy,groups,sort_comparisons,temporal_comparisons,region_tests,"
               "mobr_tests,cells_scored,comparison_ops\n";
    timing << "param,value,method,reps,median_ms,min_ms,max_ms\n";
    for (double value : cfg.sweep_values) {
        const RunConfig point = apply_sweep(cfg, cfg.sweep_param, value);
        point.validate();
        const SynthConfig sc = point.synth_config();
        const SynthData data = generate(sc);
        std::vector<TrajectoryGap> gaps;
        std::vector<GapLabel> truth;
        for (const LabeledGap& g : data.gaps) {
            gaps.push_back(g.gap);
            truth.push_back({g.gap.gap_id, g.abnormal});
        }
        for (Method m : cfg.sweep_methods) {
            std::vector<double> ms;
            std::optional<MethodOutcome> first;
            for (int r = 0; r < cfg.sweep_reps; ++r) {
                MethodOutcome o = run_method(m, gaps, data.trajectories, data.scm, point);
                ms.push_back(o.elapsed_ms);
                if (!first) {
                    first = std::move(o);
                }
            }
            const double acc = accuracy(predict_labels(*first, sc.label_threshold), truth);
            DetectionStats st;
            std::size_t groups = 0;
            if (first->detection) {
                st = first->detection->stats;
                groups = first->detection->groups.size();
            }
            const std::string v = fmt(value);
            char buf[512];
            std::snprintf(buf, sizeof buf, "%s,%s,%s,%d,%zu,%.6f,%zu,%llu,%llu,%llu,%llu,%llu,%llu\n",
                          cfg.sweep_param.c_str(), v.c_str(), std::string(method_name(m)).c_str(), cfg.sweep_reps,
                          gaps.size(), acc, groups, static_cast<unsigned long long>(st.sort_comparisons),
                          static_cast<unsigned long long>(st.temporal_comparisons),
                          static_cast<unsigned long long>(st.region_tests),
                          static_cast<unsigned long long>(st.mobr_tests),
                          static_cast<unsigned long long>(st.cells_scored),
                          static_cast<unsigned long long>(st.comparison_ops()));
            metrics << buf;
            std::snprintf(buf, sizeof buf, "%s,%s,%s,%d,%.3f,%.3f,%.3f\n", cfg.sweep_param.c_str(), v.c_str(),
                          std::string(method_name(m)).c_str(), cfg.sweep_reps, median(ms),
                          *std::min_element(ms.begin(), ms.end()), *std::max_element(ms.begin(), ms.end()));
            timing << buf;
            log << cfg.sweep_param << '=' << v << ' ' << method_name(m) << ": accuracy " << acc << ", median "
                << median(ms) << " ms\n";
        }
    }
    write_file(args.output, metrics.str());
    write_file(timing_path(args.output), timing.str());
}

void cmd_eval(const EvalArgs& args, const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    const std::string content = read_file(args.input, "input");
    const std::string scm_text = read_file(args.scm, "SCM artifact");
    const std::string labels_text = read_file(args.labels, "labels");
    const SignalCoverageMap scm = load_scm(scm_text, args.scm);
    const LoadedInput in = load_ais(content);
    const GapExtraction ex = extract_all_gaps(in.trajectories, cfg.gap_rules(), scm.projection());
    if (ex.gaps.empty()) {
        throw EmptyGapSet("no gaps longer than " + std::to_string(cfg.emp_threshold) + " s in '" + args.input + "'");
    }
    std::istringstream lin(labels_text);
    const std::vector<GapLabel> truth = read_labels_csv(lin);
    std::ostringstream out;
    for (const std::string& line :
         provenance("eval", cfg, {{"ais", content}, {"scm", scm_text}, {"labels", labels_text}})) {
        out << "# " << line << '\n';
    }
    out << "method,n_gaps,accuracy,predicted_abnormal,true_abnormal\n";
    std::size_t true_abnormal = 0;
    for (const GapLabel& l : truth) {
        true_abnormal += l.abnormal ? 1 : 0;
    }
    for (Method m : cfg.sweep_methods) {
        const MethodOutcome o = run_method(m, ex.gaps, in.trajectories, scm, cfg);
        const std::vector<GapLabel> pred = predict_labels(o, cfg.synth.label_threshold);
        const double acc = accuracy(pred, truth);
        std::size_t pa = 0;
        for (const GapLabel& l : pred) {
            pa += l.abnormal ? 1 : 0;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,%zu,%zu\n", std::string(method_name(m)).c_str(), ex.gaps.size(),
                      acc, pa, true_abnormal);
        out << buf;
        log << method_name(m) << ": accuracy " << acc << '\n';
    }
    write_file(args.output, out.str());
}

}  // namespace agd
