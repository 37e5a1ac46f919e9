#include "agd/synth.hpp"

#include "agd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace agd {

void SynthConfig::validate() const {
    if (!(lon_min < lon_max && lat_min < lat_max)) {
        throw ConfigError("study area box is empty");
    }
    if (n_vessels == 0 || n_points_total == 0) {
        throw ConfigError("need at least one vessel and one point");
    }
    if (!(t_begin < t_end)) {
        throw ConfigError("time span is empty");
    }
    if (emp_min <= emp_threshold || emp_max < emp_min) {
        throw ConfigError("emp range must lie above the gap threshold");
    }
    if (report_interval <= 0 || report_interval > emp_threshold) {
        throw ConfigError("report interval must be positive and below the gap threshold");
    }
    if (!(speed_min > 0.0 && speed_min <= speed_max)) {
        throw ConfigError("speed range is invalid");
    }
    if (!(s_max > speed_max)) {
        throw ConfigError("s_max must exceed the largest vessel speed");
    }
    if (leg_min <= 0 || leg_max < leg_min) {
        throw ConfigError("leg duration range is invalid");
    }
    if (n_grounds == 0 || !(ground_km > 0.0)) {
        throw ConfigError("need at least one ground of positive size");
    }
    if (!(label_threshold >= 0.0 && label_threshold <= 1.0)) {
        throw ConfigError("label threshold must lie in [0, 1]");
    }
    if (theta == 0 || !(cell_m > 0.0)) {
        throw ConfigError("theta and cell size must be positive");
    }
}

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(eng_() % span);
    }

private:
    std::mt19937_64 eng_;
};

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Box {
    double xmin, ymin, xmax, ymax;
};

/// Reflects a coordinate that left [lo, hi]; returns whether the velocity flips.
bool fold(double& v, double lo, double hi) {
    const double len = hi - lo;
    const double k = std::floor((v - lo) / len);
    const double u = v - lo - k * len;
    const bool odd = std::fmod(std::fabs(k), 2.0) == 1.0;
    v = odd ? hi - u : lo + u;
    return odd;
}

struct Mover {
    PlanarPoint p;
    double vx{0}, vy{0};
    TimeStamp leg_left{0};

    void new_leg(Rng& rng, const SynthConfig& cfg) {
        const double speed = rng.uniform(cfg.speed_min, cfg.speed_max);
        const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
        vx = speed * std::cos(heading);
        vy = speed * std::sin(heading);
        leg_left = rng.integer(cfg.leg_min, cfg.leg_max);
    }

    void advance(TimeStamp dt, const Box& box, Rng& rng, const SynthConfig& cfg) {
        while (dt > 0) {
            const TimeStamp step = std::min(dt, leg_left);
            double x = p.x + vx * static_cast<double>(step);
            double y = p.y + vy * static_cast<double>(step);
            if (fold(x, box.xmin, box.xmax)) {
                vx = -vx;
            }
            if (fold(y, box.ymin, box.ymax)) {
                vy = -vy;
            }
            p = {x, y};
            dt -= step;
            leg_left -= step;
            if (leg_left == 0) {
                new_leg(rng, cfg);
            }
        }
    }
};

/// Splits total into parts of at least min_each, remainder spread at random.
std::vector<std::size_t> split_counts(std::size_t total, std::size_t parts, std::size_t min_each, Rng& rng) {
    std::vector<std::size_t> out(parts, min_each);
    for (std::size_t extra = total - parts * min_each; extra > 0; --extra) {
        ++out[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(parts) - 1))];
    }
    return out;
}

}  // namespace

double reference_agm(const GeoEllipse& e, const SignalCoverageMap& scm) {
    const GridSpec& g = scm.grid();
    std::size_t n = 0;
    std::size_t reported = 0;
    for (CellIndex c = 0; c < g.cell_count(); ++c) {
        if (contains(e, g.cell_center(c))) {
            ++n;
            reported += scm.reported(c) ? 1 : 0;
        }
    }
    return n == 0 ? 0.0 : static_cast<double>(reported) / static_cast<double>(n);
}

SynthData generate(const SynthConfig& cfg) {
    cfg.validate();
    const Projection gen_proj(GeoPoint{(cfg.lon_min + cfg.lon_max) / 2.0, (cfg.lat_min + cfg.lat_max) / 2.0});
    const PlanarPoint lo = gen_proj.project({cfg.lon_min, cfg.lat_min});
    const PlanarPoint hi = gen_proj.project({cfg.lon_max, cfg.lat_max});
    const double half = cfg.ground_km * 500.0;
    if (hi.x - lo.x < 2.0 * half || hi.y - lo.y < 2.0 * half) {
        throw ConfigError("grounds do not fit inside the study area");
    }

    Rng area_rng(mix(cfg.seed));
    std::vector<Box> grounds;
    for (std::size_t i = 0; i < cfg.n_grounds; ++i) {
        const double cx = area_rng.uniform(lo.x + half, hi.x - half);
        const double cy = area_rng.uniform(lo.y + half, hi.y - half);
        grounds.push_back({cx - half, cy - half, cx + half, cy + half});
    }

    std::ostringstream csv;
    csv << "MMSI,BaseDateTime,LAT,LON,SOG\n";
    char line[128];
    for (std::size_t v = 0; v < cfg.n_vessels; ++v) {
        Rng rng(mix(cfg.seed ^ mix(v + 1)));
        const std::size_t gaps_v = cfg.n_gaps / cfg.n_vessels + (v < cfg.n_gaps % cfg.n_vessels ? 1 : 0);
        const std::size_t points_v =
            cfg.n_points_total / cfg.n_vessels + (v < cfg.n_points_total % cfg.n_vessels ? 1 : 0);
        const std::size_t runs = gaps_v + 1;
        if (points_v < runs * kMinRunPoints) {
            throw ConfigError("vessel " + std::to_string(v) + " has " + std::to_string(points_v) +
                              " points, too few for " + std::to_string(gaps_v) + " silences");
        }
        const std::vector<std::size_t> run_points = split_counts(points_v, runs, kMinRunPoints, rng);
        std::vector<TimeStamp> silences;
        TimeStamp duration = static_cast<TimeStamp>(points_v - runs) * cfg.report_interval;
        for (std::size_t s = 0; s < gaps_v; ++s) {
            silences.push_back(rng.integer(cfg.emp_min, cfg.emp_max));
            duration += silences.back();
        }
        if (duration > cfg.t_end - cfg.t_begin) {
            throw ConfigError("vessel " + std::to_string(v) + " needs more time than the configured span");
        }
        TimeStamp t = rng.integer(cfg.t_begin, cfg.t_end - duration);

        const Box& ground = grounds[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(grounds.size()) - 1))];
        Mover m;
        m.p = {rng.uniform(ground.xmin, ground.xmax), rng.uniform(ground.ymin, ground.ymax)};
        m.new_leg(rng, cfg);

        const int mmsi = 367000000 + static_cast<int>(v);
        for (std::size_t r = 0; r < runs; ++r) {
            for (std::size_t k = 0; k < run_points[r]; ++k) {
                if (k > 0) {
                    m.advance(cfg.report_interval, ground, rng, cfg);
                    t += cfg.report_interval;
                }
                const GeoPoint g = gen_proj.unproject(m.p);
                const double sog_kn = std::hypot(m.vx, m.vy) / kKnotsToMps;
                std::snprintf(line, sizeof line, "%09d,%s,%.7f,%.7f,%.2f\n", mmsi, format_iso8601(t).c_str(), g.lat,
                              g.lon, sog_kn);
                csv << line;
            }
            if (r < gaps_v) {
                m.advance(silences[r], ground, rng, cfg);
                t += silences[r];
            }
        }
    }

    std::string text = csv.str();
    std::istringstream in(text);
    ParsedAis parsed = parse_ais_csv(in);
    std::vector<Trajectory> trajectories = assemble_trajectories(std::move(parsed.records));
    std::vector<Fix> traces;
    for (const Trajectory& tr : trajectories) {
        traces.insert(traces.end(), tr.fixes.begin(), tr.fixes.end());
    }
    const auto [proj, grid] = study_frame(traces, cfg.cell_m);
    SignalCoverageMap scm = build_scm(traces, grid, proj, cfg.theta);

    GapRules rules;
    rules.emp_threshold = cfg.emp_threshold;
    rules.speed = SpeedPolicy::fixed(cfg.s_max);
    GapExtraction ex = extract_all_gaps(trajectories, rules, proj);
    if (ex.gaps.size() != cfg.n_gaps || !ex.rejects.empty()) {
        throw ConfigError("extracted " + std::to_string(ex.gaps.size()) + " gaps (" +
                          std::to_string(ex.rejects.size()) + " infeasible) from " + std::to_string(cfg.n_gaps) +
                          " injected silences");
    }

    std::vector<LabeledGap> labeled;
    labeled.reserve(ex.gaps.size());
    for (TrajectoryGap& g : ex.gaps) {
        const double a = reference_agm(g.ellipse, scm);
        labeled.push_back(LabeledGap{std::move(g), a > cfg.label_threshold, a});
    }
    return SynthData{std::move(text), std::move(trajectories), std::move(scm), std::move(labeled)};
}

double accuracy(std::span<const GapLabel> predicted, std::span<const GapLabel> truth) {
    auto by_id = [](std::span<const GapLabel> s) {
        std::vector<GapLabel> v(s.begin(), s.end());
        std::sort(v.begin(), v.end(), [](const GapLabel& a, const GapLabel& b) { return a.gap_id < b.gap_id; });
        return v;
    };
    const std::vector<GapLabel> p = by_id(predicted);
    const std::vector<GapLabel> t = by_id(truth);
    if (p.size() != t.size()) {
        throw LabelSetMismatch("prediction and truth cover different numbers of gaps");
    }
    if (p.empty()) {
        throw LabelSetMismatch("no gaps to score");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].gap_id != t[i].gap_id || (i > 0 && p[i].gap_id == p[i - 1].gap_id)) {
            throw LabelSetMismatch("gap id sets differ");
        }
        correct += p[i].abnormal == t[i].abnormal ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(p.size());
}

void write_labels_csv(std::ostream& out, std::span<const LabeledGap> gaps) {
    out << "gap_id,label,label_agm\n";
    char buf[96];
    for (const LabeledGap& g : gaps) {
        std::snprintf(buf, sizeof buf, "%u,%s,%.17g\n", g.gap.gap_id, g.abnormal ? "abnormal" : "normal", g.label_agm);
        out << buf;
    }
}

}  // namespace agd
