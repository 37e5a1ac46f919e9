#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include "agd/coverage.hpp"
#include "agd/detect.hpp"
#include "agd/geom.hpp"
#include "agd/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using namespace agd;

/// Every cell center of the grid tested against the ellipse.
inline CellSet full_grid_cells(const GeoEllipse& e, const GridSpec& g) {
    std::vector<CellIndex> out;
    for (CellIndex c = 0; c < g.cell_count(); ++c) {
        if (contains(e, g.cell_center(c))) {
            out.push_back(c);
        }
    }
    return CellSet::from_sorted(out);
}

/// Closed segment versus closed rectangle (Liang-Barsky clip).
inline bool segment_hits_box(PlanarPoint p, PlanarPoint q, const Mobr& b) {
    double t0 = 0.0;
    double t1 = 1.0;
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    auto clip = [&](double den, double num) {
        if (den == 0.0) {
            return num >= 0.0;
        }
        const double t = num / den;
        if (den > 0.0) {
            t1 = std::min(t1, t);
        } else {
            t0 = std::max(t0, t);
        }
        return t0 <= t1;
    };
    return clip(-dx, p.x - b.xmin) && clip(dx, b.xmax - p.x) && clip(-dy, p.y - b.ymin) && clip(dy, b.ymax - p.y);
}

inline CellSet full_grid_segment(PlanarPoint p, PlanarPoint q, const GridSpec& g) {
    std::vector<CellIndex> out;
    for (CellIndex c = 0; c < g.cell_count(); ++c) {
        if (segment_hits_box(p, q, g.cell_box(c))) {
            out.push_back(c);
        }
    }
    return CellSet::from_sorted(out);
}

/// All (earlier, later) pairs in start-time order that overlap with a strict end > start test.
inline std::set<std::pair<std::uint32_t, std::uint32_t>> overlap_pairs(const std::vector<TimedInterval>& iv) {
    std::vector<TimedInterval> s = iv;
    std::sort(s.begin(), s.end(), [](const TimedInterval& a, const TimedInterval& b) {
        return a.t_start < b.t_start || (a.t_start == b.t_start && a.id < b.id);
    });
    std::set<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (s[j].t_end > s[i].t_start) {
                out.insert({s[j].id, s[i].id});
            }
        }
    }
    return out;
}

inline std::vector<std::uint64_t> linear_scan(const std::vector<Mobr>& boxes, const Mobr& probe) {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (mobr_intersects(boxes[i], probe)) {
            out.push_back(i);
        }
    }
    return out;
}

/// Gap positions ordered by (t_start, gap id).
inline std::vector<std::size_t> processing_order(const std::vector<TrajectoryGap>& gaps) {
    std::vector<std::size_t> o(gaps.size());
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = i;
    }
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
        return gaps[a].t_start() < gaps[b].t_start() ||
               (gaps[a].t_start() == gaps[b].t_start() && gaps[a].gap_id < gaps[b].gap_id);
    });
    return o;
}

using Partition = std::set<std::vector<GapId>>;

inline Partition partition_of(const std::vector<MergedGroup>& groups) {
    Partition p;
    for (const MergedGroup& g : groups) {
        std::vector<GapId> m = g.member_gap_ids;
        std::sort(m.begin(), m.end());
        p.insert(m);
    }
    return p;
}

enum class Bound { intersection, union_only };

/**
 * Straight-line sequential grouping. Every group's regions are recomputed from
 * its members' cells for each test; candidate groups are those owning an
 * earlier gap that overlaps in time, visited in order of that gap.
 * Bound::intersection requires the gap to touch the common region of all
 * members; Bound::union_only requires it to touch the union.
 */
inline std::vector<std::vector<std::size_t>> sequential_groups(const std::vector<TrajectoryGap>& gaps,
                                                               const SignalCoverageMap& scm, double lambda,
                                                               Bound bound) {
    std::vector<CellSet> cells;
    for (const TrajectoryGap& g : gaps) {
        cells.push_back(full_grid_cells(g.ellipse, scm.grid()));
    }
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> group_of(gaps.size(), SIZE_MAX);
    std::vector<std::size_t> done;
    for (std::size_t i : processing_order(gaps)) {
        std::vector<std::size_t> cand;
        for (std::size_t j : done) {
            if (gaps[j].t_end() > gaps[i].t_start() &&
                std::find(cand.begin(), cand.end(), group_of[j]) == cand.end()) {
                cand.push_back(group_of[j]);
            }
        }
        std::size_t target = SIZE_MAX;
        for (std::size_t g : cand) {
            CellSet u;
            CellSet inter = cells[groups[g].front()];
            for (std::size_t m : groups[g]) {
                u = set_union(u, cells[m]);
                inter = set_intersection(inter, cells[m]);
            }
            const bool touches = bound == Bound::intersection ? intersects(cells[i], inter) : intersects(cells[i], u);
            if (touches && degree_overlap(cells[i], u, scm) >= lambda) {
                target = g;
                break;
            }
        }
        if (target == SIZE_MAX) {
            target = groups.size();
            groups.emplace_back();
        }
        groups[target].push_back(i);
        group_of[i] = target;
        done.push_back(i);
    }
    return groups;
}

inline Partition partition_of(const std::vector<std::vector<std::size_t>>& groups,
                              const std::vector<TrajectoryGap>& gaps) {
    Partition p;
    for (const auto& g : groups) {
        std::vector<GapId> ids;
        for (std::size_t i : g) {
            ids.push_back(gaps[i].gap_id);
        }
        std::sort(ids.begin(), ids.end());
        p.insert(ids);
    }
    return p;
}

/// Scenario of random gaps over a random coverage map on a small grid.
struct Scenario {
    SignalCoverageMap scm;
    std::vector<TrajectoryGap> gaps;
};

inline SignalCoverageMap random_scm(std::mt19937_64& rng, std::uint32_t ncols, std::uint32_t nrows, double cell,
                                    double p_reported) {
    GridSpec g;
    g.origin = {0.0, 0.0};
    g.cell_dx = cell;
    g.cell_dy = cell;
    g.ncols = ncols;
    g.nrows = nrows;
    std::vector<std::uint32_t> counts(g.cell_count());
    std::bernoulli_distribution rep(p_reported);
    for (auto& c : counts) {
        c = rep(rng) ? 5 : 0;
    }
    return SignalCoverageMap(Projection({0.0, 0.0}), g, std::move(counts), 1, 0);
}

/**
 * Random feasible gaps inside the grid. Start positions cluster around a few
 * hot spots so that gaps overlap and merge; times are drawn from a window
 * short enough for temporal overlap to be common.
 */
inline std::vector<TrajectoryGap> random_gaps(std::mt19937_64& rng, const GridSpec& g, std::size_t n,
                                              TimeStamp time_window = 20000, double s_max = 5.0) {
    const double w = g.cell_dx * g.ncols;
    const double h = g.cell_dy * g.nrows;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<PlanarPoint> hubs;
    for (int k = 0; k < 3; ++k) {
        hubs.push_back({w * (0.2 + 0.6 * u(rng)), h * (0.2 + 0.6 * u(rng))});
    }
    std::vector<TrajectoryGap> out;
    for (std::size_t i = 0; i < n; ++i) {
        const PlanarPoint hub = hubs[static_cast<std::size_t>(u(rng) * 3) % 3];
        const double spread = 0.15 * std::min(w, h);
        const PlanarPoint p{hub.x + spread * (u(rng) - 0.5), hub.y + spread * (u(rng) - 0.5)};
        const PlanarPoint q{p.x + spread * (u(rng) - 0.5), p.y + spread * (u(rng) - 0.5)};
        const TimeStamp t0 = static_cast<TimeStamp>(u(rng) * static_cast<double>(time_window));
        const double dist = distance(p, q);
        const auto min_dt = static_cast<TimeStamp>(std::ceil(dist / s_max)) + 1;
        const TimeStamp dt = min_dt + static_cast<TimeStamp>(u(rng) * 1500.0);
        TrajectoryGap gap;
        gap.gap_id = static_cast<GapId>(i * 7 + 3);  // ids deliberately not positions
        gap.vessel = VesselId{"v" + std::to_string(i % 17)};
        gap.start_fix.t = t0;
        gap.end_fix.t = t0 + dt;
        gap.emp_seconds = dt;
        gap.s_max = s_max;
        gap.ellipse = build_geo_ellipse(p, t0, q, t0 + dt, s_max);
        gap.mobr = ellipse_mobr(gap.ellipse);
        out.push_back(gap);
    }
    return out;
}

}  // namespace oracle
