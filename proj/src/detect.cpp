#include "agd/detect.hpp"

#include "agd/errors.hpp"
#include "agd/mobr_tree.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <unordered_map>

namespace agd {

void DetectionConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("lambda must lie in [0, 1]");
    }
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw ConfigError("delta must lie in [0, 1]");
    }
    if (k == 0) {
        throw ConfigError("k must be at least 1");
    }
    if (!(min_agm >= 0.0 && min_agm <= 1.0)) {
        throw ConfigError("min_agm must lie in [0, 1]");
    }
}

void AgmDeque::insert(GroupId g, double agm) {
    order_.insert(Key{agm, g});
}

void AgmDeque::update(GroupId g, double old_agm, double new_agm) {
    order_.erase(Key{old_agm, g});
    order_.insert(Key{new_agm, g});
}

std::vector<std::pair<GroupId, double>> AgmDeque::snapshot() const {
    std::vector<std::pair<GroupId, double>> out;
    out.reserve(order_.size());
    for (const Key& k : order_) {
        out.emplace_back(k.g, k.agm);
    }
    return out;
}

bool AgmDeque::is_ordered() const {
    double prev = std::numeric_limits<double>::infinity();
    for (const Key& k : order_) {
        if (k.agm > prev) {
            return false;
        }
        prev = k.agm;
    }
    return true;
}

bool early_terminates(double group_agm, double gap_agm, double delta) {
    if (delta >= 1.0) {
        return false;
    }
    const double d = group_agm - gap_agm;
    return (d < 0 ? -d : d) >= delta;
}

namespace {

struct GapWindow {
    std::int64_t col_lo, col_hi, row_lo, row_hi;
};

/// Shared per-run state: lazily rasterized gap cells and the groups built so far.
class Workspace {
public:
    Workspace(std::span<const TrajectoryGap> gaps, const SignalCoverageMap& scm, const DetectionConfig& cfg)
        : gaps_(gaps), scm_(scm), cfg_(cfg), cells_(gaps.size()), group_of_(gaps.size(), kNoGroup) {
        cfg.validate();
        std::unordered_map<GapId, std::size_t> seen;
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            if (!seen.emplace(gaps[i].gap_id, i).second) {
                throw DuplicateEntry("gap id " + std::to_string(gaps[i].gap_id) + " appears twice");
            }
        }
    }

    static constexpr std::uint32_t kNoGroup = std::numeric_limits<std::uint32_t>::max();

    const CellSet& cells(std::size_t i) {
        if (!cells_[i]) {
            cells_[i] = rasterize_gap(gaps_[i].ellipse, scm_.grid());
        }
        return *cells_[i];
    }

    /// Criterion shared by the union-bound pipelines.
    bool union_criterion(const CellSet& c, const MergedGroup& g) const {
        return intersects(c, g.union_cells) && degree_overlap(c, g.union_cells, scm_) >= cfg_.lambda;
    }

    GroupId open_group(std::size_t i) {
        const CellSet& c = cells(i);
        MergedGroup g;
        g.group_id = static_cast<GroupId>(groups.size());
        g.member_gap_ids = {gaps_[i].gap_id};
        g.union_cells = c;
        g.intersection_cells = c;
        g.group_mobr = gaps_[i].mobr;
        set_window(g);
        g.reported_in_union = count_reported(c, scm_);
        g.agm = c.empty() ? 0.0 : static_cast<double>(g.reported_in_union) / static_cast<double>(c.size());
        g.t_start = gaps_[i].t_start();
        g.t_end = gaps_[i].t_end();
        groups.push_back(std::move(g));
        members.push_back({i});
        group_of_[i] = groups.back().group_id;
        return groups.back().group_id;
    }

    /// Adds gap i to group g. When incremental is set the reported count and AGM
    /// are advanced from the cells that are new to the union.
    void merge(GroupId gid, std::size_t i, bool incremental, DetectionStats& stats) {
        MergedGroup& g = groups[gid];
        const CellSet& c = cells(i);
        if (incremental) {
            const CellSet fresh = set_difference(c, g.union_cells);
            g.reported_in_union += count_reported(fresh, scm_);
        }
        g.union_cells = set_union(g.union_cells, c);
        g.intersection_cells = set_intersection(g.intersection_cells, c);
        g.group_mobr = mobr_union(g.group_mobr, gaps_[i].mobr);
        set_window(g);
        auto pos = std::lower_bound(g.member_gap_ids.begin(), g.member_gap_ids.end(), gaps_[i].gap_id);
        g.member_gap_ids.insert(pos, gaps_[i].gap_id);
        g.t_start = std::min(g.t_start, gaps_[i].t_start());
        g.t_end = std::max(g.t_end, gaps_[i].t_end());
        members[gid].push_back(i);
        group_of_[i] = gid;
        if (incremental) {
            g.agm = g.union_cells.empty()
                        ? 0.0
                        : static_cast<double>(g.reported_in_union) / static_cast<double>(g.union_cells.size());
        }
        if (cfg_.shadow_check) {
            CellSet u;
            for (std::size_t m : members[gid]) {
                u = set_union(u, cells(m));
            }
            if (!(u == g.union_cells) || (incremental && count_reported(u, scm_) != g.reported_in_union)) {
                ++stats.shadow_mismatches;
            }
        }
    }

    /// Scores every group by testing each cell center of the given range against the member ellipses.
    void score_by_scan(bool full_grid, DetectionStats& stats) {
        const GridSpec& grid = scm_.grid();
        for (MergedGroup& g : groups) {
            std::vector<GapWindow> wins;
            for (std::size_t m : members[g.group_id]) {
                const GridSpec::Window w = grid.window(ellipse_mobr(gaps_[m].ellipse));
                wins.push_back({w.col_lo, w.col_hi, w.row_lo, w.row_hi});
            }
            GridSpec::Window range;
            if (full_grid) {
                range = {0, static_cast<std::int64_t>(grid.ncols) - 1, 0, static_cast<std::int64_t>(grid.nrows) - 1};
            } else {
                range = grid.window(g.group_mobr);
            }
            std::size_t n = 0;
            std::size_t reported = 0;
            for (std::int64_t r = range.row_lo; r <= range.row_hi; ++r) {
                const double cy = grid.origin.y + (static_cast<double>(r) + 0.5) * grid.cell_dy;
                for (std::int64_t col = range.col_lo; col <= range.col_hi; ++col) {
                    ++stats.cells_scored;
                    const double cx = grid.origin.x + (static_cast<double>(col) + 0.5) * grid.cell_dx;
                    const auto& mem = members[g.group_id];
                    for (std::size_t k = 0; k < mem.size(); ++k) {
                        const GapWindow& w = wins[k];
                        if (col < w.col_lo || col > w.col_hi || r < w.row_lo || r > w.row_hi) {
                            continue;
                        }
                        if (contains(gaps_[mem[k]].ellipse, {cx, cy})) {
                            ++n;
                            if (scm_.reported(grid.index(static_cast<std::uint32_t>(col),
                                                         static_cast<std::uint32_t>(r)))) {
                                ++reported;
                            }
                            break;
                        }
                    }
                }
            }
            g.reported_in_union = reported;
            g.agm = n == 0 ? 0.0 : static_cast<double>(reported) / static_cast<double>(n);
        }
    }

    std::uint32_t group_of(std::size_t i) const { return group_of_[i]; }
    const TrajectoryGap& gap(std::size_t i) const { return gaps_[i]; }
    const DetectionConfig& cfg() const { return cfg_; }

    std::vector<MergedGroup> groups;
    std::vector<std::vector<std::size_t>> members;  // gap positions per group

private:
    void set_window(MergedGroup& g) const {
        const GridSpec::Window w = scm_.grid().window(g.group_mobr);
        g.window_left = w.col_lo;
        g.window_right = w.col_hi;
    }

    std::span<const TrajectoryGap> gaps_;
    const SignalCoverageMap& scm_;
    const DetectionConfig& cfg_;
    std::vector<std::optional<CellSet>> cells_;
    std::vector<std::uint32_t> group_of_;
};

std::vector<TimedInterval> intervals_of(std::span<const TrajectoryGap> gaps) {
    std::vector<TimedInterval> out;
    out.reserve(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        out.push_back({static_cast<std::uint32_t>(i), gaps[i].t_start(), gaps[i].t_end()});
    }
    return out;
}

/// Groups of the temporally overlapping earlier gaps, in order of first appearance,
/// kept only when one of their members was hit by the spatial index.
std::vector<GroupId> spatial_candidate_groups(const Workspace& ws, std::span<const std::uint32_t> earlier,
                                              std::span<const std::uint64_t> tree_hits,
                                              std::vector<std::uint32_t>& stamp, std::uint32_t mark) {
    for (std::uint64_t h : tree_hits) {
        stamp[ws.group_of(static_cast<std::size_t>(h))] = mark;
    }
    std::vector<GroupId> out;
    for (std::uint32_t j : earlier) {
        const GroupId g = ws.group_of(j);
        if (stamp[g] == mark) {
            out.push_back(g);
            stamp[g] = mark - 1;  // emit once
        }
    }
    return out;
}

}  // namespace

DetectionResult memo_agd(std::span<const TrajectoryGap> gaps, const SignalCoverageMap& scm,
                         const DetectionConfig& cfg) {
    Workspace ws(gaps, scm, cfg);
    DetectionResult res;
    DetectionStats& st = res.stats;

    std::vector<std::size_t> order(gaps.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        ++st.sort_comparisons;
        return gaps[a].t_start() < gaps[b].t_start() ||
               (gaps[a].t_start() == gaps[b].t_start() && gaps[a].gap_id < gaps[b].gap_id);
    });

    std::vector<std::size_t> observed;
    std::vector<std::size_t> tested_stamp;
    for (std::size_t step = 0; step < order.size(); ++step) {
        const std::size_t i = order[step];
        const CellSet& c = ws.cells(i);
        const auto groups_before = static_cast<std::uint32_t>(ws.groups.size());
        tested_stamp.resize(ws.groups.size(), 0);
        std::uint32_t tests = 0;
        std::optional<GroupId> target;
        for (std::size_t j : observed) {
            ++st.temporal_comparisons;
            if (!(gaps[j].t_end() > gaps[i].t_start())) {
                continue;
            }
            const GroupId g = ws.group_of(j);
            if (tested_stamp[g] == step + 1) {
                continue;  // already compared through another member
            }
            tested_stamp[g] = step + 1;
            ++tests;
            const MergedGroup& grp = ws.groups[g];
            if (intersects(c, grp.intersection_cells) && degree_overlap(c, grp.union_cells, scm) >= cfg.lambda) {
                target = g;
                break;
            }
        }
        st.region_tests += tests;
        st.per_gap_tests.emplace_back(tests, groups_before);
        if (target) {
            ws.merge(*target, i, false, st);
            ++st.merges_ib;
        } else {
            ws.open_group(i);
        }
        observed.push_back(i);
    }
    ws.score_by_scan(true, st);
    res.groups = std::move(ws.groups);
    return res;
}

namespace {

enum class Scoring { window_scan, incremental };

DetectionResult run_indexed(std::span<const TrajectoryGap> gaps, const SignalCoverageMap& scm,
                            const DetectionConfig& cfg, Scoring scoring) {
    Workspace ws(gaps, scm, cfg);
    DetectionResult res;
    DetectionStats& st = res.stats;
    if (gaps.empty()) {
        return res;
    }

    const std::vector<TimedInterval> intervals = intervals_of(gaps);
    const TemporalIndex index = TemporalIndex::build(intervals, cfg.temporal_budget_bytes);
    const CandidatePairs pairs = temporal_candidates(index);
    st.temporal_comparisons = pairs.comparisons;

    MobrTree tree;
    AgmDeque deque;
    std::vector<std::uint32_t> stamp;
    std::uint32_t mark = 1;
    const bool drm = scoring == Scoring::incremental;

    for (const CandidatePairs::Entry& entry : pairs.entries) {
        const std::size_t i = entry.id;
        const CellSet& c = ws.cells(i);
        const auto groups_before = static_cast<std::uint32_t>(ws.groups.size());
        stamp.resize(ws.groups.size(), 0);
        mark += 2;

        std::vector<std::uint64_t> hits;
        if (!entry.earlier.empty()) {
            hits = tree.query(gaps[i].mobr, &st.mobr_tests);
        }
        std::vector<GroupId> cands = spatial_candidate_groups(ws, entry.earlier, hits, stamp, mark);

        std::uint32_t tests = 0;
        std::optional<GroupId> target;
        const double gap_agm = agm(c, scm);
        if (drm) {
            std::sort(cands.begin(), cands.end(), [&](GroupId a, GroupId b) {
                const double xa = ws.groups[a].agm;
                const double xb = ws.groups[b].agm;
                return xa > xb || (xa == xb && a < b);
            });
        }
        for (GroupId g : cands) {
            const MergedGroup& grp = ws.groups[g];
            if (drm) {
                ++st.eq3_tests;
                if (early_terminates(grp.agm, gap_agm, cfg.delta)) {
                    ++st.vetoed;
                    if (gap_agm > grp.agm) {
                        break;  // every later group scores lower still
                    }
                    continue;
                }
            }
            ++tests;
            if (ws.union_criterion(c, grp)) {
                target = g;
                break;
            }
        }
        st.region_tests += tests;
        st.per_gap_tests.emplace_back(tests, groups_before);

        if (target) {
            if (intersects(c, ws.groups[*target].intersection_cells)) {
                ++st.merges_ib;
            } else {
                ++st.merges_ub_only;
            }
            const double old_agm = ws.groups[*target].agm;
            ws.merge(*target, i, drm, st);
            if (drm) {
                deque.update(*target, old_agm, ws.groups[*target].agm);
                if (cfg.shadow_check && !deque.is_ordered()) {
                    ++st.deque_order_violations;
                }
            }
        } else {
            const GroupId g = ws.open_group(i);
            if (drm) {
                deque.insert(g, ws.groups[g].agm);
            }
        }
        tree.insert(i, gaps[i].mobr);
    }

    if (!drm) {
        ws.score_by_scan(false, st);
    }
    res.groups = std::move(ws.groups);
    return res;
}

}  // namespace

DetectionResult stagd(std::span<const TrajectoryGap> gaps, const SignalCoverageMap& scm, const DetectionConfig& cfg) {
    return run_indexed(gaps, scm, cfg, Scoring::window_scan);
}

DetectionResult stagd_drm(std::span<const TrajectoryGap> gaps, const SignalCoverageMap& scm,
                          const DetectionConfig& cfg) {
    return run_indexed(gaps, scm, cfg, Scoring::incremental);
}

std::vector<MergedGroup> top_k(std::span<const MergedGroup> groups, std::size_t k, double min_agm) {
    std::vector<MergedGroup> out;
    for (const MergedGroup& g : groups) {
        if (g.agm >= min_agm) {
            out.push_back(g);
        }
    }
    std::sort(out.begin(), out.end(), [](const MergedGroup& a, const MergedGroup& b) {
        return a.agm > b.agm || (a.agm == b.agm && a.group_id < b.group_id);
    });
    if (out.size() > k) {
        out.resize(k);
    }
    return out;
}

}  // namespace agd
