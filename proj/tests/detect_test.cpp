#include "agd/detect.hpp"
#include "agd/errors.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace agd;

namespace {

GridSpec unit_grid(std::uint32_t ncols, std::uint32_t nrows) {
    GridSpec g;
    g.origin = {0.0, 0.0};
    g.cell_dx = 1.0;
    g.cell_dy = 1.0;
    g.ncols = ncols;
    g.nrows = nrows;
    return g;
}

SignalCoverageMap scm_from(const GridSpec& g, const std::vector<bool>& reported) {
    std::vector<std::uint32_t> counts(g.cell_count(), 0);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        counts[c] = reported[c] ? 1 : 0;
    }
    return SignalCoverageMap(Projection({0, 0}), g, counts, 1, 0);
}

SignalCoverageMap all_reported(const GridSpec& g) {
    return scm_from(g, std::vector<bool>(g.cell_count(), true));
}

TrajectoryGap ellipse_gap(GapId id, PlanarPoint p, PlanarPoint q, double a, TimeStamp t0, TimeStamp t1) {
    TrajectoryGap g;
    g.gap_id = id;
    g.vessel = VesselId{"v" + std::to_string(id)};
    g.start_fix.t = t0;
    g.end_fix.t = t1;
    g.emp_seconds = t1 - t0;
    g.s_max = 2.0 * a / static_cast<double>(t1 - t0);
    g.ellipse = build_geo_ellipse(p, t0, q, t1, g.s_max);
    g.mobr = ellipse_mobr(g.ellipse);
    return g;
}

TrajectoryGap circle_gap(GapId id, PlanarPoint c, double r, TimeStamp t0, TimeStamp t1) {
    return ellipse_gap(id, c, c, r, t0, t1);
}

using Ids = std::vector<GapId>;

oracle::Partition partition(std::initializer_list<Ids> groups) {
    return oracle::Partition(groups.begin(), groups.end());
}

bool valid_partition(const DetectionResult& r, const std::vector<TrajectoryGap>& gaps) {
    std::map<GapId, int> seen;
    for (const MergedGroup& g : r.groups) {
        if (g.member_gap_ids.empty()) return false;
        for (GapId id : g.member_gap_ids) ++seen[id];
    }
    if (seen.size() != gaps.size()) return false;
    for (const TrajectoryGap& g : gaps) {
        if (seen[g.gap_id] != 1) return false;
    }
    return true;
}

bool bounded_tests(const DetectionResult& r, std::size_t n) {
    if (r.stats.per_gap_tests.size() != n) return false;
    for (const auto& [tests, before] : r.stats.per_gap_tests) {
        if (tests > before) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("memoized trace over six gaps") {
    enum : GapId { A, B, C, D, E, F };
    const GridSpec grid = unit_grid(60, 20);
    const SignalCoverageMap scm = all_reported(grid);
    const std::vector<TrajectoryGap> gaps{
        circle_gap(A, {10.5, 10.5}, 3, 1, 100), circle_gap(B, {11.5, 10.5}, 3, 2, 100),
        circle_gap(C, {12.5, 10.5}, 3, 3, 100), circle_gap(D, {30.5, 10.5}, 3, 8, 100),
        circle_gap(E, {31.5, 10.5}, 3, 9, 100), circle_gap(F, {50.5, 10.5}, 3, 10, 100)};
    DetectionConfig cfg;
    const auto expected = partition({{A, B, C}, {D, E}, {F}});

    const DetectionResult memo = memo_agd(gaps, scm, cfg);
    CHECK(oracle::partition_of(memo.groups) == expected);
    using Tests = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
    // D compares against the cached region of {A, B, C} once instead of each member.
    CHECK(memo.stats.per_gap_tests == Tests{{0, 0}, {1, 1}, {1, 1}, {1, 1}, {2, 2}, {2, 2}});
    CHECK(memo.stats.merges_ib == 3);

    const DetectionResult st = stagd(gaps, scm, cfg);
    CHECK(oracle::partition_of(st.groups) == expected);
    CHECK(st.stats.per_gap_tests == Tests{{0, 0}, {1, 1}, {1, 1}, {0, 1}, {1, 2}, {0, 2}});
    CHECK(st.stats.comparison_ops() < memo.stats.comparison_ops());

    const DetectionResult drm = stagd_drm(gaps, scm, cfg);
    CHECK(oracle::partition_of(drm.groups) == expected);
    for (const DetectionResult* r : {&memo, &st, &drm}) {
        for (const MergedGroup& g : r->groups) {
            CHECK(g.agm == 1.0);
        }
    }
    REQUIRE(st.groups.size() == 3);
    CHECK(st.groups[0].member_gap_ids == Ids{A, B, C});
    CHECK(st.groups[0].t_start == 1);
    CHECK(st.groups[0].t_end == 100);
    const auto w = grid.window(st.groups[0].group_mobr);
    CHECK(st.groups[0].window_left == w.col_lo);
    CHECK(st.groups[0].window_right == w.col_hi);
}

TEST_CASE("union bound admits a gap that misses the common region") {
    enum : GapId { A, B, D };
    const GridSpec grid = unit_grid(40, 20);
    const SignalCoverageMap scm = all_reported(grid);
    const std::vector<TrajectoryGap> gaps{circle_gap(A, {10.5, 10.5}, 3, 0, 100),
                                          circle_gap(B, {14.5, 10.5}, 3, 5, 100),
                                          circle_gap(D, {18.5, 10.5}, 3, 10, 100)};
    DetectionConfig cfg;
    cfg.lambda = 0.1;

    const DetectionResult memo = memo_agd(gaps, scm, cfg);
    CHECK(oracle::partition_of(memo.groups) == partition({{A, B}, {D}}));

    const DetectionResult st = stagd(gaps, scm, cfg);
    CHECK(oracle::partition_of(st.groups) == partition({{A, B, D}}));
    CHECK(st.stats.merges_ib == 1);
    CHECK(st.stats.merges_ub_only == 1);
    REQUIRE(st.groups.size() == 1);
    CHECK(st.groups[0].intersection_cells.empty());
    CHECK(st.groups[0].union_cells.size() > memo.groups[0].union_cells.size());
}

TEST_CASE("agm difference stops the candidate scan") {
    enum : GapId { A, D, E, F };
    const GridSpec grid = unit_grid(40, 12);
    std::vector<TrajectoryGap> gaps{circle_gap(A, {5.5, 5.5}, 2, 0, 1000), circle_gap(D, {15.5, 5.5}, 2, 10, 1000),
                                    circle_gap(E, {25.5, 5.5}, 2, 20, 1000),
                                    ellipse_gap(F, {5.5, 5.5}, {25.5, 5.5}, 12, 30, 1000)};
    std::vector<CellSet> cells;
    for (const auto& g : gaps) {
        cells.push_back(rasterize_gap(g.ellipse, grid));
    }
    REQUIRE(cells[0].size() == 13);
    std::vector<bool> rep(grid.cell_count(), false);
    auto mark_first = [&](const CellSet& s, std::size_t n) {
        for (CellIndex c : s) {
            if (n == 0) break;
            rep[c] = true;
            --n;
        }
    };
    mark_first(cells[0], 11);  // 0.846
    mark_first(cells[1], 3);   // 0.231
    mark_first(cells[2], 4);   // 0.308
    const CellSet others = set_difference(cells[3], set_union(cells[0], set_union(cells[1], cells[2])));
    const auto target = static_cast<std::size_t>(std::lround(0.83 * static_cast<double>(cells[3].size())));
    REQUIRE(target >= 18);
    REQUIRE(target - 18 <= others.size());
    mark_first(others, target - 18);
    const SignalCoverageMap scm = scm_from(grid, rep);
    const double f_agm = agm(cells[3], scm);
    REQUIRE(std::fabs(f_agm - 0.83) < 0.01);
    REQUIRE(std::fabs(agm(cells[0], scm) - f_agm) < 0.15);

    DetectionConfig cfg;
    cfg.delta = 0.15;
    SUBCASE("F joins the high-scoring group") {
        cfg.lambda = 0.02;
        const DetectionResult r = stagd_drm(gaps, scm, cfg);
        CHECK(oracle::partition_of(r.groups) == partition({{A, F}, {D}, {E}}));
        CHECK(r.stats.eq3_tests == 1);
        CHECK(r.stats.region_tests == 1);
    }
    SUBCASE("F fails the first group and stops at the next") {
        cfg.lambda = 0.1;
        const DetectionResult r = stagd_drm(gaps, scm, cfg);
        CHECK(oracle::partition_of(r.groups) == partition({{A}, {D}, {E}, {F}}));
        CHECK(r.stats.eq3_tests == 2);
        CHECK(r.stats.vetoed == 1);
        CHECK(r.stats.region_tests == 1);
        CHECK(r.stats.per_gap_tests.back() == std::pair<std::uint32_t, std::uint32_t>{1, 3});

        cfg.delta = 1.0;
        const DetectionResult all = stagd_drm(gaps, scm, cfg);
        CHECK(all.stats.eq3_tests == 3);
        CHECK(all.stats.vetoed == 0);
        CHECK(all.stats.region_tests == 3);
        CHECK(stagd(gaps, scm, cfg).stats.region_tests == 3);
    }
    SUBCASE("a low-scoring gap skips the high group and keeps scanning") {
        std::vector<TrajectoryGap> low = gaps;
        std::vector<bool> rep2 = rep;
        for (CellIndex c : others) rep2[c] = false;
        const SignalCoverageMap scm2 = scm_from(grid, rep2);
        REQUIRE(agm(cells[3], scm2) < 0.15);
        cfg.lambda = 0.01;
        cfg.delta = 0.3;
        const DetectionResult r = stagd_drm(low, scm2, cfg);
        // A is vetoed and skipped; E is within reach and accepts F.
        CHECK(r.stats.vetoed == 1);
        CHECK(oracle::partition_of(r.groups) == partition({{A}, {D}, {E, F}}));
    }
}

TEST_CASE("decreasing queue ordering") {
    AgmDeque q;
    q.insert(0, 0.84);
    q.insert(1, 0.23);
    q.insert(2, 0.33);
    q.insert(3, 0.33);
    using Snap = std::vector<std::pair<GroupId, double>>;
    CHECK(q.snapshot() == Snap{{0, 0.84}, {2, 0.33}, {3, 0.33}, {1, 0.23}});
    q.update(1, 0.23, 0.9);
    CHECK(q.snapshot().front() == std::pair<GroupId, double>{1, 0.9});
    CHECK(q.is_ordered());
    CHECK(q.size() == 4);
}

TEST_CASE("early termination rule") {
    CHECK(early_terminates(0.84, 0.23, 0.15));
    CHECK_FALSE(early_terminates(0.84, 0.83, 0.15));
    CHECK(early_terminates(0.5, 0.25, 0.25));
    CHECK_FALSE(early_terminates(0.0, 1.0, 1.0));
    CHECK(early_terminates(0.3, 0.3, 0.0));
}

TEST_CASE("lambda one keeps every gap alone") {
    std::mt19937_64 rng(5);
    const SignalCoverageMap scm = oracle::random_scm(rng, 80, 60, 1.0, 0.5);
    const auto gaps = oracle::random_gaps(rng, scm.grid(), 60, 5000, 0.02);
    DetectionConfig cfg;
    cfg.lambda = 1.0;
    CHECK(memo_agd(gaps, scm, cfg).groups.size() == 60);
    CHECK(stagd(gaps, scm, cfg).groups.size() == 60);
    CHECK(stagd_drm(gaps, scm, cfg).groups.size() == 60);
}

TEST_CASE("detectors agree with the sequential references") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        const SignalCoverageMap scm = oracle::random_scm(rng, 80, 60, 1.0, 0.3 + 0.05 * trial);
        const auto gaps = oracle::random_gaps(rng, scm.grid(), 60, 5000, 0.02);
        DetectionConfig cfg;
        cfg.lambda = trial % 2 ? 0.2 : 0.05;
        CHECK(oracle::partition_of(memo_agd(gaps, scm, cfg).groups) ==
              oracle::partition_of(oracle::sequential_groups(gaps, scm, cfg.lambda, oracle::Bound::intersection), gaps));
        CHECK(oracle::partition_of(stagd(gaps, scm, cfg).groups) ==
              oracle::partition_of(oracle::sequential_groups(gaps, scm, cfg.lambda, oracle::Bound::union_only), gaps));
        cfg.delta = 1.0;
        const DetectionResult drm = stagd_drm(gaps, scm, cfg);
        CHECK(valid_partition(drm, gaps));
    }
}

TEST_CASE("scores and group bookkeeping") {
    std::mt19937_64 rng(99);
    const SignalCoverageMap scm = oracle::random_scm(rng, 70, 50, 1.0, 0.5);
    const auto gaps = oracle::random_gaps(rng, scm.grid(), 80, 5000, 0.02);
    std::map<GapId, std::size_t> pos;
    for (std::size_t i = 0; i < gaps.size(); ++i) pos[gaps[i].gap_id] = i;
    DetectionConfig cfg;
    cfg.lambda = 0.05;
    cfg.shadow_check = true;
    for (auto* fn : {&memo_agd, &stagd, &stagd_drm}) {
        const DetectionResult r = fn(gaps, scm, cfg);
        CHECK(valid_partition(r, gaps));
        CHECK(bounded_tests(r, gaps.size()));
        CHECK(r.stats.shadow_mismatches == 0);
        CHECK(r.stats.deque_order_violations == 0);
        for (std::size_t gi = 0; gi < r.groups.size(); ++gi) {
            const MergedGroup& g = r.groups[gi];
            CHECK(g.group_id == gi);
            CellSet u;
            CellSet inter = oracle::full_grid_cells(gaps[pos[g.member_gap_ids.front()]].ellipse, scm.grid());
            Mobr box = gaps[pos[g.member_gap_ids.front()]].mobr;
            for (GapId id : g.member_gap_ids) {
                const CellSet c = oracle::full_grid_cells(gaps[pos[id]].ellipse, scm.grid());
                u = set_union(u, c);
                inter = set_intersection(inter, c);
                box = mobr_union(box, gaps[pos[id]].mobr);
            }
            CHECK(g.union_cells == u);
            CHECK(g.intersection_cells == inter);
            CHECK(g.group_mobr == box);
            CHECK(g.reported_in_union == count_reported(u, scm));
            CHECK(g.agm == doctest::Approx(agm(u, scm)).epsilon(1e-12));
        }
    }
}

TEST_CASE("top_k ordering") {
    std::vector<MergedGroup> groups(5);
    const double scores[] = {0.5, 0.9, 0.5, 0.1, 0.95};
    for (GroupId i = 0; i < 5; ++i) {
        groups[i].group_id = i;
        groups[i].agm = scores[i];
    }
    auto ids = [](const std::vector<MergedGroup>& v) {
        std::vector<GroupId> out;
        for (const auto& g : v) out.push_back(g.group_id);
        return out;
    };
    CHECK(ids(top_k(groups, 3)) == std::vector<GroupId>{4, 1, 0});
    CHECK(ids(top_k(groups, 10)) == std::vector<GroupId>{4, 1, 0, 2, 3});
    CHECK(ids(top_k(groups, 10, 0.5)) == std::vector<GroupId>{4, 1, 0, 2});
    CHECK(top_k({}, 3).empty());
}

TEST_CASE("invalid detection input") {
    const GridSpec grid = unit_grid(10, 10);
    const SignalCoverageMap scm = all_reported(grid);
    const std::vector<TrajectoryGap> dup{circle_gap(1, {5, 5}, 1, 0, 10), circle_gap(1, {6, 5}, 1, 0, 10)};
    DetectionConfig cfg;
    CHECK_THROWS_AS(memo_agd(dup, scm, cfg), DuplicateEntry);
    CHECK_THROWS_AS(stagd(dup, scm, cfg), DuplicateEntry);
    CHECK_THROWS_AS(stagd_drm(dup, scm, cfg), DuplicateEntry);
    cfg.lambda = 1.5;
    CHECK_THROWS_AS(stagd({}, scm, cfg), ConfigError);
    cfg.lambda = 0.2;
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.k = 1;
    CHECK(stagd_drm({}, scm, cfg).groups.empty());
    CHECK(memo_agd({}, scm, cfg).groups.empty());
}

TEST_CASE("gaps entirely outside the grid form zero-score singletons") {
    const GridSpec grid = unit_grid(10, 10);
    const SignalCoverageMap scm = all_reported(grid);
    const std::vector<TrajectoryGap> gaps{circle_gap(1, {-50, -50}, 2, 0, 10), circle_gap(2, {-50, -50}, 2, 1, 10)};
    for (auto* fn : {&memo_agd, &stagd, &stagd_drm}) {
        const DetectionResult r = fn(gaps, scm, DetectionConfig{});
        CHECK(r.groups.size() == 2);
        for (const auto& g : r.groups) CHECK(g.agm == 0.0);
    }
}
