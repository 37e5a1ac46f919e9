#pragma once

#include "agd/coverage.hpp"
#include "agd/ingest.hpp"
#include "agd/temporal_index.hpp"

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace agd {

using GroupId = std::uint32_t;

/**
 * A maximal set of gaps with its cached cell sets and score.
 *
 * union_cells is always the exact union of the members' rasterizations.
 * intersection_cells is the common part of all members and may become empty
 * once a gap joins through the union bound only.
 */
struct MergedGroup {
    GroupId group_id{0};
    std::vector<GapId> member_gap_ids;  // ascending
    CellSet union_cells;
    CellSet intersection_cells;
    Mobr group_mobr;
    std::int64_t window_left{0};   // column bounds of group_mobr in the grid
    std::int64_t window_right{-1};
    double agm{0.0};
    std::size_t reported_in_union{0};
    TimeStamp t_start{0};
    TimeStamp t_end{0};
};

struct DetectionConfig {
    double lambda{0.2};
    /// Early-termination threshold; values >= 1 never veto a merge.
    double delta{0.15};
    std::size_t k{10};
    double min_agm{0.0};
    /// Recompute every group union from scratch after each merge and count mismatches.
    bool shadow_check{false};
    std::size_t temporal_budget_bytes{kDefaultTemporalBudgetBytes};

    void validate() const;
};

struct DetectionStats {
    std::uint64_t sort_comparisons{0};
    std::uint64_t temporal_comparisons{0};
    std::uint64_t region_tests{0};   // gap-versus-group spatial tests
    std::uint64_t mobr_tests{0};     // box tests inside the spatial index
    std::uint64_t eq3_tests{0};      // AGM-difference checks
    std::uint64_t cells_scored{0};   // cells visited while scoring groups
    std::uint64_t merges_ib{0};
    std::uint64_t merges_ub_only{0};
    std::uint64_t vetoed{0};         // candidate groups skipped by the AGM difference
    std::uint64_t shadow_mismatches{0};
    std::uint64_t deque_order_violations{0};
    /// Per processed gap: region tests performed and groups existing beforehand.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> per_gap_tests;

    std::uint64_t comparison_ops() const { return sort_comparisons + temporal_comparisons + region_tests; }
};

struct DetectionResult {
    std::vector<MergedGroup> groups;  // by group id
    DetectionStats stats;
};

/**
 * Groups ordered by non-increasing AGM, ties by ascending group id.
 */
class AgmDeque {
public:
    void insert(GroupId g, double agm);
    void update(GroupId g, double old_agm, double new_agm);
    std::size_t size() const { return order_.size(); }
    std::vector<std::pair<GroupId, double>> snapshot() const;
    bool is_ordered() const;

private:
    struct Key {
        double agm;
        GroupId g;
        bool operator<(const Key& o) const { return agm > o.agm || (agm == o.agm && g < o.g); }
    };
    std::set<Key> order_;
};

/// True when the AGM difference vetoes a merge.
bool early_terminates(double group_agm, double gap_agm, double delta);

/**
 * Baseline: comparison sort by start time, quadratic plane sweep over the
 * observed list, merge through the cached intersection region, then score each
 * group by scanning the whole grid.
 */
DetectionResult memo_agd(std::span<const TrajectoryGap> gaps, const SignalCoverageMap& scm,
                         const DetectionConfig& cfg);

/**
 * Bucket-sorted temporal candidates, MOBR-tree spatial filter and the maximal
 * union merge criterion; groups are scored by scanning their MOBR window.
 */
DetectionResult stagd(std::span<const TrajectoryGap> gaps, const SignalCoverageMap& scm, const DetectionConfig& cfg);

/**
 * STAGD with incremental union scoring: candidate groups are visited in AGM
 * order, the AGM difference skips or stops the scan, and merged groups update
 * their cached counts with only the cells new to the union.
 */
DetectionResult stagd_drm(std::span<const TrajectoryGap> gaps, const SignalCoverageMap& scm,
                          const DetectionConfig& cfg);

/// Groups by AGM descending, ties by group id, truncated to k.
std::vector<MergedGroup> top_k(std::span<const MergedGroup> groups, std::size_t k, double min_agm = 0.0);

}  // namespace agd
