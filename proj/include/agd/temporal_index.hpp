#pragma once

#include "agd/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace agd {

struct TimedInterval {
    std::uint32_t id{0};
    TimeStamp t_start{0};
    TimeStamp t_end{0};
};

inline constexpr std::size_t kDefaultTemporalBudgetBytes = std::size_t{2} << 30;

/**
 * One-second bucket array over [t0, t1] keyed by interval start time.
 *
 * Reading the buckets in order yields the intervals sorted by start time
 * without pairwise comparisons; ties within a second are ordered by id. The
 * array is held as an occupancy bit per second with per-word ranks, so the
 * slots of empty seconds cost one bit each. When even that exceeds the memory
 * budget a sorted map of occupied seconds is used instead, with the same
 * observable order.
 */
class TemporalIndex {
public:
    static TemporalIndex build(std::span<const TimedInterval> intervals,
                               std::size_t dense_budget_bytes = kDefaultTemporalBudgetBytes);

    TimeStamp t0() const { return t0_; }
    TimeStamp t1() const { return t1_; }
    bool is_dense() const { return dense_; }
    std::size_t occupied_buckets() const { return occupied_; }
    /// Intervals in bucket-scan order.
    std::span<const TimedInterval> scan_order() const { return ordered_; }

private:
    TimeStamp t0_{0};
    TimeStamp t1_{0};
    bool dense_{true};
    std::size_t occupied_{0};
    std::vector<TimedInterval> ordered_;
};

/// For each interval in scan order, the earlier intervals that overlap it in time.
struct CandidatePairs {
    struct Entry {
        std::uint32_t id;
        std::vector<std::uint32_t> earlier;  // in scan order
    };
    std::vector<Entry> entries;
    std::uint64_t comparisons{0};

    std::size_t pair_count() const;
};

/// Plane sweep over the scan order with an active list of still-open intervals.
/// An earlier interval j is a candidate of i iff t_end(j) > t_start(i).
CandidatePairs temporal_candidates(const TemporalIndex& idx);

}  // namespace agd
