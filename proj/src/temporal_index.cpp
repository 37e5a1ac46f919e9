#include "agd/temporal_index.hpp"

#include "agd/errors.hpp"

#include <algorithm>
#include <bit>
#include <limits>

namespace agd {

TemporalIndex TemporalIndex::build(std::span<const TimedInterval> intervals, std::size_t dense_budget_bytes) {
    TemporalIndex idx;
    idx.t0_ = std::numeric_limits<TimeStamp>::max();
    idx.t1_ = std::numeric_limits<TimeStamp>::min();
    for (const TimedInterval& iv : intervals) {
        if (iv.t_end < iv.t_start) {
            throw EmptyIndex("interval " + std::to_string(iv.id) + " ends before it starts");
        }
        idx.t0_ = std::min(idx.t0_, iv.t_start);
        idx.t1_ = std::max(idx.t1_, iv.t_end);
    }
    if (idx.t1_ < idx.t0_) {
        throw EmptyIndex("temporal index over an empty interval set");
    }

    const auto span_seconds = static_cast<std::uint64_t>(idx.t1_ - idx.t0_) + 1;
    // One occupancy bit per second plus a running popcount per 64-second word.
    const std::uint64_t words = (span_seconds + 63) / 64;
    idx.dense_ = words * (sizeof(std::uint64_t) + sizeof(std::uint32_t)) <= dense_budget_bytes;
    idx.ordered_.resize(intervals.size());

    auto order_bucket = [](auto first, auto last) {
        if (last - first > 1) {
            std::sort(first, last, [](const TimedInterval& a, const TimedInterval& b) { return a.id < b.id; });
        }
    };

    if (idx.dense_) {
        std::vector<std::uint64_t> occupied(words, 0);
        for (const TimedInterval& iv : intervals) {
            const auto s = static_cast<std::uint64_t>(iv.t_start - idx.t0_);
            occupied[s >> 6] |= std::uint64_t{1} << (s & 63);
        }
        std::vector<std::uint32_t> word_rank(words + 1, 0);
        for (std::uint64_t w = 0; w < words; ++w) {
            word_rank[w + 1] = word_rank[w] + static_cast<std::uint32_t>(std::popcount(occupied[w]));
        }
        idx.occupied_ = word_rank[words];
        // Bucket of a second = number of occupied seconds before it.
        auto bucket_of = [&](TimeStamp t) {
            const auto s = static_cast<std::uint64_t>(t - idx.t0_);
            const std::uint64_t below = occupied[s >> 6] & ((std::uint64_t{1} << (s & 63)) - 1);
            return word_rank[s >> 6] + static_cast<std::uint32_t>(std::popcount(below));
        };
        // Counting sort; after placement ends[b] is one past the last slot of bucket b.
        std::vector<std::uint32_t> ends(idx.occupied_, 0);
        for (const TimedInterval& iv : intervals) {
            ++ends[bucket_of(iv.t_start)];
        }
        std::uint32_t running = 0;
        for (std::uint32_t& slot : ends) {
            const std::uint32_t n = slot;
            slot = running;
            running += n;
        }
        for (const TimedInterval& iv : intervals) {
            idx.ordered_[ends[bucket_of(iv.t_start)]++] = iv;
        }
        std::uint32_t begin = 0;
        for (const std::uint32_t end : ends) {
            order_bucket(idx.ordered_.begin() + begin, idx.ordered_.begin() + end);
            begin = end;
        }
    } else {
        std::map<TimeStamp, std::vector<TimedInterval>> buckets;
        for (const TimedInterval& iv : intervals) {
            buckets[iv.t_start].push_back(iv);
        }
        idx.occupied_ = buckets.size();
        auto out = idx.ordered_.begin();
        for (auto& [second, bucket] : buckets) {
            order_bucket(bucket.begin(), bucket.end());
            out = std::copy(bucket.begin(), bucket.end(), out);
        }
    }
    return idx;
}

std::size_t CandidatePairs::pair_count() const {
    std::size_t n = 0;
    for (const Entry& e : entries) {
        n += e.earlier.size();
    }
    return n;
}

CandidatePairs temporal_candidates(const TemporalIndex& idx) {
    CandidatePairs out;
    const auto order = idx.scan_order();
    out.entries.reserve(order.size());
    std::vector<TimedInterval> active;
    for (const TimedInterval& cur : order) {
        // Closed-out intervals can never overlap a later start, so they leave the active list for good.
        std::vector<std::uint32_t> earlier;
        std::size_t keep = 0;
        for (const TimedInterval& prev : active) {
            ++out.comparisons;
            if (prev.t_end > cur.t_start) {
                earlier.push_back(prev.id);
                active[keep++] = prev;
            }
        }
        active.resize(keep);
        active.push_back(cur);
        out.entries.push_back({cur.id, std::move(earlier)});
    }
    return out;
}

}  // namespace agd
