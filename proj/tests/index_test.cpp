#include "agd/errors.hpp"
#include "agd/mobr_tree.hpp"
#include "agd/temporal_index.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <algorithm>
#include <random>

using namespace agd;

namespace {

std::vector<TimedInterval> random_intervals(std::mt19937_64& rng, std::size_t n, TimeStamp span, TimeStamp max_len) {
    std::uniform_int_distribution<TimeStamp> start(0, span);
    std::uniform_int_distribution<TimeStamp> len(0, max_len);
    std::vector<TimedInterval> out;
    for (std::size_t i = 0; i < n; ++i) {
        const TimeStamp s = start(rng) + 1000000;
        out.push_back({static_cast<std::uint32_t>((i * 37) % 100003), s, s + len(rng)});
    }
    return out;
}

std::vector<TimedInterval> sorted_by_start(std::vector<TimedInterval> v) {
    std::sort(v.begin(), v.end(), [](const TimedInterval& a, const TimedInterval& b) {
        return a.t_start < b.t_start || (a.t_start == b.t_start && a.id < b.id);
    });
    return v;
}

bool same_order(std::span<const TimedInterval> a, const std::vector<TimedInterval>& b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const TimedInterval& x, const TimedInterval& y) {
        return x.id == y.id && x.t_start == y.t_start && x.t_end == y.t_end;
    });
}

}  // namespace

TEST_CASE("bucket scan follows the start order of the worked example") {
    // Start minutes: C 1, B 2, A 3, D 4, E 5, F 6, H 7, G 8.
    enum : std::uint32_t { A, B, C, D, E, F, G, H };
    const std::vector<TimedInterval> iv{{A, 180, 900}, {B, 120, 900}, {C, 60, 900},  {D, 240, 900},
                                        {E, 300, 900}, {F, 360, 900}, {G, 480, 900}, {H, 420, 900}};
    const TemporalIndex idx = TemporalIndex::build(iv);
    std::vector<std::uint32_t> got;
    for (const TimedInterval& t : idx.scan_order()) {
        got.push_back(t.id);
    }
    CHECK(got == std::vector<std::uint32_t>{C, B, A, D, E, F, H, G});
    CHECK(idx.t0() == 60);
    CHECK(idx.t1() == 900);
    CHECK(idx.occupied_buckets() == 8);
}

TEST_CASE("bucket scan equals a comparison sort") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const auto iv = random_intervals(rng, 1000, 5000, 300);
        const TemporalIndex dense = TemporalIndex::build(iv);
        CHECK(dense.is_dense());
        CHECK(same_order(dense.scan_order(), sorted_by_start(iv)));
        const TemporalIndex sparse = TemporalIndex::build(iv, 0);
        CHECK_FALSE(sparse.is_dense());
        CHECK(same_order(sparse.scan_order(), sorted_by_start(iv)));
        CHECK(sparse.occupied_buckets() == dense.occupied_buckets());
    }
}

TEST_CASE("degenerate index inputs") {
    CHECK_THROWS_AS(TemporalIndex::build({}), EmptyIndex);
    const std::vector<TimedInterval> backwards{{1, 10, 5}};
    CHECK_THROWS_AS(TemporalIndex::build(backwards), EmptyIndex);
    const std::vector<TimedInterval> one{{4, -50, -50}};
    const TemporalIndex idx = TemporalIndex::build(one);
    CHECK(idx.scan_order().size() == 1);
    CHECK(temporal_candidates(idx).pair_count() == 0);
}

TEST_CASE("temporal candidates equal the pairwise overlap oracle") {
    std::mt19937_64 rng(202);
    for (int trial = 0; trial < 10; ++trial) {
        const auto iv = random_intervals(rng, 500, 20000, trial % 2 ? 2000 : 200);
        const CandidatePairs cp = temporal_candidates(TemporalIndex::build(iv));
        std::set<std::pair<std::uint32_t, std::uint32_t>> got;
        for (const auto& e : cp.entries) {
            for (std::uint32_t j : e.earlier) {
                got.insert({j, e.id});
            }
        }
        CHECK(got == oracle::overlap_pairs(iv));
        CHECK(cp.pair_count() == got.size());
        CHECK(cp.comparisons <= 500ull * 499 / 2);
    }
}

TEST_CASE("touching intervals are not candidates") {
    const std::vector<TimedInterval> iv{{1, 0, 100}, {2, 100, 200}, {3, 99, 150}};
    const CandidatePairs cp = temporal_candidates(TemporalIndex::build(iv));
    std::set<std::pair<std::uint32_t, std::uint32_t>> got;
    for (const auto& e : cp.entries) {
        for (std::uint32_t j : e.earlier) got.insert({j, e.id});
    }
    CHECK(got == std::set<std::pair<std::uint32_t, std::uint32_t>>{{1, 3}, {3, 2}});
}

TEST_CASE("tree query equals a linear scan") {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> pos(0.0, 10000.0);
    std::uniform_real_distribution<double> size(0.0, 300.0);
    auto box = [&](double scale) {
        const double x = pos(rng), y = pos(rng);
        return Mobr{x, y, x + size(rng) * scale, y + size(rng) * scale};
    };
    std::vector<Mobr> boxes;
    MobrTree tree;
    for (std::size_t i = 0; i < 10000; ++i) {
        boxes.push_back(box(1.0));
        tree.insert(i, boxes.back());
    }
    CHECK(tree.size() == 10000);
    CHECK(tree.check_invariants().empty());
    CHECK(tree.height() > 2);
    std::uint64_t tests = 0;
    for (int p = 0; p < 100; ++p) {
        const Mobr probe = box(p % 10 == 0 ? 10.0 : 1.0);
        CHECK(tree.query(probe, &tests) == oracle::linear_scan(boxes, probe));
    }
    CHECK(tests < 100ull * 10000);
    CHECK(tree.query(Mobr{-10, -10, -5, -5}).empty());
}

TEST_CASE("tree edge cases") {
    MobrTree tree;
    CHECK(tree.empty());
    CHECK(tree.query(Mobr{0, 0, 1, 1}).empty());
    CHECK(tree.check_invariants().empty());
    tree.insert(7, Mobr{0, 0, 1, 1});
    CHECK_THROWS_AS(tree.insert(7, Mobr{5, 5, 6, 6}), DuplicateEntry);
    CHECK(tree.query(Mobr{1, 1, 2, 2}) == std::vector<MobrTree::Id>{7});  // closed boxes touch
    SUBCASE("many identical boxes") {
        for (MobrTree::Id i = 100; i < 400; ++i) {
            tree.insert(i, Mobr{3, 3, 3, 3});
        }
        CHECK(tree.check_invariants().empty());
        CHECK(tree.query(Mobr{3, 3, 3, 3}).size() == 300);
    }
    SUBCASE("point boxes on a line") {
        for (MobrTree::Id i = 100; i < 1100; ++i) {
            tree.insert(i, Mobr{static_cast<double>(i), 0, static_cast<double>(i), 0});
        }
        CHECK(tree.check_invariants().empty());
        CHECK(tree.query(Mobr{200, -1, 209.5, 1}).size() == 10);
    }
}
