#pragma once

#include "agd/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace agd {

/**
 * R*-style hierarchical index over minimum orthogonal bounding rectangles.
 *
 * Insertion descends by least overlap enlargement just above the leaves and
 * least area enlargement elsewhere. On the first overflow of a level during an
 * insertion the 30% of entries farthest from the node center are reinserted;
 * later overflows split along the axis with the smallest margin sum.
 */
class MobrTree {
public:
    using Id = std::uint64_t;

    static constexpr std::size_t kMaxEntries = 16;
    static constexpr std::size_t kMinEntries = 6;
    static constexpr std::size_t kReinsertCount = 5;

    MobrTree();

    void insert(Id id, const Mobr& box);
    /// Ids whose stored box intersects the probe (closed boxes), ascending.
    /// box_tests, when given, is incremented once per entry box examined.
    std::vector<Id> query(const Mobr& probe, std::uint64_t* box_tests = nullptr) const;

    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    /// Number of levels; 1 for a tree that is a single leaf.
    std::size_t height() const { return nodes_[root_].level + 1; }

    /// Empty when every structural invariant holds, otherwise the first violation found.
    std::string check_invariants() const;

private:
    struct Entry {
        Mobr box;
        std::uint64_t ref;  // child node index, or the stored id in a leaf
    };
    struct Node {
        std::uint32_t level;  // 0 for leaves
        std::vector<Entry> entries;
    };
    struct Pending {
        Entry entry;
        std::uint32_t level;
    };

    void insert_at_level(const Entry& e, std::uint32_t level, std::vector<bool>& reinserted,
                         std::vector<Pending>& pending);
    std::optional<Entry> insert_rec(std::uint32_t node, const Entry& e, std::uint32_t level,
                                    std::vector<bool>& reinserted, std::vector<Pending>& pending);
    std::size_t choose_subtree(std::uint32_t node, const Mobr& box) const;
    std::optional<Entry> handle_overflow(std::uint32_t node, std::vector<bool>& reinserted,
                                         std::vector<Pending>& pending);
    Entry split(std::uint32_t node);
    Mobr node_box(std::uint32_t node) const;
    std::string check_node(std::uint32_t node, const Mobr* parent_box, std::size_t& leaf_entries) const;

    std::vector<Node> nodes_;
    std::uint32_t root_{0};
    std::unordered_set<Id> ids_;
};

}  // namespace agd
