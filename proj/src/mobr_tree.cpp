#include "agd/mobr_tree.hpp"

#include "agd/errors.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

namespace agd {
namespace {

double sq_dist(PlanarPoint a, PlanarPoint b) {
    return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

}  // namespace

MobrTree::MobrTree() {
    nodes_.push_back(Node{0, {}});
}

Mobr MobrTree::node_box(std::uint32_t node) const {
    const auto& entries = nodes_[node].entries;
    Mobr b = entries.front().box;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        b = mobr_union(b, entries[i].box);
    }
    return b;
}

void MobrTree::insert(Id id, const Mobr& box) {
    if (!ids_.insert(id).second) {
        throw DuplicateEntry("id " + std::to_string(id) + " is already in the tree");
    }
    std::vector<bool> reinserted;
    std::vector<Pending> pending;
    insert_at_level(Entry{box, id}, 0, reinserted, pending);
    while (!pending.empty()) {
        const Pending p = pending.back();
        pending.pop_back();
        insert_at_level(p.entry, p.level, reinserted, pending);
    }
}

void MobrTree::insert_at_level(const Entry& e, std::uint32_t level, std::vector<bool>& reinserted,
                               std::vector<Pending>& pending) {
    if (auto sibling = insert_rec(root_, e, level, reinserted, pending)) {
        const Entry old_root{node_box(root_), root_};
        nodes_.push_back(Node{nodes_[root_].level + 1, {old_root, *sibling}});
        root_ = static_cast<std::uint32_t>(nodes_.size() - 1);
    }
}

std::optional<MobrTree::Entry> MobrTree::insert_rec(std::uint32_t node, const Entry& e, std::uint32_t level,
                                                    std::vector<bool>& reinserted, std::vector<Pending>& pending) {
    if (nodes_[node].level == level) {
        nodes_[node].entries.push_back(e);
    } else {
        const std::size_t slot = choose_subtree(node, e.box);
        const auto child = static_cast<std::uint32_t>(nodes_[node].entries[slot].ref);
        auto sibling = insert_rec(child, e, level, reinserted, pending);
        // nodes_ may have grown during the recursion; index afresh.
        nodes_[node].entries[slot].box = node_box(child);
        if (sibling) {
            nodes_[node].entries.push_back(*sibling);
        }
    }
    if (nodes_[node].entries.size() > kMaxEntries) {
        return handle_overflow(node, reinserted, pending);
    }
    return std::nullopt;
}

std::size_t MobrTree::choose_subtree(std::uint32_t node, const Mobr& box) const {
    const auto& entries = nodes_[node].entries;
    std::size_t best = 0;
    if (nodes_[node].level == 1) {
        // Children are leaves: least overlap enlargement, then least area enlargement, then least area.
        std::array<double, 3> best_key{std::numeric_limits<double>::infinity(), 0.0, 0.0};
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const Mobr grown = mobr_union(entries[k].box, box);
            double overlap_delta = 0.0;
            for (std::size_t j = 0; j < entries.size(); ++j) {
                if (j != k) {
                    overlap_delta += mobr_overlap_area(grown, entries[j].box) -
                                     mobr_overlap_area(entries[k].box, entries[j].box);
                }
            }
            const std::array<double, 3> key{overlap_delta, grown.area() - entries[k].box.area(),
                                            entries[k].box.area()};
            if (key < best_key) {
                best_key = key;
                best = k;
            }
        }
        return best;
    }
    std::array<double, 2> best_key{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Mobr grown = mobr_union(entries[k].box, box);
        const std::array<double, 2> key{grown.area() - entries[k].box.area(), entries[k].box.area()};
        if (key < best_key) {
            best_key = key;
            best = k;
        }
    }
    return best;
}

std::optional<MobrTree::Entry> MobrTree::handle_overflow(std::uint32_t node, std::vector<bool>& reinserted,
                                                         std::vector<Pending>& pending) {
    const std::uint32_t level = nodes_[node].level;
    if (reinserted.size() <= level) {
        reinserted.resize(level + 1, false);
    }
    if (node != root_ && !reinserted[level]) {
        reinserted[level] = true;
        const PlanarPoint c = node_box(node).center();
        auto& entries = nodes_[node].entries;
        std::stable_sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
            return sq_dist(a.box.center(), c) < sq_dist(b.box.center(), c);
        });
        // Farthest entries are at the back; reinsert the closest of them first.
        for (std::size_t i = 0; i < kReinsertCount; ++i) {
            pending.push_back(Pending{entries.back(), level});
            entries.pop_back();
        }
        std::reverse(pending.end() - static_cast<std::ptrdiff_t>(kReinsertCount), pending.end());
        return std::nullopt;
    }
    return split(node);
}

MobrTree::Entry MobrTree::split(std::uint32_t node) {
    std::vector<Entry> entries = std::move(nodes_[node].entries);
    const std::size_t n = entries.size();
    const std::size_t m = kMinEntries;

    struct Candidate {
        std::vector<Entry> order;
        std::size_t k;
    };

    auto sorted_by = [&](bool x_axis, bool by_upper) {
        std::vector<Entry> v = entries;
        std::stable_sort(v.begin(), v.end(), [&](const Entry& a, const Entry& b) {
            const double ka = x_axis ? (by_upper ? a.box.xmax : a.box.xmin) : (by_upper ? a.box.ymax : a.box.ymin);
            const double kb = x_axis ? (by_upper ? b.box.xmax : b.box.xmin) : (by_upper ? b.box.ymax : b.box.ymin);
            const double sa = x_axis ? (by_upper ? a.box.xmin : a.box.xmax) : (by_upper ? a.box.ymin : a.box.ymax);
            const double sb = x_axis ? (by_upper ? b.box.xmin : b.box.xmax) : (by_upper ? b.box.ymin : b.box.ymax);
            return ka < kb || (ka == kb && sa < sb);
        });
        return v;
    };

    // Prefix/suffix bounding boxes for the k-split distributions of one ordering.
    auto distributions = [&](const std::vector<Entry>& v) {
        std::vector<Mobr> prefix(n), suffix(n);
        prefix[0] = v[0].box;
        for (std::size_t i = 1; i < n; ++i) {
            prefix[i] = mobr_union(prefix[i - 1], v[i].box);
        }
        suffix[n - 1] = v[n - 1].box;
        for (std::size_t i = n - 1; i-- > 0;) {
            suffix[i] = mobr_union(suffix[i + 1], v[i].box);
        }
        return std::pair{prefix, suffix};
    };

    int best_axis = 0;
    double best_margin = std::numeric_limits<double>::infinity();
    std::array<std::array<std::vector<Entry>, 2>, 2> orders;
    for (int axis = 0; axis < 2; ++axis) {
        double margin_sum = 0.0;
        for (int upper = 0; upper < 2; ++upper) {
            orders[axis][upper] = sorted_by(axis == 0, upper == 1);
            const auto [prefix, suffix] = distributions(orders[axis][upper]);
            for (std::size_t k = m; k + m <= n; ++k) {
                margin_sum += prefix[k - 1].margin() + suffix[k].margin();
            }
        }
        if (margin_sum < best_margin) {
            best_margin = margin_sum;
            best_axis = axis;
        }
    }

    const std::vector<Entry>* chosen = nullptr;
    std::size_t chosen_k = m;
    std::array<double, 2> best_key{std::numeric_limits<double>::infinity(), 0.0};
    for (int upper = 0; upper < 2; ++upper) {
        const auto& v = orders[best_axis][upper];
        const auto [prefix, suffix] = distributions(v);
        for (std::size_t k = m; k + m <= n; ++k) {
            const std::array<double, 2> key{mobr_overlap_area(prefix[k - 1], suffix[k]),
                                            prefix[k - 1].area() + suffix[k].area()};
            if (key < best_key) {
                best_key = key;
                chosen = &v;
                chosen_k = k;
            }
        }
    }

    const std::uint32_t level = nodes_[node].level;
    nodes_[node].entries.assign(chosen->begin(), chosen->begin() + static_cast<std::ptrdiff_t>(chosen_k));
    Node sibling{level, std::vector<Entry>(chosen->begin() + static_cast<std::ptrdiff_t>(chosen_k), chosen->end())};
    nodes_.push_back(std::move(sibling));
    const auto sibling_index = static_cast<std::uint32_t>(nodes_.size() - 1);
    return Entry{node_box(sibling_index), sibling_index};
}

std::vector<MobrTree::Id> MobrTree::query(const Mobr& probe, std::uint64_t* box_tests) const {
    std::vector<Id> out;
    std::vector<std::uint32_t> stack{root_};
    std::uint64_t tests = 0;
    while (!stack.empty()) {
        const Node& n = nodes_[stack.back()];
        stack.pop_back();
        for (const Entry& e : n.entries) {
            ++tests;
            if (!mobr_intersects(e.box, probe)) {
                continue;
            }
            if (n.level == 0) {
                out.push_back(e.ref);
            } else {
                stack.push_back(static_cast<std::uint32_t>(e.ref));
            }
        }
    }
    if (box_tests) {
        *box_tests += tests;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string MobrTree::check_node(std::uint32_t node, const Mobr* parent_box, std::size_t& leaf_entries) const {
    const Node& n = nodes_[node];
    const std::size_t count = n.entries.size();
    if (node != root_ && (count < kMinEntries || count > kMaxEntries)) {
        return "node " + std::to_string(node) + " holds " + std::to_string(count) + " entries";
    }
    if (node == root_ && n.level > 0 && count < 2) {
        return "internal root has fewer than two children";
    }
    if (count > kMaxEntries) {
        return "root overflow";
    }
    for (const Entry& e : n.entries) {
        if (parent_box && !parent_box->contains(e.box)) {
            return "entry box escapes its parent in node " + std::to_string(node);
        }
        if (n.level == 0) {
            ++leaf_entries;
            continue;
        }
        const auto child = static_cast<std::uint32_t>(e.ref);
        if (nodes_[child].level + 1 != n.level) {
            return "non-uniform leaf depth below node " + std::to_string(node);
        }
        if (std::string why = check_node(child, &e.box, leaf_entries); !why.empty()) {
            return why;
        }
    }
    return {};
}

std::string MobrTree::check_invariants() const {
    std::size_t leaf_entries = 0;
    if (std::string why = check_node(root_, nullptr, leaf_entries); !why.empty()) {
        return why;
    }
    if (leaf_entries != ids_.size()) {
        return "leaf entry count " + std::to_string(leaf_entries) + " != id count " + std::to_string(ids_.size());
    }
    return {};
}

}  // namespace agd
