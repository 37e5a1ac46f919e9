#include "agd/baselines.hpp"

#include "agd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

namespace agd {

ImputedPath linear_path(const TrajectoryGap& gap) {
    return {gap.gap_id, {gap.ellipse.focus1, gap.ellipse.focus2}};
}

CellSet path_cells(const ImputedPath& path, const GridSpec& grid) {
    if (path.waypoints.size() == 1) {
        return rasterize_segment(path.waypoints[0], path.waypoints[0], grid);
    }
    std::vector<CellIndex> all;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
        const CellSet s = rasterize_segment(path.waypoints[i - 1], path.waypoints[i], grid);
        all.insert(all.end(), s.begin(), s.end());
    }
    return CellSet::from_unsorted(std::move(all));
}

PlanarPoint cvm_predict(std::span<const TimedPoint> history, TimeStamp t_query) {
    if (history.size() < 2) {
        throw InsufficientHistory("constant velocity prediction needs at least two prior fixes");
    }
    const std::size_t n = std::min(history.size(), kCvmWindow);
    const auto w = history.subspan(history.size() - n);
    double vx = 0.0;
    double vy = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double dt = static_cast<double>(w[i].t - w[i - 1].t);
        if (!(dt > 0.0)) {
            throw InsufficientHistory("history timestamps must be strictly increasing");
        }
        vx += (w[i].p.x - w[i - 1].p.x) / dt;
        vy += (w[i].p.y - w[i - 1].p.y) / dt;
    }
    vx /= static_cast<double>(n - 1);
    vy /= static_cast<double>(n - 1);
    const double dt = static_cast<double>(t_query - w.back().t);
    return {w.back().p.x + vx * dt, w.back().p.y + vy * dt};
}

KnnIndex::KnnIndex(std::vector<PlanarPoint> points) : points_(std::move(points)) {
    std::vector<std::uint32_t> idx(points_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = static_cast<std::uint32_t>(i);
    }
    nodes_.reserve(points_.size());
    root_ = build(idx, 0, idx.size(), 0);
}

std::int32_t KnnIndex::build(std::vector<std::uint32_t>& idx, std::size_t lo, std::size_t hi, int depth) {
    if (lo >= hi) {
        return -1;
    }
    const auto axis = static_cast<std::uint8_t>(depth % 2);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::uint32_t a, std::uint32_t b) {
                         const double ka = axis == 0 ? points_[a].x : points_[a].y;
                         const double kb = axis == 0 ? points_[b].x : points_[b].y;
                         return ka < kb || (ka == kb && a < b);
                     });
    const auto self = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{idx[mid], -1, -1, axis});
    const std::int32_t left = build(idx, lo, mid, depth + 1);
    const std::int32_t right = build(idx, mid + 1, hi, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

std::vector<std::size_t> KnnIndex::nearest(PlanarPoint q, std::size_t k) const {
    using Item = std::pair<double, std::uint32_t>;  // squared distance, index; max-heap on (d, index)
    std::priority_queue<Item> heap;
    if (k == 0 || root_ < 0) {
        return {};
    }
    // Depth-first, near side first; the far side is pruned only when strictly farther than the worst kept.
    auto visit = [&](auto&& self, std::int32_t ni) -> void {
        if (ni < 0) {
            return;
        }
        const Node& n = nodes_[ni];
        const PlanarPoint& p = points_[n.point];
        const double d2 = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
        const Item item{d2, n.point};
        if (heap.size() < k) {
            heap.push(item);
        } else if (item < heap.top()) {
            heap.pop();
            heap.push(item);
        }
        const double diff = n.axis == 0 ? q.x - p.x : q.y - p.y;
        const std::int32_t near = diff < 0 ? n.left : n.right;
        const std::int32_t far = diff < 0 ? n.right : n.left;
        self(self, near);
        if (heap.size() < k || diff * diff <= heap.top().first) {
            self(self, far);
        }
    };
    visit(visit, root_);
    std::vector<Item> items;
    while (!heap.empty()) {
        items.push_back(heap.top());
        heap.pop();
    }
    std::reverse(items.begin(), items.end());
    std::vector<std::size_t> out;
    out.reserve(items.size());
    for (const Item& it : items) {
        out.push_back(it.second);
    }
    return out;
}

namespace {

PlanarPoint weighted_mean(PlanarPoint predicted, std::span<const PlanarPoint> pts,
                          std::span<const std::size_t> chosen) {
    double wx = 0.0;
    double wy = 0.0;
    double wsum = 0.0;
    for (std::size_t i : chosen) {
        const double d = distance(predicted, pts[i]);
        if (d == 0.0) {
            return pts[i];
        }
        const double w = 1.0 / std::max(d, kGeomEpsilon);
        wx += w * pts[i].x;
        wy += w * pts[i].y;
        wsum += w;
    }
    return {wx / wsum, wy / wsum};
}

}  // namespace

PlanarPoint knn_impute(PlanarPoint predicted, const KnnIndex& pool, std::size_t k) {
    if (pool.size() == 0) {
        throw InsufficientHistory("k-NN pool is empty");
    }
    const std::vector<std::size_t> chosen = pool.nearest(predicted, k);
    return weighted_mean(predicted, pool.points(), chosen);
}

PlanarPoint knn_impute(PlanarPoint predicted, std::span<const PlanarPoint> history, std::size_t k) {
    if (history.empty()) {
        throw InsufficientHistory("k-NN pool is empty");
    }
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
        const double dx = history[i].x - predicted.x;
        const double dy = history[i].y - predicted.y;
        d.emplace_back(dx * dx + dy * dy, i);
    }
    const std::size_t n = std::min(k, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n), d.end());
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < n; ++i) {
        chosen.push_back(d[i].second);
    }
    return weighted_mean(predicted, history, chosen);
}

ImputedPath knn_path(const TrajectoryGap& gap, std::span<const TimedPoint> before, const KnnIndex& pool,
                     TimeStamp step_seconds, std::size_t k) {
    if (step_seconds <= 0) {
        throw ConfigError("imputation step must be positive");
    }
    ImputedPath path{gap.gap_id, {gap.ellipse.focus1}};
    std::vector<TimedPoint> history(before.begin(), before.end());
    if (history.empty() || history.back().t != gap.t_start()) {
        history.push_back({gap.ellipse.focus1, gap.t_start()});
    }
    for (TimeStamp t = gap.t_start() + step_seconds; t < gap.t_end(); t += step_seconds) {
        const PlanarPoint predicted = cvm_predict(history, t);
        const PlanarPoint imputed = knn_impute(predicted, pool, k);
        path.waypoints.push_back(imputed);
        history.push_back({imputed, t});
        if (history.size() > kCvmWindow) {
            history.erase(history.begin());
        }
    }
    path.waypoints.push_back(gap.ellipse.focus2);
    return path;
}

}  // namespace agd
