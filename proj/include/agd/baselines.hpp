#pragma once

#include "agd/coverage.hpp"
#include "agd/ingest.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace agd {

struct TimedPoint {
    PlanarPoint p;
    TimeStamp t{0};
};

/// Reconstructed positions across a gap; the first and last waypoints are the gap's foci.
struct ImputedPath {
    GapId gap_id{0};
    std::vector<PlanarPoint> waypoints;
};

inline constexpr std::size_t kCvmWindow = 5;
inline constexpr std::size_t kDefaultKnn = 5;
inline constexpr TimeStamp kDefaultImputeStep = 60;

ImputedPath linear_path(const TrajectoryGap& gap);

/// Union of the segment rasterizations of consecutive waypoints.
CellSet path_cells(const ImputedPath& path, const GridSpec& grid);

/// Constant velocity extrapolation from the last kCvmWindow points (chronological order).
PlanarPoint cvm_predict(std::span<const TimedPoint> history, TimeStamp t_query);

/// Static 2-d tree over a point pool for k-nearest queries.
class KnnIndex {
public:
    explicit KnnIndex(std::vector<PlanarPoint> points);

    /// Indices of the k nearest points ordered by (distance, index).
    std::vector<std::size_t> nearest(PlanarPoint q, std::size_t k) const;
    std::span<const PlanarPoint> points() const { return points_; }
    std::size_t size() const { return points_.size(); }

private:
    struct Node {
        std::uint32_t point;
        std::int32_t left{-1};
        std::int32_t right{-1};
        std::uint8_t axis{0};
    };
    std::int32_t build(std::vector<std::uint32_t>& idx, std::size_t lo, std::size_t hi, int depth);

    std::vector<PlanarPoint> points_;
    std::vector<Node> nodes_;
    std::int32_t root_{-1};
};

/// Inverse-distance weighted mean of the k nearest pool points.
PlanarPoint knn_impute(PlanarPoint predicted, const KnnIndex& pool, std::size_t k = kDefaultKnn);
/// Exhaustive-scan variant over a plain point list.
PlanarPoint knn_impute(PlanarPoint predicted, std::span<const PlanarPoint> history, std::size_t k = kDefaultKnn);

/**
 * Steps through the gap every step_seconds: predicts with the constant velocity
 * model from the recent history, snaps the prediction to the k-NN weighted mean
 * and feeds the imputed point back into the history.
 */
ImputedPath knn_path(const TrajectoryGap& gap, std::span<const TimedPoint> before, const KnnIndex& pool,
                     TimeStamp step_seconds = kDefaultImputeStep,
                     std::size_t k = kDefaultKnn);

}  // namespace agd
