#pragma once

#include "agd/geom.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace agd {

using CellIndex = std::uint32_t;

/// Regular grid in projected meters; cells are indexed row-major from the lower-left origin.
struct GridSpec {
    PlanarPoint origin;
    double cell_dx{1000.0};
    double cell_dy{1000.0};
    std::uint32_t ncols{1};
    std::uint32_t nrows{1};

    std::size_t cell_count() const { return static_cast<std::size_t>(ncols) * nrows; }
    CellIndex index(std::uint32_t col, std::uint32_t row) const { return row * ncols + col; }
    std::uint32_t col_of_index(CellIndex c) const { return c % ncols; }
    std::uint32_t row_of_index(CellIndex c) const { return c / ncols; }
    PlanarPoint cell_center(CellIndex c) const;
    Mobr cell_box(CellIndex c) const;
    std::optional<CellIndex> cell_of(PlanarPoint p) const;

    /// Column/row ranges of the cells whose closed rectangles overlap the box,
    /// clamped to the grid. Empty when the box lies outside the grid.
    struct Window {
        std::int64_t col_lo{0}, col_hi{-1}, row_lo{0}, row_hi{-1};
        bool empty() const { return col_lo > col_hi || row_lo > row_hi; }
    };
    Window window(const Mobr& box) const;

    /// Grid whose cells of size cell_m evenly cover the box.
    static GridSpec covering(const Mobr& box, double cell_m);

    void validate() const;
};

/// Sorted, duplicate-free list of cell indices.
class CellSet {
public:
    CellSet() = default;
    static CellSet from_sorted(std::vector<CellIndex> cells);
    static CellSet from_unsorted(std::vector<CellIndex> cells);

    std::span<const CellIndex> cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }
    bool contains(CellIndex c) const;
    auto begin() const { return cells_.begin(); }
    auto end() const { return cells_.end(); }

    friend bool operator==(const CellSet&, const CellSet&) = default;

private:
    std::vector<CellIndex> cells_;
};

CellSet set_union(const CellSet& a, const CellSet& b);
CellSet set_intersection(const CellSet& a, const CellSet& b);
CellSet set_difference(const CellSet& a, const CellSet& b);
bool intersects(const CellSet& a, const CellSet& b);

/**
 * Historic trace counts per grid cell with the reported/not-reported split
 * at threshold theta. Immutable once built.
 */
class SignalCoverageMap {
public:
    SignalCoverageMap(Projection projection, GridSpec grid, std::vector<std::uint32_t> counts,
                      std::uint32_t theta, std::uint64_t spill);

    const Projection& projection() const { return projection_; }
    const GridSpec& grid() const { return grid_; }
    std::uint32_t theta() const { return theta_; }
    /// Fixes that fell outside the grid while building.
    std::uint64_t spill() const { return spill_; }
    std::span<const std::uint32_t> counts() const { return counts_; }
    std::uint32_t count(CellIndex c) const { return counts_[c]; }
    bool reported(CellIndex c) const { return reported_[c] != 0; }
    std::size_t reported_cell_count() const;

private:
    Projection projection_;
    GridSpec grid_;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint8_t> reported_;
    std::uint32_t theta_;
    std::uint64_t spill_;
};

SignalCoverageMap build_scm(std::span<const Fix> traces, const GridSpec& grid, const Projection& projection,
                            std::uint32_t theta);

/// Projection and 1-cell-resolution grid derived from the traces' bounding box.
std::pair<Projection, GridSpec> study_frame(std::span<const Fix> traces, double cell_m);

/// Cells whose centers lie inside the ellipse.
CellSet rasterize_gap(const GeoEllipse& e, const GridSpec& grid);
/// Cells whose closed rectangles touch the segment pq.
CellSet rasterize_segment(PlanarPoint p, PlanarPoint q, const GridSpec& grid);

std::size_t count_reported(const CellSet& cells, const SignalCoverageMap& scm);
/// Abnormal gap measure: reported fraction of the cell set, 0 for an empty set.
double agm(const CellSet& gc_int, const SignalCoverageMap& scm);
/// Degree of overlap between two cell sets against the coverage map.
double degree_overlap(const CellSet& gi_cells, const CellSet& gj_cells, const SignalCoverageMap& scm);

/// Plain-text SCM artifact; see docs/formats.md.
void write_scm(std::ostream& out, const SignalCoverageMap& scm, std::span<const std::string> comments = {});
SignalCoverageMap read_scm(std::istream& in);

}  // namespace agd
