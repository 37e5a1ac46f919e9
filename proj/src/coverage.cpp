#include "agd/coverage.hpp"

#include "agd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace agd {

PlanarPoint GridSpec::cell_center(CellIndex c) const {
    return {origin.x + (col_of_index(c) + 0.5) * cell_dx, origin.y + (row_of_index(c) + 0.5) * cell_dy};
}

Mobr GridSpec::cell_box(CellIndex c) const {
    const double x0 = origin.x + col_of_index(c) * cell_dx;
    const double y0 = origin.y + row_of_index(c) * cell_dy;
    return {x0, y0, x0 + cell_dx, y0 + cell_dy};
}

std::optional<CellIndex> GridSpec::cell_of(PlanarPoint p) const {
    const double u = std::floor((p.x - origin.x) / cell_dx);
    const double v = std::floor((p.y - origin.y) / cell_dy);
    if (!(u >= 0.0 && v >= 0.0 && u < ncols && v < nrows)) {
        return std::nullopt;
    }
    return index(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
}

GridSpec::Window GridSpec::window(const Mobr& box) const {
    auto clamp_range = [](double lo, double hi, std::int64_t n, std::int64_t& out_lo, std::int64_t& out_hi) {
        const double flo = std::floor(lo);
        const double fhi = std::floor(hi);
        if (fhi < 0.0 || flo >= static_cast<double>(n)) {
            out_lo = 0;
            out_hi = -1;
            return;
        }
        out_lo = flo < 0.0 ? 0 : static_cast<std::int64_t>(flo);
        out_hi = fhi >= static_cast<double>(n) ? n - 1 : static_cast<std::int64_t>(fhi);
    };
    Window w;
    clamp_range((box.xmin - origin.x) / cell_dx, (box.xmax - origin.x) / cell_dx, ncols, w.col_lo, w.col_hi);
    clamp_range((box.ymin - origin.y) / cell_dy, (box.ymax - origin.y) / cell_dy, nrows, w.row_lo, w.row_hi);
    return w;
}

GridSpec GridSpec::covering(const Mobr& box, double cell_m) {
    if (!(cell_m > 0.0)) {
        throw ConfigError("cell size must be positive");
    }
    GridSpec g;
    g.origin = {box.xmin, box.ymin};
    g.cell_dx = cell_m;
    g.cell_dy = cell_m;
    g.ncols = static_cast<std::uint32_t>(std::floor((box.xmax - box.xmin) / cell_m)) + 1;
    g.nrows = static_cast<std::uint32_t>(std::floor((box.ymax - box.ymin) / cell_m)) + 1;
    return g;
}

void GridSpec::validate() const {
    if (!(cell_dx > 0.0) || !(cell_dy > 0.0)) {
        throw ConfigError("grid cell sizes must be positive");
    }
    if (ncols == 0 || nrows == 0) {
        throw ConfigError("grid must have at least one cell");
    }
    if (cell_count() > std::numeric_limits<CellIndex>::max()) {
        throw ConfigError("grid has more cells than a cell index can address");
    }
}

CellSet CellSet::from_sorted(std::vector<CellIndex> cells) {
    CellSet s;
    s.cells_ = std::move(cells);
    return s;
}

CellSet CellSet::from_unsorted(std::vector<CellIndex> cells) {
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return from_sorted(std::move(cells));
}

bool CellSet::contains(CellIndex c) const {
    return std::binary_search(cells_.begin(), cells_.end(), c);
}

CellSet set_union(const CellSet& a, const CellSet& b) {
    std::vector<CellIndex> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return CellSet::from_sorted(std::move(out));
}

CellSet set_intersection(const CellSet& a, const CellSet& b) {
    std::vector<CellIndex> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return CellSet::from_sorted(std::move(out));
}

CellSet set_difference(const CellSet& a, const CellSet& b) {
    std::vector<CellIndex> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return CellSet::from_sorted(std::move(out));
}

bool intersects(const CellSet& a, const CellSet& b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            return true;
        }
    }
    return false;
}

SignalCoverageMap::SignalCoverageMap(Projection projection, GridSpec grid, std::vector<std::uint32_t> counts,
                                     std::uint32_t theta, std::uint64_t spill)
    : projection_(projection), grid_(grid), counts_(std::move(counts)), theta_(theta), spill_(spill) {
    grid_.validate();
    if (theta_ < 1) {
        throw ConfigError("theta must be at least 1");
    }
    if (counts_.size() != grid_.cell_count()) {
        throw ConfigError("coverage counts do not match grid size");
    }
    reported_.resize(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        reported_[i] = counts_[i] >= theta_ ? 1 : 0;
    }
}

std::size_t SignalCoverageMap::reported_cell_count() const {
    return static_cast<std::size_t>(std::count(reported_.begin(), reported_.end(), std::uint8_t{1}));
}

SignalCoverageMap build_scm(std::span<const Fix> traces, const GridSpec& grid, const Projection& projection,
                            std::uint32_t theta) {
    grid.validate();
    if (theta < 1) {
        throw ConfigError("theta must be at least 1");
    }
    std::vector<std::uint32_t> counts(grid.cell_count(), 0);
    std::uint64_t spill = 0;
    for (const Fix& f : traces) {
        if (auto c = grid.cell_of(projection.project(f.position))) {
            ++counts[*c];
        } else {
            ++spill;
        }
    }
    return SignalCoverageMap(projection, grid, std::move(counts), theta, spill);
}

std::pair<Projection, GridSpec> study_frame(std::span<const Fix> traces, double cell_m) {
    if (traces.empty()) {
        throw EmptyStudyArea("no traces to derive a study area from");
    }
    std::vector<GeoPoint> pts;
    pts.reserve(traces.size());
    for (const Fix& f : traces) {
        pts.push_back(f.position);
    }
    const Projection proj = make_projection(pts);
    Mobr box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const GeoPoint& g : pts) {
        const PlanarPoint p = proj.project(g);
        box = mobr_union(box, Mobr{p.x, p.y, p.x, p.y});
    }
    return {proj, GridSpec::covering(box, cell_m)};
}

CellSet rasterize_gap(const GeoEllipse& e, const GridSpec& grid) {
    const GridSpec::Window w = grid.window(ellipse_mobr(e));
    std::vector<CellIndex> out;
    if (w.empty()) {
        return {};
    }
    for (std::int64_t r = w.row_lo; r <= w.row_hi; ++r) {
        const double cy = grid.origin.y + (static_cast<double>(r) + 0.5) * grid.cell_dy;
        for (std::int64_t c = w.col_lo; c <= w.col_hi; ++c) {
            const double cx = grid.origin.x + (static_cast<double>(c) + 0.5) * grid.cell_dx;
            if (contains(e, {cx, cy})) {
                out.push_back(grid.index(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r)));
            }
        }
    }
    return CellSet::from_sorted(std::move(out));
}

CellSet rasterize_segment(PlanarPoint p, PlanarPoint q, const GridSpec& grid) {
    if (p.x == q.x && p.y == q.y) {
        if (auto c = grid.cell_of(p)) {
            return CellSet::from_sorted({*c});
        }
        return {};
    }
    const double xa = std::min(p.x, q.x);
    const double xb = std::max(p.x, q.x);
    // Closed cells: column c touches [xa, xb] iff x0(c) <= xb and x0(c+1) >= xa.
    const auto col_lo = static_cast<std::int64_t>(std::max(0.0, std::ceil((xa - grid.origin.x) / grid.cell_dx - 1.0)));
    const auto col_hi = static_cast<std::int64_t>(
        std::min(static_cast<double>(grid.ncols) - 1.0, std::floor((xb - grid.origin.x) / grid.cell_dx)));
    std::vector<CellIndex> out;
    for (std::int64_t c = col_lo; c <= col_hi; ++c) {
        const double cx0 = grid.origin.x + static_cast<double>(c) * grid.cell_dx;
        const double xl = std::max(xa, cx0);
        const double xr = std::min(xb, cx0 + grid.cell_dx);
        if (xl > xr) {
            continue;
        }
        double ylo = 0.0;
        double yhi = 0.0;
        if (p.x == q.x) {
            ylo = std::min(p.y, q.y);
            yhi = std::max(p.y, q.y);
        } else {
            const double slope = (q.y - p.y) / (q.x - p.x);
            const double y1 = p.y + (xl - p.x) * slope;
            const double y2 = p.y + (xr - p.x) * slope;
            ylo = std::min(y1, y2);
            yhi = std::max(y1, y2);
        }
        const auto row_lo =
            static_cast<std::int64_t>(std::max(0.0, std::ceil((ylo - grid.origin.y) / grid.cell_dy - 1.0)));
        const auto row_hi = static_cast<std::int64_t>(
            std::min(static_cast<double>(grid.nrows) - 1.0, std::floor((yhi - grid.origin.y) / grid.cell_dy)));
        for (std::int64_t r = row_lo; r <= row_hi; ++r) {
            out.push_back(grid.index(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r)));
        }
    }
    return CellSet::from_unsorted(std::move(out));
}

std::size_t count_reported(const CellSet& cells, const SignalCoverageMap& scm) {
    std::size_t n = 0;
    for (CellIndex c : cells) {
        n += scm.reported(c) ? 1 : 0;
    }
    return n;
}

double agm(const CellSet& gc_int, const SignalCoverageMap& scm) {
    if (gc_int.empty()) {
        return 0.0;
    }
    return static_cast<double>(count_reported(gc_int, scm)) / static_cast<double>(gc_int.size());
}

double degree_overlap(const CellSet& gi_cells, const CellSet& gj_cells, const SignalCoverageMap& scm) {
    if (gi_cells.empty() || gj_cells.empty()) {
        return 0.0;
    }
    std::size_t shared = 0;
    auto i = gi_cells.begin();
    auto j = gj_cells.begin();
    while (i != gi_cells.end() && j != gj_cells.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            shared += scm.reported(*i) ? 1 : 0;
            ++i;
            ++j;
        }
    }
    const auto s = static_cast<double>(shared);
    return std::min(s / static_cast<double>(gi_cells.size()), s / static_cast<double>(gj_cells.size()));
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr const char* kScmMagic = "agd-scm 1";

}  // namespace

void write_scm(std::ostream& out, const SignalCoverageMap& scm, std::span<const std::string> comments) {
    const GridSpec& g = scm.grid();
    const GeoPoint anchor = scm.projection().anchor();
    const GeoPoint origin_geo = scm.projection().unproject(g.origin);
    out << kScmMagic << '\n';
    for (const std::string& c : comments) {
        out << "# " << c << '\n';
    }
    out << "anchor_lon " << fmt_double(anchor.lon) << '\n'
        << "anchor_lat " << fmt_double(anchor.lat) << '\n'
        << "origin_x " << fmt_double(g.origin.x) << '\n'
        << "origin_y " << fmt_double(g.origin.y) << '\n'
        << "origin_lon " << fmt_double(origin_geo.lon) << '\n'
        << "origin_lat " << fmt_double(origin_geo.lat) << '\n'
        << "cell_dx " << fmt_double(g.cell_dx) << '\n'
        << "cell_dy " << fmt_double(g.cell_dy) << '\n'
        << "ncols " << g.ncols << '\n'
        << "nrows " << g.nrows << '\n'
        << "theta " << scm.theta() << '\n'
        << "spill " << scm.spill() << '\n'
        << "counts\n";
    const auto counts = scm.counts();
    for (std::uint32_t r = 0; r < g.nrows; ++r) {
        for (std::uint32_t c = 0; c < g.ncols; ++c) {
            if (c) {
                out << ',';
            }
            out << counts[g.index(c, r)];
        }
        out << '\n';
    }
}

SignalCoverageMap read_scm(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kScmMagic) {
        throw FormatError("not an SCM artifact (missing '" + std::string(kScmMagic) + "' header)");
    }
    std::map<std::string, std::string> kv;
    bool have_counts = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (line == "counts") {
            have_counts = true;
            break;
        }
        const auto sp = line.find(' ');
        if (sp == std::string::npos) {
            throw FormatError("malformed SCM header line: " + line);
        }
        kv[line.substr(0, sp)] = line.substr(sp + 1);
    }
    if (!have_counts) {
        throw FormatError("SCM artifact has no counts section");
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) {
            throw FormatError(std::string("SCM artifact is missing '") + key + "'");
        }
        return it->second;
    };
    auto as_double = [&](const char* key) {
        try {
            return std::stod(need(key));
        } catch (const std::logic_error&) {
            throw FormatError(std::string("SCM field '") + key + "' is not a number");
        }
    };
    auto as_uint = [&](const char* key) {
        try {
            return std::stoull(need(key));
        } catch (const std::logic_error&) {
            throw FormatError(std::string("SCM field '") + key + "' is not an integer");
        }
    };
    GridSpec g;
    g.origin = {as_double("origin_x"), as_double("origin_y")};
    g.cell_dx = as_double("cell_dx");
    g.cell_dy = as_double("cell_dy");
    g.ncols = static_cast<std::uint32_t>(as_uint("ncols"));
    g.nrows = static_cast<std::uint32_t>(as_uint("nrows"));
    g.validate();
    const Projection proj(GeoPoint{as_double("anchor_lon"), as_double("anchor_lat")});
    std::vector<std::uint32_t> counts;
    counts.reserve(g.cell_count());
    for (std::uint32_t r = 0; r < g.nrows; ++r) {
        if (!std::getline(in, line)) {
            throw FormatError("SCM counts truncated at row " + std::to_string(r));
        }
        std::istringstream row(line);
        std::string tok;
        std::uint32_t cols = 0;
        while (std::getline(row, tok, ',')) {
            try {
                counts.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
            } catch (const std::logic_error&) {
                throw FormatError("bad SCM count '" + tok + "' in row " + std::to_string(r));
            }
            ++cols;
        }
        if (cols != g.ncols) {
            throw FormatError("SCM row " + std::to_string(r) + " has " + std::to_string(cols) + " columns, expected " +
                              std::to_string(g.ncols));
        }
    }
    return SignalCoverageMap(proj, g, std::move(counts), static_cast<std::uint32_t>(as_uint("theta")),
                             as_uint("spill"));
}

}  // namespace agd
