#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace agd {

/// Integer seconds since the UTC epoch.
using TimeStamp = std::int64_t;

inline constexpr double kEarthRadiusM = 6371008.8;
/// Boundary tolerance for region membership, in meters.
inline constexpr double kGeomEpsilon = 1e-6;

struct GeoPoint {
    double lon{0.0};
    double lat{0.0};
};

struct PlanarPoint {
    double x{0.0};
    double y{0.0};
};

struct Fix {
    GeoPoint position;
    TimeStamp t{0};
    std::optional<double> sog;  // m/s
};

double distance(PlanarPoint a, PlanarPoint b);

/**
 * Local equirectangular projection anchored at a reference point.
 *
 * x = R * dlon * cos(lat0), y = R * dlat, angles in radians. Longitude
 * differences are wrapped into [-180, 180) so study areas straddling the
 * antimeridian project contiguously.
 */
class Projection {
public:
    explicit Projection(GeoPoint anchor);

    PlanarPoint project(GeoPoint p) const;
    GeoPoint unproject(PlanarPoint p) const;
    GeoPoint anchor() const { return anchor_; }

private:
    GeoPoint anchor_;
    double cos_lat0_;
};

/// Projection anchored at the centroid of the given points.
Projection make_projection(std::span<const GeoPoint> study_area_points);

/**
 * Planar footprint of a space-time prism between two fixes.
 *
 * The foci are the projected fixes, 2a is the distance reachable at s_max over
 * the gap duration, 2c the distance between the foci.
 */
struct GeoEllipse {
    PlanarPoint focus1;
    PlanarPoint focus2;
    double semi_major_a{0.0};
    double semi_minor_b{0.0};
    double focal_half_dist_c{0.0};
    double orientation_phi{0.0};

    PlanarPoint center() const {
        return {(focus1.x + focus2.x) / 2.0, (focus1.y + focus2.y) / 2.0};
    }
    /// Point on the boundary at parameter angle t (radians).
    PlanarPoint boundary_point(double t) const;
};

GeoEllipse build_geo_ellipse(PlanarPoint p, TimeStamp tp, PlanarPoint q, TimeStamp tq, double s_max);
GeoEllipse build_geo_ellipse(const Fix& p, const Fix& q, double s_max, const Projection& proj);

bool contains(const GeoEllipse& e, PlanarPoint pt);

/// Closed axis-aligned box.
struct Mobr {
    double xmin{0.0};
    double ymin{0.0};
    double xmax{0.0};
    double ymax{0.0};

    bool contains(PlanarPoint p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    bool contains(const Mobr& o) const {
        return o.xmin >= xmin && o.xmax <= xmax && o.ymin >= ymin && o.ymax <= ymax;
    }
    double area() const { return (xmax - xmin) * (ymax - ymin); }
    double margin() const { return (xmax - xmin) + (ymax - ymin); }
    PlanarPoint center() const { return {(xmin + xmax) / 2.0, (ymin + ymax) / 2.0}; }

    friend bool operator==(const Mobr&, const Mobr&) = default;
};

Mobr ellipse_mobr(const GeoEllipse& e);
bool mobr_intersects(const Mobr& a, const Mobr& b);
Mobr mobr_union(const Mobr& a, const Mobr& b);
/// Area of the overlap of two boxes; 0 when disjoint.
double mobr_overlap_area(const Mobr& a, const Mobr& b);

/// Counter-clockwise boundary polygon, closed (first vertex repeated last).
std::vector<PlanarPoint> ellipse_polygon(const GeoEllipse& e, int vertices);

}  // namespace agd
