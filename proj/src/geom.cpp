#include "agd/geom.hpp"

#include "agd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace agd {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap_degrees(double d) {
    // [-180, 180)
    double w = std::fmod(d + 180.0, 360.0);
    if (w < 0.0) {
        w += 360.0;
    }
    return w - 180.0;
}

}  // namespace

double distance(PlanarPoint a, PlanarPoint b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

Projection::Projection(GeoPoint anchor)
    : anchor_(anchor), cos_lat0_(std::cos(anchor.lat * kDegToRad)) {}

PlanarPoint Projection::project(GeoPoint p) const {
    const double dlon = wrap_degrees(p.lon - anchor_.lon) * kDegToRad;
    const double dlat = (p.lat - anchor_.lat) * kDegToRad;
    return {kEarthRadiusM * dlon * cos_lat0_, kEarthRadiusM * dlat};
}

GeoPoint Projection::unproject(PlanarPoint p) const {
    const double dlat = p.y / kEarthRadiusM / kDegToRad;
    const double dlon = p.x / (kEarthRadiusM * cos_lat0_) / kDegToRad;
    return {wrap_degrees(anchor_.lon + dlon), anchor_.lat + dlat};
}

Projection make_projection(std::span<const GeoPoint> study_area_points) {
    if (study_area_points.empty()) {
        throw EmptyStudyArea("cannot anchor a projection on an empty study area");
    }
    const double lon_ref = study_area_points.front().lon;
    double sum_dlon = 0.0;
    double sum_lat = 0.0;
    for (const GeoPoint& p : study_area_points) {
        sum_dlon += wrap_degrees(p.lon - lon_ref);
        sum_lat += p.lat;
    }
    const auto n = static_cast<double>(study_area_points.size());
    return Projection(GeoPoint{wrap_degrees(lon_ref + sum_dlon / n), sum_lat / n});
}

PlanarPoint GeoEllipse::boundary_point(double t) const {
    const PlanarPoint c = center();
    const double ct = std::cos(t);
    const double st = std::sin(t);
    const double cp = std::cos(orientation_phi);
    const double sp = std::sin(orientation_phi);
    return {c.x + semi_major_a * ct * cp - semi_minor_b * st * sp,
            c.y + semi_major_a * ct * sp + semi_minor_b * st * cp};
}

GeoEllipse build_geo_ellipse(PlanarPoint p, TimeStamp tp, PlanarPoint q, TimeStamp tq, double s_max) {
    if (tq <= tp) {
        throw NonPositiveDuration("gap end time " + std::to_string(tq) + " is not after start time " +
                                  std::to_string(tp));
    }
    if (!(s_max > 0.0)) {
        throw InfeasiblePrism("maximum speed must be positive");
    }
    const double reach = s_max * static_cast<double>(tq - tp);
    const double focal = distance(p, q);
    if (reach < focal) {
        throw InfeasiblePrism("displacement " + std::to_string(focal) + " m exceeds reachable distance " +
                              std::to_string(reach) + " m");
    }
    GeoEllipse e;
    e.focus1 = p;
    e.focus2 = q;
    e.semi_major_a = reach / 2.0;
    e.focal_half_dist_c = focal / 2.0;
    // (a - c)(a + c) keeps b accurate when the prism is nearly degenerate.
    const double a = e.semi_major_a;
    const double c = e.focal_half_dist_c;
    e.semi_minor_b = std::sqrt(std::max(0.0, (a - c) * (a + c)));
    e.orientation_phi = std::atan2(q.y - p.y, q.x - p.x);
    return e;
}

GeoEllipse build_geo_ellipse(const Fix& p, const Fix& q, double s_max, const Projection& proj) {
    return build_geo_ellipse(proj.project(p.position), p.t, proj.project(q.position), q.t, s_max);
}

bool contains(const GeoEllipse& e, PlanarPoint pt) {
    return distance(pt, e.focus1) + distance(pt, e.focus2) <= 2.0 * e.semi_major_a + kGeomEpsilon;
}

Mobr ellipse_mobr(const GeoEllipse& e) {
    const double cp = std::cos(e.orientation_phi);
    const double sp = std::sin(e.orientation_phi);
    const double a2 = e.semi_major_a * e.semi_major_a;
    const double b2 = e.semi_minor_b * e.semi_minor_b;
    const double hx = std::sqrt(a2 * cp * cp + b2 * sp * sp);
    const double hy = std::sqrt(a2 * sp * sp + b2 * cp * cp);
    const PlanarPoint c = e.center();
    return {c.x - hx, c.y - hy, c.x + hx, c.y + hy};
}

bool mobr_intersects(const Mobr& a, const Mobr& b) {
    return a.xmin <= b.xmax && b.xmin <= a.xmax && a.ymin <= b.ymax && b.ymin <= a.ymax;
}

Mobr mobr_union(const Mobr& a, const Mobr& b) {
    return {std::min(a.xmin, b.xmin), std::min(a.ymin, b.ymin), std::max(a.xmax, b.xmax),
            std::max(a.ymax, b.ymax)};
}

double mobr_overlap_area(const Mobr& a, const Mobr& b) {
    const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
    const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

std::vector<PlanarPoint> ellipse_polygon(const GeoEllipse& e, int vertices) {
    std::vector<PlanarPoint> ring;
    ring.reserve(static_cast<std::size_t>(vertices) + 1);
    for (int i = 0; i < vertices; ++i) {
        ring.push_back(e.boundary_point(2.0 * std::numbers::pi * i / vertices));
    }
    ring.push_back(ring.front());
    return ring;
}

}  // namespace agd
