#include "agd/report.hpp"

#include "json.hpp"

#include <cstdio>
#include <ostream>
#include <unordered_map>

namespace agd {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace {

void write_provenance(std::ostream& out, const Provenance& prov) {
    for (const std::string& line : prov) {
        out << "# " << line << '\n';
    }
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string coord(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

}  // namespace

void write_group_csv(std::ostream& out, std::string_view method, std::span<const MergedGroup> groups,
                     const Projection& proj, const Provenance& prov) {
    write_provenance(out, prov);
    out << "method,group_id,member_gap_ids,n_cells,n_reported,agm,t_start,t_end,lon_min,lat_min,lon_max,lat_max\n";
    for (const MergedGroup& g : groups) {
        const GeoPoint sw = proj.unproject({g.group_mobr.xmin, g.group_mobr.ymin});
        const GeoPoint ne = proj.unproject({g.group_mobr.xmax, g.group_mobr.ymax});
        out << method << ',' << g.group_id << ',';
        for (std::size_t i = 0; i < g.member_gap_ids.size(); ++i) {
            out << (i ? ";" : "") << g.member_gap_ids[i];
        }
        out << ',' << g.union_cells.size() << ',' << g.reported_in_union << ',' << num(g.agm) << ','
            << format_iso8601(g.t_start) << ',' << format_iso8601(g.t_end) << ',' << coord(sw.lon) << ','
            << coord(sw.lat) << ',' << coord(ne.lon) << ',' << coord(ne.lat) << '\n';
    }
}

void write_gap_csv(std::ostream& out, std::string_view method, std::span<const GapScoreRow> rows,
                   const Provenance& prov) {
    write_provenance(out, prov);
    out << "method,gap_id,n_cells,n_reported,agm,t_start,t_end\n";
    for (const GapScoreRow& r : rows) {
        out << method << ',' << r.gap_id << ',' << r.n_cells << ',' << r.n_reported << ',' << num(r.agm) << ','
            << format_iso8601(r.t_start) << ',' << format_iso8601(r.t_end) << '\n';
    }
}

void write_geojson(std::ostream& out, std::span<const MergedGroup> groups, std::span<const TrajectoryGap> gaps,
                   const Projection& proj, const std::vector<std::pair<std::string, std::string>>& provenance) {
    using nlohmann::ordered_json;
    std::unordered_map<GapId, const TrajectoryGap*> by_id;
    for (const TrajectoryGap& g : gaps) {
        by_id.emplace(g.gap_id, &g);
    }
    auto ring_of = [&](const std::vector<PlanarPoint>& pts) {
        ordered_json ring = ordered_json::array();
        for (const PlanarPoint& p : pts) {
            const GeoPoint g = proj.unproject(p);
            ring.push_back({g.lon, g.lat});
        }
        return ring;
    };
    ordered_json features = ordered_json::array();
    for (const MergedGroup& grp : groups) {
        for (GapId id : grp.member_gap_ids) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                continue;
            }
            const TrajectoryGap& g = *it->second;
            features.push_back({{"type", "Feature"},
                                {"geometry",
                                 {{"type", "Polygon"}, {"coordinates", ordered_json::array({ring_of(ellipse_polygon(g.ellipse, 64))})}}},
                                {"properties",
                                 {{"kind", "gap"},
                                  {"gap_id", g.gap_id},
                                  {"group_id", grp.group_id},
                                  {"vessel", g.vessel.mmsi},
                                  {"t_start", format_iso8601(g.t_start())},
                                  {"t_end", format_iso8601(g.t_end())}}}});
        }
        const Mobr& b = grp.group_mobr;
        const std::vector<PlanarPoint> rect{
            {b.xmin, b.ymin}, {b.xmax, b.ymin}, {b.xmax, b.ymax}, {b.xmin, b.ymax}, {b.xmin, b.ymin}};
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", ordered_json::array({ring_of(rect)})}}},
                            {"properties",
                             {{"kind", "group_mobr"},
                              {"group_id", grp.group_id},
                              {"agm", grp.agm},
                              {"n_members", grp.member_gap_ids.size()}}}});
    }
    ordered_json prov = ordered_json::object();
    for (const auto& [k, v] : provenance) {
        prov[k] = v;
    }
    ordered_json doc{{"type", "FeatureCollection"}, {"provenance", prov}, {"features", features}};
    out << doc.dump(1) << '\n';
}

}  // namespace agd
