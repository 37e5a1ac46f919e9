#include "agd/ingest.hpp"

#include "agd/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace agd {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::optional<TimeStamp> parse_iso8601(std::string_view text) {
    using namespace std::chrono;
    text = trim(text);
    // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z]
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d) ||
        !parse_int(text.substr(11, 2), h) || !parse_int(text.substr(14, 2), mi) ||
        !parse_int(text.substr(17, 2), s)) {
        return std::nullopt;
    }
    std::string_view rest = text.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        std::size_t k = 1;
        while (k < rest.size() && std::isdigit(static_cast<unsigned char>(rest[k]))) {
            ++k;
        }
        rest.remove_prefix(k);
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00")) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60 || h < 0 || mi < 0 || s < 0) {
        return std::nullopt;
    }
    const auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return static_cast<TimeStamp>(days_since_epoch) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(TimeStamp t) {
    using namespace std::chrono;
    TimeStamp days = t / 86400;
    TimeStamp secs = t % 86400;
    if (secs < 0) {
        secs += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(secs / 3600),
                  static_cast<int>((secs / 60) % 60), static_cast<int>(secs % 60));
    return buf;
}

ParsedAis parse_ais_csv(std::istream& in, const ColumnMap& columns) {
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
            line.erase(0, 3);  // UTF-8 BOM
        }
        if (!line.empty() && line[0] == '#') {
            continue;  // provenance comment
        }
        have_header = true;
        break;
    }
    if (!have_header) {
        throw EmptyInput("AIS input is empty");
    }
    const std::vector<std::string> header = split_csv_line(line);
    auto column_index = [&](const std::string& name) {
        const std::string want = lower(name);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lower(trim(header[i])) == want) {
                return i;
            }
        }
        throw SchemaError("missing required column '" + name + "'");
    };
    const std::size_t i_mmsi = column_index(columns.mmsi);
    const std::size_t i_time = column_index(columns.time);
    const std::size_t i_lat = column_index(columns.lat);
    const std::size_t i_lon = column_index(columns.lon);
    const std::size_t i_sog = column_index(columns.sog);
    const std::size_t needed = std::max({i_mmsi, i_time, i_lat, i_lon, i_sog}) + 1;

    ParsedAis out;
    std::unordered_map<std::string, std::unordered_set<TimeStamp>> seen;
    while (std::getline(in, line)) {
        if (trim(line).empty() || line[0] == '#') {
            continue;
        }
        ++out.stats.rows;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() < needed) {
            ++out.stats.malformed;
            continue;
        }
        const std::string_view mmsi = trim(f[i_mmsi]);
        const auto t = parse_iso8601(f[i_time]);
        const auto lat = parse_double(f[i_lat]);
        const auto lon = parse_double(f[i_lon]);
        if (mmsi.empty() || !t || !lat || !lon || *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0 ||
            *t < 0) {
            ++out.stats.malformed;
            continue;
        }
        Fix fix{GeoPoint{*lon, *lat}, *t, std::nullopt};
        // 102.3 kn is the AIS "not available" marker.
        if (const auto sog_kn = parse_double(f[i_sog]); sog_kn && *sog_kn >= 0.0 && *sog_kn < 102.3) {
            fix.sog = *sog_kn * kKnotsToMps;
        }
        std::string id(mmsi);
        if (!seen[id].insert(*t).second) {
            ++out.stats.duplicates;
            continue;
        }
        out.records.push_back(VesselFix{VesselId{std::move(id)}, fix});
        ++out.stats.parsed;
    }
    return out;
}

std::vector<Trajectory> assemble_trajectories(std::vector<VesselFix> records, std::size_t* dropped) {
    std::map<VesselId, std::vector<Fix>> by_vessel;
    for (VesselFix& r : records) {
        by_vessel[r.vessel].push_back(r.fix);
    }
    std::size_t removed = 0;
    std::vector<Trajectory> out;
    out.reserve(by_vessel.size());
    for (auto& [vessel, fixes] : by_vessel) {
        std::stable_sort(fixes.begin(), fixes.end(), [](const Fix& a, const Fix& b) { return a.t < b.t; });
        auto last = std::unique(fixes.begin(), fixes.end(), [](const Fix& a, const Fix& b) { return a.t == b.t; });
        removed += static_cast<std::size_t>(fixes.end() - last);
        fixes.erase(last, fixes.end());
        out.push_back(Trajectory{vessel, std::move(fixes)});
    }
    if (dropped) {
        *dropped = removed;
    }
    return out;
}

double s_max_for_gap(const Trajectory& traj, std::size_t start_index, const SpeedPolicy& policy) {
    if (policy.kind == SpeedPolicy::Kind::fixed) {
        return policy.value;
    }
    const auto w = static_cast<std::size_t>(std::max(policy.window, 1));
    const std::size_t n = traj.fixes.size();
    const std::size_t lo = start_index + 1 >= w ? start_index + 1 - w : 0;
    const std::size_t hi = std::min(n, start_index + 1 + w);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        if (traj.fixes[i].sog) {
            sum += *traj.fixes[i].sog;
            ++count;
        }
    }
    if (count == 0 || !(sum > 0.0)) {
        return policy.value;
    }
    return sum / static_cast<double>(count);
}

GapExtraction extract_gaps(const Trajectory& traj, const GapRules& rules, const Projection& proj, GapId first_id) {
    GapExtraction out;
    GapId next = first_id;
    for (std::size_t i = 0; i + 1 < traj.fixes.size(); ++i) {
        const Fix& p = traj.fixes[i];
        const Fix& q = traj.fixes[i + 1];
        const TimeStamp dt = q.t - p.t;
        if (dt <= rules.emp_threshold || dt > rules.trip_split) {
            continue;
        }
        const double s_max = s_max_for_gap(traj, i, rules.speed);
        try {
            TrajectoryGap g;
            g.ellipse = build_geo_ellipse(p, q, s_max, proj);
            g.gap_id = next++;
            g.vessel = traj.vessel;
            g.start_fix = p;
            g.end_fix = q;
            g.emp_seconds = dt;
            g.s_max = s_max;
            g.mobr = ellipse_mobr(g.ellipse);
            out.gaps.push_back(std::move(g));
        } catch (const InfeasiblePrism& e) {
            out.rejects.push_back(GapReject{traj.vessel, p, q, s_max, e.what()});
        }
    }
    return out;
}

GapExtraction extract_all_gaps(const std::vector<Trajectory>& trajectories, const GapRules& rules,
                               const Projection& proj) {
    GapExtraction all;
    for (const Trajectory& t : trajectories) {
        GapExtraction one = extract_gaps(t, rules, proj, static_cast<GapId>(all.gaps.size()));
        std::move(one.gaps.begin(), one.gaps.end(), std::back_inserter(all.gaps));
        std::move(one.rejects.begin(), one.rejects.end(), std::back_inserter(all.rejects));
    }
    return all;
}

}  // namespace agd
