#pragma once

#include "agd/geom.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agd {

inline constexpr double kKnotsToMps = 0.514444;
inline constexpr TimeStamp kDefaultTripSplit = 7 * 24 * 3600;

struct VesselId {
    std::string mmsi;
    friend auto operator<=>(const VesselId&, const VesselId&) = default;
};

struct VesselFix {
    VesselId vessel;
    Fix fix;
};

/// Names of the required CSV columns; defaults follow the MarineCadastre export.
struct ColumnMap {
    std::string mmsi{"MMSI"};
    std::string time{"BaseDateTime"};
    std::string lat{"LAT"};
    std::string lon{"LON"};
    std::string sog{"SOG"};
};

struct ParseStats {
    std::size_t rows{0};
    std::size_t parsed{0};
    std::size_t malformed{0};
    std::size_t duplicates{0};
};

struct ParsedAis {
    std::vector<VesselFix> records;
    ParseStats stats;
};

/// Streams AIS rows; malformed rows and repeated (vessel, time) rows are counted and skipped.
ParsedAis parse_ais_csv(std::istream& in, const ColumnMap& columns = {});

std::optional<TimeStamp> parse_iso8601(std::string_view text);
std::string format_iso8601(TimeStamp t);

struct Trajectory {
    VesselId vessel;
    std::vector<Fix> fixes;
};

/// Groups records per vessel (ascending id), time-sorts each vessel's fixes and
/// drops repeated timestamps keeping the first occurrence.
std::vector<Trajectory> assemble_trajectories(std::vector<VesselFix> records, std::size_t* dropped = nullptr);

struct SpeedPolicy {
    enum class Kind { fixed, avg_sog };
    Kind kind{Kind::fixed};
    double value{15.0};  // m/s; fallback for avg_sog when no SOG is present
    int window{5};

    static SpeedPolicy fixed(double v) { return {Kind::fixed, v, 5}; }
    static SpeedPolicy avg_sog(double fallback, int window = 5) { return {Kind::avg_sog, fallback, window}; }
};

/// Maximum speed for the gap between fixes[start_index] and fixes[start_index + 1].
double s_max_for_gap(const Trajectory& traj, std::size_t start_index, const SpeedPolicy& policy);

using GapId = std::uint32_t;

struct TrajectoryGap {
    GapId gap_id{0};
    VesselId vessel;
    Fix start_fix;
    Fix end_fix;
    TimeStamp emp_seconds{0};
    double s_max{0.0};
    GeoEllipse ellipse;
    Mobr mobr;

    TimeStamp t_start() const { return start_fix.t; }
    TimeStamp t_end() const { return end_fix.t; }
};

struct GapReject {
    VesselId vessel;
    Fix start_fix;
    Fix end_fix;
    double s_max{0.0};
    std::string reason;
};

struct GapExtraction {
    std::vector<TrajectoryGap> gaps;
    std::vector<GapReject> rejects;
};

struct GapRules {
    TimeStamp emp_threshold{1800};
    SpeedPolicy speed{};
    TimeStamp trip_split{kDefaultTripSplit};
};

/// Emits one gap per consecutive fix pair whose silence exceeds the EMP threshold.
/// Silences longer than the trip split separate voyages and are not gaps.
GapExtraction extract_gaps(const Trajectory& traj, const GapRules& rules, const Projection& proj,
                           GapId first_id = 0);
/// extract_gaps over every trajectory, numbering gaps consecutively.
GapExtraction extract_all_gaps(const std::vector<Trajectory>& trajectories, const GapRules& rules,
                               const Projection& proj);

}  // namespace agd
