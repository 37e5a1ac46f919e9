#pragma once

#include "agd/coverage.hpp"
#include "agd/ingest.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace agd {

struct SynthConfig {
    double lon_min{-179.9};
    double lon_max{-171.0};
    double lat_min{50.0};
    double lat_max{58.0};
    std::size_t n_vessels{500};
    std::size_t n_points_total{125000};
    std::size_t n_gaps{1500};
    TimeStamp t_begin{1388534400};  // 2014-01-01
    TimeStamp t_end{1451606400};    // 2016-01-01
    TimeStamp emp_min{2400};
    TimeStamp emp_max{5400};
    double speed_min{1.0};
    double speed_max{5.0};
    TimeStamp report_interval{60};
    TimeStamp leg_min{3600};
    TimeStamp leg_max{21600};
    std::size_t n_grounds{3};
    double ground_km{50.0};
    /// Speed bound used for every gap prism; must exceed speed_max.
    double s_max{15.0};
    TimeStamp emp_threshold{1800};
    double cell_m{1000.0};
    std::uint32_t theta{10};
    double label_threshold{0.6};
    std::uint64_t seed{20140101};

    void validate() const;
};

struct LabeledGap {
    TrajectoryGap gap;
    bool abnormal{false};
    double label_agm{0.0};
};

struct SynthData {
    std::string ais_csv;
    std::vector<Trajectory> trajectories;
    SignalCoverageMap scm;
    std::vector<LabeledGap> gaps;
};

/// Minimum number of fixes in each reporting run between silences.
inline constexpr std::size_t kMinRunPoints = 6;

SynthData generate(const SynthConfig& cfg);

/// AGM of the ellipse found by testing every cell center of the grid.
double reference_agm(const GeoEllipse& e, const SignalCoverageMap& scm);

struct GapLabel {
    GapId gap_id{0};
    bool abnormal{false};
};

/// (true positives + true negatives) / total; both sets must cover the same gap ids.
double accuracy(std::span<const GapLabel> predicted, std::span<const GapLabel> truth);

void write_labels_csv(std::ostream& out, std::span<const LabeledGap> gaps);

}  // namespace agd
