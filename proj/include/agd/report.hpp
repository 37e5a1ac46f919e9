#pragma once

#include "agd/coverage.hpp"
#include "agd/detect.hpp"
#include "agd/ingest.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agd {

/// 64-bit FNV-1a digest.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Provenance lines written at the top of every artifact (without the leading "# ").
using Provenance = std::vector<std::string>;

void write_group_csv(std::ostream& out, std::string_view method, std::span<const MergedGroup> groups,
                     const Projection& proj, const Provenance& prov);

struct GapScoreRow {
    GapId gap_id{0};
    std::size_t n_cells{0};
    std::size_t n_reported{0};
    double agm{0.0};
    TimeStamp t_start{0};
    TimeStamp t_end{0};
};

void write_gap_csv(std::ostream& out, std::string_view method, std::span<const GapScoreRow> rows,
                   const Provenance& prov);

/// FeatureCollection with one 64-vertex ellipse per member gap and one rectangle per group.
void write_geojson(std::ostream& out, std::span<const MergedGroup> groups, std::span<const TrajectoryGap> gaps,
                   const Projection& proj, const std::vector<std::pair<std::string, std::string>>& provenance);

}  // namespace agd
