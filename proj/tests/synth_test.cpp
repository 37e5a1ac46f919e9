#include "agd/errors.hpp"
#include "agd/synth.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <set>
#include <sstream>

using namespace agd;

namespace {

SynthConfig small_config() {
    SynthConfig c;
    c.n_vessels = 30;
    c.n_points_total = 6000;
    c.n_gaps = 60;
    c.lon_min = -176.0;
    c.lon_max = -174.0;
    c.lat_min = 54.0;
    c.lat_max = 55.0;
    c.t_end = c.t_begin + 30 * 86400;
    c.n_grounds = 2;
    c.ground_km = 20.0;
    return c;
}

}  // namespace

TEST_CASE("small synthetic dataset") {
    const SynthConfig cfg = small_config();
    const SynthData a = generate(cfg);
    CHECK(a.gaps.size() == cfg.n_gaps);
    CHECK(a.trajectories.size() == cfg.n_vessels);
    std::size_t points = 0;
    for (const Trajectory& t : a.trajectories) points += t.fixes.size();
    CHECK(points == cfg.n_points_total);

    std::set<GapId> ids;
    for (const LabeledGap& g : a.gaps) {
        ids.insert(g.gap.gap_id);
        CHECK(g.gap.emp_seconds >= cfg.emp_min);
        CHECK(g.gap.emp_seconds <= cfg.emp_max);
        CHECK(g.label_agm == reference_agm(g.gap.ellipse, a.scm));
        CHECK(g.abnormal == (g.label_agm > cfg.label_threshold));
        CHECK(g.label_agm == agm(oracle::full_grid_cells(g.gap.ellipse, a.scm.grid()), a.scm));
    }
    CHECK(ids.size() == cfg.n_gaps);

    const SynthData b = generate(cfg);
    CHECK(a.ais_csv == b.ais_csv);
    std::ostringstream la, lb;
    write_labels_csv(la, a.gaps);
    write_labels_csv(lb, b.gaps);
    CHECK(la.str() == lb.str());
    CHECK(la.str().rfind("gap_id,label,label_agm\n", 0) == 0);

    SynthConfig other = cfg;
    other.seed += 1;
    CHECK(generate(other).ais_csv != a.ais_csv);
}

TEST_CASE("synthetic config validation") {
    SynthConfig c = small_config();
    c.s_max = c.speed_max;
    CHECK_THROWS_AS(generate(c), ConfigError);
    c = small_config();
    c.emp_min = c.emp_threshold;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_config();
    c.n_vessels = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("accuracy counts agreement over the whole set") {
    const std::vector<GapLabel> truth{{1, true}, {2, false}, {3, true}, {4, false}};
    const std::vector<GapLabel> pred{{4, false}, {3, false}, {2, false}, {1, true}};
    CHECK(accuracy(pred, truth) == 0.75);
    CHECK(accuracy(truth, truth) == 1.0);
    const std::vector<GapLabel> missing{{1, true}, {2, false}, {3, true}};
    CHECK_THROWS_AS(accuracy(missing, truth), LabelSetMismatch);
    const std::vector<GapLabel> dup{{1, true}, {1, false}, {3, true}, {4, false}};
    CHECK_THROWS_AS(accuracy(dup, truth), LabelSetMismatch);
    CHECK_THROWS_AS(accuracy({}, {}), LabelSetMismatch);
}
