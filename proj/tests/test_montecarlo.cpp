#include <cmath>
#include <sstream>

#include "doctest.h"
#include "kpm/montecarlo.hpp"

using namespace kpm;

namespace {

McConfig tiny(GuidanceVariant::Kind kind, int runs) {
    McConfig c;
    c.variant.kind = kind;
    c.filter.particles_per_mode = 40;
    c.n_runs = runs;
    c.base_seed = 2024;
    return c;
}

std::string runs_csv(const McSummary& s) {
    std::ostringstream os;
    write_runs_csv(os, s);
    return os.str();
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("zero-noise truth-centred Regular runs hit when the switch leaves time to detect it") {
    McConfig c = tiny(GuidanceVariant::Kind::Regular, 1);
    c.scenario.sigma_nu = 0.0;
    c.filter.particles_per_mode = 1000;
    int checked = 0;
    for (int r = 0; r < 12; ++r) {
        const RunRecord rec = run_engagement(c, r);
        CHECK_FALSE(rec.flagged);
        CHECK(rec.miss < 25.0);
        if (rec.t_switch <= 1.5) {
            CHECK(rec.miss < 0.25);
            ++checked;
        }
    }
    CHECK(checked >= 5);
}

TEST_CASE("perfect information with Regular guidance reaches hit-to-kill") {
    const ScenarioConfig sc;
    GuidanceVariant v;
    for (double ts : {0.0, 1.3, 2.6}) {
        for (int sign : {1, -1}) {
            TargetProfile p;
            p.t_switch = ts;
            p.initial_sign = sign;
            CHECK(run_perfect_information(sc, v, p) < 0.25);
        }
    }
}

TEST_CASE("identical seeds give identical records") {
    const McConfig c = tiny(GuidanceVariant::Kind::EA, 1);
    const RunRecord a = run_engagement(c, 3), b = run_engagement(c, 3);
    CHECK(a.miss == b.miss);
    CHECK(a.t_switch == b.t_switch);
    CHECK(a.steps == b.steps);
    CHECK(a.kill_draw == b.kill_draw);
    const RunRecord other = run_engagement(c, 4);
    CHECK(other.t_switch != a.t_switch);
}

TEST_CASE("single-run batch") {
    const McSummary s = run_batch(tiny(GuidanceVariant::Kind::Regular, 1));
    REQUIRE(s.records.size() == 1);
    CHECK(s.sskp[0] == s.records[0].kill_prob[0]);
}

TEST_CASE("switch-time laws") {
    McConfig c = tiny(GuidanceVariant::Kind::Regular, 1);
    c.scenario.switch_law = SwitchLaw::Smart;
    c.perfect_information = true;
    for (int r = 0; r < 40; ++r) {
        const RunRecord rec = run_engagement(c, r);
        CHECK(rec.t_switch >= 1.5);
        CHECK(rec.t_switch <= 2.5);
    }
    c.scenario.switch_law = SwitchLaw::Nominal;
    for (int r = 0; r < 40; ++r) {
        const RunRecord rec = run_engagement(c, r);
        CHECK(rec.t_switch >= 0.0);
        CHECK(rec.t_switch <= 3.0);
    }
}

TEST_CASE("batch results do not depend on the worker count") {
    McConfig c = tiny(GuidanceVariant::Kind::KPM, 6);
    c.scoring = {"htk", "small", "medium", "large"};
    const McSummary a = run_batch(c);
    c.parallelism = 8;
    const McSummary b = run_batch(c);
    CHECK(runs_csv(a) == runs_csv(b));
    CHECK(a.sskp == b.sskp);
}

TEST_CASE("summary statistics") {
    McConfig c = tiny(GuidanceVariant::Kind::Regular, 60);
    c.perfect_information = true;
    c.scenario.switch_law = SwitchLaw::Smart;
    c.scoring = {"htk", "large"};
    const McSummary s = run_batch(c);
    CHECK(s.records.size() == 60);
    for (std::size_t w = 0; w < 2; ++w) {
        double mean = 0.0, draws = 0.0;
        for (const auto& r : s.records) {
            mean += r.kill_prob[w];
            draws += r.kill_draw[w];
        }
        CHECK(s.sskp[w] == doctest::Approx(mean / 60));
        CHECK(s.sskp_bernoulli[w] == doctest::Approx(draws / 60));
        CHECK(std::abs(s.sskp[w] - s.sskp_bernoulli[w]) <= 3.0 * std::sqrt(0.25 / 60));
        CHECK(s.sskp[w] >= 0.0);
        CHECK(s.sskp[w] <= 1.0);
    }
    REQUIRE_FALSE(s.cdf.empty());
    for (std::size_t i = 1; i < s.cdf.size(); ++i) {
        CHECK(s.cdf[i].miss > s.cdf[i - 1].miss);
        CHECK(s.cdf[i].cdf > s.cdf[i - 1].cdf);
    }
    CHECK(s.cdf.back().cdf == 1.0);
}

TEST_CASE("sweep produces one cell per variant and warhead") {
    McConfig c = tiny(GuidanceVariant::Kind::Regular, 1);
    c.perfect_information = true;
    const std::vector<std::string> w{"htk", "small", "medium", "large"};
    const auto cells = sweep(c, {GuidanceVariant::Kind::Regular, GuidanceVariant::Kind::EA, GuidanceVariant::Kind::KPM}, w);
    CHECK(cells.size() == 12);
    std::ostringstream os;
    write_sweep_csv(os, cells, w);
    const std::string csv = os.str();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("trace output") {
    McConfig c = tiny(GuidanceVariant::Kind::Regular, 1);
    EngagementTrace tr;
    const RunRecord rec = run_engagement(c, 0, &tr, 50);
    CHECK(static_cast<int>(tr.rows.size()) >= rec.steps);
    CHECK_FALSE(tr.snapshots.empty());
    CHECK(tr.rows.front().t == 0.0);
    CHECK(tr.rows.front().rho == c.scenario.rho0);
}

TEST_CASE("config validation") {
    McConfig c;
    c.n_runs = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = McConfig{};
    c.scoring = {"giant"};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(parse_target("smart") == SwitchLaw::Smart);
    CHECK_THROWS_AS(parse_target("clever"), std::invalid_argument);
}

}
