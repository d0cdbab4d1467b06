#include <cmath>

#include "doctest.h"
#include "tangdim/errors.hpp"
#include "tangdim/schedule.hpp"

using namespace tangdim;

namespace {

// Block rule straight from the defining run inequalities: level j is a
// carpet level when (k-1)(2k-1) < j <= (2k-1)k for some k, a vicsek level
// when k(2k-1) < j <= k(2k+1).
int q_reference(long j) {
    for (long k = 1; (k - 1) * (2 * k - 1) < j; ++k) {
        if ((k - 1) * (2 * k - 1) < j && j <= (2 * k - 1) * k) return 1;
        if (k * (2 * k - 1) < j && j <= k * (2 * k + 1)) return 2;
    }
    return 0;
}

const std::string kCantorText =
    "dim 1\n"
    "step m=3\n"
    "keep 0 2\n"
    "periodic 1\n";

}  // namespace

TEST_CASE("grid step validation") {
    CHECK_THROWS_AS(GridStep(0, 3, {{0}, {2}}), ScheduleParseError);
    CHECK_THROWS_AS(GridStep(1, 1, {{0}}), ScheduleParseError);
    CHECK_THROWS_AS(GridStep(1, 3, {{0}}), ScheduleParseError);           // p >= 2
    CHECK_THROWS_AS(GridStep(1, 3, {{0}, {3}}), ScheduleParseError);      // out of range
    CHECK_THROWS_AS(GridStep(1, 3, {{0}, {0}}), ScheduleParseError);      // duplicate
    CHECK_THROWS_AS(GridStep(2, 3, {{0}, {1}}), ScheduleParseError);      // coord count
    GridStep ok(1, 3, {{2}, {0}});
    CHECK(ok.p() == 2);
    CHECK(ok.kept().front() == Cell{0});  // sorted
    CHECK(ok.contains({2}));
    CHECK_FALSE(ok.contains({1}));
}

TEST_CASE("prefabricated steps match their cell counts") {
    CHECK(cantor_step().p() == 2);
    CHECK(carpet_step().p() == 8);
    CHECK(vicsek_step().p() == 5);
    CHECK(vicsek_step().contains({1, 1}));        // center kept
    CHECK_FALSE(carpet_step().contains({1, 1}));  // center dropped
    CHECK(carpet_step().slope() == doctest::Approx(std::log(8.0) / std::log(3.0)));
}

TEST_CASE("carpet-vicsek block rule matches the run inequalities") {
    CHECK(carpet_vicsek_q(1) == 1);
    CHECK(carpet_vicsek_q(2) == 2);
    CHECK(carpet_vicsek_q(3) == 2);
    CHECK(carpet_vicsek_q(4) == 1);
    CHECK(carpet_vicsek_q(5) == 1);
    for (long j = 1; j <= 5000; ++j) {
        INFO("level " << j);
        REQUIRE(carpet_vicsek_q(j) == q_reference(j));
    }
}

TEST_CASE("named generators") {
    Schedule cv = Schedule::named("carpet-vicsek");
    CHECK(cv.dimension() == 2);
    CHECK(cv.step(1).p() == 8);
    CHECK(cv.step(2).p() == 5);
    CHECK(cv.step(4).p() == 8);

    Schedule alt = Schedule::named("alternating-cv");
    CHECK(alt.step(1).p() == 8);
    CHECK(alt.step(2).p() == 5);
    CHECK(alt.step(3).p() == 8);

    CHECK(Schedule::named("cantor").dimension() == 1);
    CHECK_THROWS_AS(Schedule::named("nonsense"), ScheduleParseError);
}

TEST_CASE("cumulative counts") {
    Schedule cantor = Schedule::named("cantor");
    CHECK(cantor.log_p_cum(3) == doctest::Approx(std::log(8.0)));
    CHECK(cantor.log_m_cum(3) == doctest::Approx(std::log(27.0)));
    CHECK(cantor.p_product(3) == 8);
    CHECK(cantor.m_product(3) == 27);
    CHECK(cantor.lambda(3) == mpq_class(1, 27));

    Schedule cv = Schedule::named("carpet-vicsek");
    CHECK(cv.log_p_cum(1) == doctest::Approx(std::log(8.0)));
    CHECK(cv.log_m_cum(1) == doctest::Approx(std::log(3.0)));
    CHECK(cv.p_product(3) == 200);  // 8 * 5 * 5
    CHECK(cv.m_product(3) == 27);
}

TEST_CASE("level_for_radius picks the deepest level at least r wide") {
    Schedule cantor = Schedule::named("cantor");
    CHECK(cantor.level_for_radius(mpq_class(1, 9)) == 2);
    CHECK(cantor.level_for_radius(mpq_class(1, 2)) == 0);
    CHECK(cantor.level_for_radius(mpq_class(2)) == 0);
    CHECK(cantor.level_for_radius(mpq_class(1, 28)) == 3);
    CHECK_THROWS_AS(cantor.level_for_radius(mpq_class(0)), ConfigError);
}

TEST_CASE("schedule text parsing") {
    Schedule s = Schedule::parse_text(kCantorText);
    CHECK(s.dimension() == 1);
    CHECK(s.step(7).m() == 3);
    CHECK(s.step(7).p() == 2);

    Schedule commented = Schedule::parse_text(
        "# cantor dust\n"
        "dim 1\n\n"
        "step m=3  # thirds\n"
        "keep 0 2\n"
        "periodic 1\n");
    CHECK(commented.step(1) == s.step(1));

    Schedule two_d = Schedule::parse_text(
        "dim 2\n"
        "step m=2\n"
        "keep 0,0 1,1\n"
        "step m=3\n"
        "keep 0,0 2,2 1,1\n"
        "periodic 2\n");
    CHECK(two_d.step(1).p() == 2);
    CHECK(two_d.step(2).p() == 3);
    CHECK(two_d.step(3).p() == 2);  // periodic tail of length 2
    CHECK(two_d.step(4).p() == 3);
}

TEST_CASE("generator tail is indexed from the end of the prefix") {
    Schedule s = Schedule::parse_text(
        "dim 2\n"
        "step m=2\n"
        "keep 0,0 1,1\n"
        "generator carpet-vicsek\n");
    CHECK(s.step(1).m() == 2);
    CHECK(s.step(2).p() == 8);  // carpet-vicsek level 1
    CHECK(s.step(3).p() == 5);

    Schedule pure = Schedule::parse_text("dim 2\ngenerator carpet-vicsek\n");
    CHECK(pure.step(1).p() == 8);
}

TEST_CASE("schedule text rejections") {
    auto reject = [](const std::string& text) {
        CHECK_THROWS_AS(Schedule::parse_text(text), ScheduleParseError);
    };
    reject("step m=3\nkeep 0 2\nperiodic 1\n");            // dim must come first
    reject("dim 1\ndim 1\nstep m=3\nkeep 0 2\nperiodic 1\n");
    reject("dim 1\nstep m=3\nkeep 0 2\n");                 // missing tail
    reject("dim 1\nstep 3\nkeep 0 2\nperiodic 1\n");       // step needs m=
    reject("dim 1\nkeep 0 2\nperiodic 1\n");               // keep outside step
    reject("dim 1\nstep m=3\nkeep 0 2\nperiodic 1\nstep m=3\n");
    reject("dim 1\nstep m=3\nkeep 0 2\nwiggle 3\n");       // unknown directive
    reject("dim 1\nstep m=3\nkeep 0 x\nperiodic 1\n");     // bad coordinate
    reject("dim 1\nstep m=3\nkeep 0,0 2,2\nperiodic 1\n"); // wrong coord count
    reject("dim 1\nstep m=3\nkeep 0\nperiodic 1\n");       // p >= 2
    reject("dim 1\ngenerator carpet-vicsek\n");            // dimension mismatch
    reject("dim 1\nstep m=3\nkeep 0 2\ngenerator bogus\n");
    reject("dim 1\nperiodic 1\n");                         // no steps for the tail
    reject("dim 1 extra\nstep m=3\nkeep 0 2\nperiodic 1\n");
    reject("dim 1\nstep m=3 keep 0 2\nperiodic 1\n");      // keep on the step line
    reject("dim 1\nstep m=3\nkeep 0 2\nperiodic 1 1\n");
}

TEST_CASE("per-step slope floor") {
    Schedule cv = Schedule::named("carpet-vicsek");
    double vic = std::log(5.0) / std::log(3.0);
    CHECK(cv.min_step_slope(1) == doctest::Approx(std::log(8.0) / std::log(3.0)));
    CHECK(cv.min_step_slope(10) == doctest::Approx(vic));
}
