#include <cmath>
#include <vector>

#include "doctest.h"
#include "tangdim/errors.hpp"
#include "tangdim/schedule.hpp"
#include "tangdim/selfsimilar.hpp"

using namespace tangdim;

namespace {

mpq_class q(long n, long d) { return mpq_class(n, d); }

}  // namespace

TEST_CASE("equal contraction ratios have the closed-form exponent") {
    double res = 1;
    double d = moran_dimension({q(1, 3), q(1, 3)}, 1e-12, &res);
    CHECK(d == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-10));
    CHECK(std::fabs(res) <= 1e-12);

    CHECK(moran_dimension({q(1, 2), q(1, 2)}, 1e-12) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(moran_dimension({q(1, 4), q(1, 4), q(1, 4), q(1, 4)}, 1e-12) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(moran_dimension({q(1, 3), q(1, 3), q(1, 3), q(1, 3), q(1, 3)}, 1e-12) ==
          doctest::Approx(std::log(5.0) / std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("mixed contraction ratios match an independent closed form") {
    // (1/2)^d + (1/4)^d = 1 means u + u^2 = 1 for u = 2^-d, so
    // u = (sqrt(5)-1)/2 and d = log2((1+sqrt(5))/2).
    double golden = std::log2((1.0 + std::sqrt(5.0)) / 2.0);
    double res = 1;
    double d = moran_dimension({q(1, 2), q(1, 4)}, 1e-12, &res);
    CHECK(d == doctest::Approx(golden).epsilon(1e-10));
    CHECK(d == doctest::Approx(0.6942419136306174).epsilon(1e-10));
    CHECK(std::fabs(res) <= 1e-12);
}

TEST_CASE("adding a branch strictly raises the exponent") {
    double d2 = moran_dimension({q(1, 3), q(1, 3)}, 1e-12);
    double d3 = moran_dimension({q(1, 3), q(1, 3), q(1, 5)}, 1e-12);
    double d4 = moran_dimension({q(1, 3), q(1, 3), q(1, 5), q(1, 7)}, 1e-12);
    CHECK(d2 < d3);
    CHECK(d3 < d4);
}

TEST_CASE("contraction ratios must sit strictly inside the unit interval") {
    CHECK_THROWS_AS(moran_dimension({}, 1e-12), ConfigError);
    CHECK_THROWS_AS(moran_dimension({q(1, 3), q(0, 1)}, 1e-12), ConfigError);
    CHECK_THROWS_AS(moran_dimension({q(1, 3), q(1, 1)}, 1e-12), ConfigError);
    CHECK_THROWS_AS(moran_dimension({q(1, 3), q(3, 2)}, 1e-12), ConfigError);
    CHECK_THROWS_AS(moran_dimension({q(1, 3), q(-1, 3)}, 1e-12), ConfigError);
}

TEST_CASE("repeating-step schedules collapse onto the formula line") {
    struct Case {
        const char* name;
        double expect;
    };
    const Case cases[] = {
        {"cantor", std::log(2.0) / std::log(3.0)},
        {"carpet", std::log(8.0) / std::log(3.0)},
        {"vicsek", std::log(5.0) / std::log(3.0)},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        auto s = Schedule::named(c.name);
        auto rep = selfsimilar_collapse_check(s, 120, 4);
        CHECK(rep.formula_dim == doctest::Approx(c.expect).epsilon(1e-12));
        CHECK(rep.max_deviation <= 0.03);
        CHECK(rep.band_width <= std::log(8.0));
        CHECK(rep.band_levels >= 60);
        CHECK(rep.dims.ordering_holds());
    }
}

TEST_CASE("the collapse check rejects drifting schedules") {
    auto cv = Schedule::named("carpet-vicsek");
    CHECK_THROWS_AS(selfsimilar_collapse_check(cv, 120, 4), ConfigError);
    auto cantor = Schedule::named("cantor");
    CHECK_THROWS_AS(selfsimilar_collapse_check(cantor, 10, 4), ConfigError);
}
