#include "catch_amalgamated.hpp"

#include "tolpred/errors.hpp"
#include "tolpred/special.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>

using namespace tolpred::special;
using Catch::Approx;

TEST_CASE("log_gamma matches factorials and half-integers") {
    CHECK(log_gamma(1.0) == Approx(0.0).margin(1e-14));
    CHECK(log_gamma(5.0) == Approx(std::log(24.0)).epsilon(1e-14));
    CHECK(log_gamma(0.5) == Approx(0.5 * std::log(M_PI)).epsilon(1e-14));
    for (double x : {0.01, 0.3, 1.7, 12.5, 150.0, 1461.6, 1e5}) {
        CHECK(log_gamma(x) == Approx(boost::math::lgamma(x)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(log_gamma(0.0), tolpred::DomainError);
}

TEST_CASE("digamma and trigamma against boost") {
    for (double x : {0.05, 0.7, 1.0, 4.0, 5.22, 9.99, 37.0, 1e4}) {
        CHECK(digamma(x) == Approx(boost::math::digamma(x)).epsilon(1e-13).margin(1e-14));
        CHECK(trigamma(x) == Approx(boost::math::trigamma(x)).epsilon(1e-13));
    }
}

TEST_CASE("incomplete gamma against boost, including large shapes") {
    const double shapes[] = {0.3, 1.0, 4.0, 20.0, 280.0, 1461.6, 1e4};
    for (double a : shapes) {
        for (double r : {0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 2.0}) {
            const double x = a * r;
            const double p = gamma_p(a, x);
            const double q = gamma_q(a, x);
            CHECK(p + q == Approx(1.0).margin(1e-14));
            CHECK(p == Approx(boost::math::gamma_p(a, x)).epsilon(1e-12).margin(1e-300));
            CHECK(q == Approx(boost::math::gamma_q(a, x)).epsilon(1e-12).margin(1e-300));
        }
    }
    CHECK(gamma_p(1.0, std::log(2.0)) == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("incomplete beta against boost") {
    const double ab[][2] = {{0.5, 0.5}, {2.0, 3.0}, {9.5, 0.5}, {280.0, 20.0}, {2240.0, 40.0}, {0.1, 50.0}};
    for (auto& pr : ab) {
        for (double x : {1e-4, 0.1, 0.5, 0.9, 0.98, 0.9999}) {
            const auto [v, w] = beta_inc_pair(pr[0], pr[1], x, 1.0 - x);
            CHECK(v == Approx(boost::math::ibeta(pr[0], pr[1], x)).epsilon(1e-12).margin(1e-300));
            CHECK(w == Approx(boost::math::ibetac(pr[0], pr[1], x)).epsilon(1e-12).margin(1e-300));
        }
    }
}

TEST_CASE("normal quantile round trips and standard constants") {
    CHECK(normal_quantile(0.975) == Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_quantile(0.5) == 0.0);
    for (double p : {1e-300, 1e-20, 1e-8, 0.001, 0.2, 0.5, 0.7, 0.999, 1.0 - 1e-12}) {
        const double z = normal_quantile(p);
        const double back = p < 0.5 ? normal_cdf(z) : 1.0 - normal_sf(z);
        CHECK(back == Approx(p).epsilon(1e-13));
    }
    CHECK(std::isinf(normal_quantile(0.0)));
    CHECK_THROWS_AS(normal_quantile(1.5), tolpred::DomainError);
}
