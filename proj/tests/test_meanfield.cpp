#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dsm/meanfield.hpp"

using namespace dsm;

namespace {

ModelParams with_u(double u, double lambda = 0.0) {
    ModelParams p;
    p.stark_u = u;
    p.lambda = lambda;
    return p;
}

}  // namespace

TEST_CASE("zero-temperature critical coupling closed forms") {
    CHECK(critical_coupling(with_u(0.0)).lambda_c == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(critical_coupling(with_u(1.5)).lambda_c == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(critical_coupling(with_u(-1.5)).lambda_c ==
          doctest::Approx(std::sqrt(1.75) / 2.0).epsilon(1e-12));

    // lambda_c -> 0 as U -> 2 omega, undefined beyond
    CHECK(critical_coupling(with_u(2.0)).lambda_c == doctest::Approx(0.0));
    CHECK(critical_coupling(with_u(2.0)).defined);
    CHECK_FALSE(critical_coupling(with_u(2.5)).defined);
}

TEST_CASE("finite-temperature critical coupling") {
    for (double u : {-0.9, 0.0, 0.9}) {
        const double got = critical_coupling_thermal(with_u(u), 0.1).lambda_c;
        const double expect = (u < -0.1) ? 0.60 : (u > 0.1 ? 0.37 : 0.50);
        CHECK(std::round(got * 100.0) / 100.0 == doctest::Approx(expect).epsilon(1e-12));
    }

    // T -> 0 continuity with the zero-temperature form
    for (double u : {-1.0, 0.0, 1.0}) {
        for (double lambda : {0.0, 0.3}) {
            const auto p = with_u(u, lambda);
            CHECK(critical_coupling_thermal(p, 1e-8).lambda_c ==
                  doctest::Approx(critical_coupling(p).lambda_c).epsilon(1e-10));
            CHECK(critical_coupling_thermal(p, 0.0).lambda_c ==
                  doctest::Approx(critical_coupling(p).lambda_c).epsilon(1e-15));
        }
    }

    // strictly increasing in T at fixed U
    for (double u : {-1.0, 0.0, 1.0}) {
        double prev = critical_coupling_thermal(with_u(u), 0.05).lambda_c;
        for (double t : {0.1, 0.3, 0.7, 1.5}) {
            const double cur = critical_coupling_thermal(with_u(u), t).lambda_c;
            CHECK(cur > prev);
            prev = cur;
        }
    }

    CHECK_THROWS_AS(critical_coupling_thermal(with_u(0.0), -0.1), std::invalid_argument);
}

TEST_CASE("vacuum energy density") {
    for (double u : {-1.0, 0.0, 1.0}) {
        for (double lambda : {0.1, 0.5, 0.9}) {
            const auto p = with_u(u, lambda);
            CHECK(ground_energy_density(0.0, p) == doctest::Approx(-0.5 * p.delta).epsilon(1e-14));

            // derivative at phi = 0: Delta - 4 lambda^2 / (omega - U/2)
            // second-order one-sided difference (phi < 0 is outside the domain)
            const double h = 1e-6;
            const double fd = (-3.0 * ground_energy_density(0.0, p) +
                               4.0 * ground_energy_density(h, p) -
                               ground_energy_density(2.0 * h, p)) /
                              (2.0 * h);
            CHECK(fd == doctest::Approx(p.delta - 4.0 * lambda * lambda / (p.omega - 0.5 * u))
                            .scale(1.0)
                            .epsilon(1e-8));
        }
    }

    // derivative at phi=0 vanishes exactly at the critical coupling
    for (double u : {-1.0, 0.0, 1.0}) {
        auto p = with_u(u);
        p.lambda = critical_coupling(p).lambda_c;
        const double h = 1e-7;
        const double fd = (ground_energy_density(h, p) - ground_energy_density(0.0, p)) / h;
        CHECK(std::abs(fd) < 1e-6);
    }

    // U=0, lambda > lambda_c: minimizer phi* = (1 - omega Delta / (4 lambda^2)) / 2
    {
        auto p = with_u(0.0, 0.8);
        const double expect = 0.5 * (1.0 - p.omega * p.delta / (4.0 * p.lambda * p.lambda));
        double best_phi = 0.0, best = 1e300;
        for (int i = 0; i <= 100000; ++i) {
            const double phi = i / 100000.0;
            const double v = ground_energy_density(phi, p);
            if (v < best) {
                best = v;
                best_phi = phi;
            }
        }
        CHECK(best_phi == doctest::Approx(expect).epsilon(1e-4));
    }

    CHECK_THROWS_AS(ground_energy_density(-0.1, with_u(0.0)), std::invalid_argument);
    CHECK_THROWS_AS(ground_energy_density(1.1, with_u(0.0)), std::invalid_argument);
    // denominator omega + U (phi - 1/2) = 0 at phi = 0, U = 2
    CHECK_THROWS_AS(ground_energy_density(0.0, with_u(2.0)), UndefinedQuantityError);
}

TEST_CASE("free energy density") {
    const auto p = with_u(0.5, 0.4);
    const double t = 0.3;
    CHECK(free_energy_density(0.0, p, t) ==
          doctest::Approx(-t * std::log(2.0 * std::cosh(0.5 * p.delta / t))).epsilon(1e-13));
    for (double a : {0.2, 0.7, 1.3}) {
        CHECK(free_energy_density(a, p, t) ==
              doctest::Approx(free_energy_density(-a, p, t)).epsilon(1e-15));
    }

    // curvature at alpha = 0 flips sign exactly across the thermal critical coupling
    for (double u : {-1.0, 0.0, 1.0}) {
        const double lc = critical_coupling_thermal(with_u(u), t).lambda_c;
        for (double off : {-0.05, 0.05}) {
            auto q = with_u(u, lc + off);
            const double h = 1e-4;
            const double curv = free_energy_density(h, q, t) - 2.0 * free_energy_density(0.0, q, t) +
                                free_energy_density(-h, q, t);
            if (off < 0.0) {
                CHECK(curv > 0.0);
            } else {
                CHECK(curv < 0.0);
            }
        }
    }
}

TEST_CASE("order parameter locates the transition on a grid") {
    for (double u : {-1.0, 0.0, 1.0}) {
        for (int it = 1; it <= 20; ++it) {
            const double t = 0.05 + (2.0 - 0.05) * (it - 1) / 19.0;
            const double lc = critical_coupling_thermal(with_u(u), t).lambda_c;
            for (int il = 1; il <= 20; ++il) {
                const double lambda = 0.05 + (1.4 - 0.05) * (il - 1) / 19.0;
                const auto r = order_parameter(with_u(u, lambda), t);
                const double cell = (1.4 - 0.05) / 19.0;
                if (lambda > lc + cell) {
                    CHECK(r.alpha > 0.0);
                } else if (lambda < lc - cell) {
                    CHECK(r.alpha == 0.0);
                }
                CHECK(r.free_energy <= free_energy_density(0.0, with_u(u, lambda), t) + 1e-12);
            }
        }
    }
}

TEST_CASE("order parameter magnitude in the deep superradiant phase") {
    // U = 0, low T: alpha* -> lambda/omega * sqrt(1 - (lambda_c/lambda)^4) per the
    // standard Dicke mean-field solution; check the stationarity condition instead,
    // which is model-independent: d f / d alpha = 0 at the returned minimizer.
    const auto p = with_u(0.0, 0.9);
    const double t = 0.05;
    const auto r = order_parameter(p, t);
    CHECK(r.alpha > 0.3);
    const double h = 1e-5;
    const double deriv =
        (free_energy_density(r.alpha + h, p, t) - free_energy_density(r.alpha - h, p, t)) / (2.0 * h);
    CHECK(std::abs(deriv) < 1e-4);
}
