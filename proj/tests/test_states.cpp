#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "phaseloop/gaussian_state.hpp"

using namespace phaseloop;

TEST_CASE("trap ground state") {
    const double m = constants::mass_rb87;
    const double w = 2.0 * M_PI * 60.0;

    SUBCASE("Rb-87 at 60 Hz") {
        GaussianState s = trap_ground_state(Vec3(w, w, w), m);
        CHECK(s.sigma_rr(0, 0) == doctest::Approx(9.69e-13).epsilon(1e-3));
        CHECK(s.sigma_rp.norm() == 0.0);
    }
    SUBCASE("minimum-uncertainty per axis") {
        GaussianState s = trap_ground_state(Vec3(w, 2 * w, 0.3 * w), m);
        for (int j = 0; j < 3; ++j)
            CHECK(s.sigma_rr(j, j) * s.sigma_pp(j, j) ==
                  doctest::Approx(s.hbar * s.hbar / 4.0).epsilon(1e-14));
        s.validate();
    }
    SUBCASE("the w, w, w/2 configuration") {
        GaussianState s = trap_ground_state(Vec3(w, w, 0.5 * w), m);
        CHECK(s.sigma_rr(2, 2) == doctest::Approx(2.0 * s.sigma_rr(0, 0)).epsilon(1e-14));
    }
    SUBCASE("non-positive frequency rejected") {
        CHECK_THROWS_AS(trap_ground_state(Vec3(w, 0.0, w), m), ConfigError);
    }
}

TEST_CASE("covariance evolution") {
    const double m = 1.0, hbar = 1.0;
    GaussianState s = trap_ground_state(Vec3(0.8, 0.8, 0.4), m, hbar);

    SUBCASE("tau = 0 returns sigma_rr") {
        CHECK((s.covariance_at(0.0) - s.sigma_rr).norm() == 0.0);
    }
    SUBCASE("uncorrelated spreading: diag(dr^2 + dp^2 t^2/m^2)") {
        const double t = 1.7;
        Mat3 cov = s.covariance_at(t);
        for (int j = 0; j < 3; ++j)
            CHECK(cov(j, j) == doctest::Approx(s.sigma_rr(j, j) +
                                               s.sigma_pp(j, j) * t * t / (m * m)));
    }
    SUBCASE("long-time limit of the trap state is (hbar w / 2m) t^2") {
        const double w = 0.8, t = 400.0;
        CHECK(s.covariance_at(t)(0, 0) ==
              doctest::Approx(hbar * w / (2.0 * m) * t * t).epsilon(1e-4));
    }
    SUBCASE("widths never shrink for an uncorrelated state") {
        double prev = 0.0;
        for (double t : {0.0, 0.5, 1.0, 2.0, 4.0}) {
            const double w = s.width_at(t);
            CHECK(w >= prev);
            prev = w;
        }
    }
    SUBCASE("positive semidefinite at all times") {
        GaussianState c = s;
        c.sigma_rp = Mat3::Identity() * 0.2;
        for (int j = 0; j < 3; ++j)
            c.sigma_pp(j, j) += 0.2 * 0.2 / c.sigma_rr(j, j) * (1 + 1e-12);
        c.validate();
        for (double t : {0.0, 0.3, 1.0, 5.0}) {
            Eigen::SelfAdjointEigenSolver<Mat3> es(c.covariance_at(t));
            CHECK(es.eigenvalues().minCoeff() >= -1e-15);
        }
    }
}

TEST_CASE("two-time moments") {
    const double m = 1.3, hbar = 1.0;
    GaussianState s = trap_ground_state(Vec3(0.8, 1.1, 0.4), m, hbar);

    SUBCASE("equal times reduce to the covariance, commutator part vanishes") {
        const double t = 0.9;
        TwoTimeMoment mm = two_time_moment(s, t, t);
        CHECK((mm.G - s.covariance_at(t)).norm() == 0.0);
        CHECK(mm.commutator_coeff == 0.0);
    }
    SUBCASE("swapping times flips the commutator coefficient, G unchanged") {
        TwoTimeMoment a = two_time_moment(s, 0.3, 1.4);
        TwoTimeMoment b = two_time_moment(s, 1.4, 0.3);
        CHECK((a.G - b.G.transpose()).norm() < 1e-16);
        CHECK(a.commutator_coeff == doctest::Approx(-b.commutator_coeff));
        CHECK(a.commutator_coeff == doctest::Approx(hbar * (1.4 - 0.3) / (2.0 * m)));
    }
    SUBCASE("uncorrelated state: G_jj = sigma^2 + varsigma^2 t t'/m^2") {
        const double t = 0.6, tp = 2.1;
        TwoTimeMoment mm = two_time_moment(s, t, tp);
        for (int j = 0; j < 3; ++j)
            CHECK(mm.G(j, j) == doctest::Approx(s.sigma_rr(j, j) +
                                                s.sigma_pp(j, j) * t * tp / (m * m)));
    }
}

TEST_CASE("state validation") {
    GaussianState bad = trap_ground_state(Vec3(1, 1, 1), 1.0, 1.0);
    bad.sigma_pp(1, 1) *= 0.9;  // squeezes below hbar^2/4
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    GaussianState nonpsd = trap_ground_state(Vec3(1, 1, 1), 1.0, 1.0);
    nonpsd.sigma_rr(0, 1) = nonpsd.sigma_rr(1, 0) = 10.0;
    CHECK_THROWS_AS(nonpsd.validate(), ConfigError);
}
