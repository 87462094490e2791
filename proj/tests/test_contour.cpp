#include <doctest.h>

#include <cmath>

#include "phaseloop/contour.hpp"

using namespace phaseloop;

namespace {

PulseSequence rb_mz(double T = 1.0, double k = 1.61e7, double g = 9.81) {
    MachZehnderParams p;
    p.T = T;
    p.k = k;
    p.g = g;
    p.mass = constants::mass_rb87;
    return mach_zehnder(p);
}

}  // namespace

TEST_CASE("single loop integrals") {
    PulseSequence seq = rb_mz();
    const double vr = seq.hbar * 1.61e7 / seq.mass;
    auto tu = unperturbed_trajectory(seq, Branch::Upper);
    auto tl = unperturbed_trajectory(seq, Branch::Lower);
    auto z0 = [&](Branch b, double t) {
        return (b == Branch::Upper ? tu.position(t) : tl.position(t))[2];
    };

    SUBCASE("branch-independent integrand cancels") {
        auto res = contour_integrate(seq, [](Branch, double) { return 1.0; });
        CHECK(std::abs(res.value) < 1e-14);
    }
    SUBCASE("loop of z0 = v_r T^2") {
        auto res = contour_integrate(seq, z0);
        CHECK(res.value == doctest::Approx(vr).epsilon(1e-12));  // T = 1
    }
    SUBCASE("loop of z0 t^2 = 7/6 v_r T^4") {
        auto res = contour_integrate(seq, [&](Branch b, double t) { return z0(b, t) * t * t; });
        CHECK(res.value == doctest::Approx(7.0 / 6.0 * vr).epsilon(1e-12));
    }
    SUBCASE("non-finite integrand reports branch and time") {
        auto bad = [](Branch b, double t) {
            return (b == Branch::Lower && t > 1.5) ? std::nan("") : 0.0;
        };
        CHECK_THROWS_WITH_AS(contour_integrate(seq, bad).value,
                             doctest::Contains("lower"), EvaluationError);
    }
    SUBCASE("error estimate bounds the next refinement") {
        auto f = [&](Branch b, double t) { return std::sin(1.3 * z0(b, t) * 1e2 + 0.7 * t); };
        QuadOptions o8{8, true}, o16{16, true};
        auto r8 = contour_integrate(seq, f, o8);
        auto r16 = contour_integrate(seq, f, o16);
        CHECK(std::abs(r16.value - r8.value) <= r8.error_estimate);
    }
}

TEST_CASE("nested loop integrals") {
    PulseSequence seq = rb_mz();
    const double span = seq.t_detect - seq.t_initial;

    SUBCASE("commutator-style kernel (t'-t) c^2 vanishes on the loop") {
        auto res = contour_integrate_nested(
            seq, [](Branch, double t, Branch, double tp) { return (tp - t) * 2.5; });
        CHECK(std::abs(res.value) < 1e-12);
    }
    SUBCASE("constant kernel integrates to half the squared signed length = 0") {
        auto res =
            contour_integrate_nested(seq, [](Branch, double, Branch, double) { return 1.0; });
        CHECK(std::abs(res.value) < 1e-12);
    }
    SUBCASE("upper-upper ordered simplex has area (t_d - t_i)^2/2") {
        auto res = contour_integrate_nested(seq, [](Branch b, double, Branch bp, double) {
            return (b == Branch::Upper && bp == Branch::Upper) ? 1.0 : 0.0;
        });
        CHECK(res.value == doctest::Approx(0.5 * span * span).epsilon(1e-12));
    }
    SUBCASE("lower-lower ordered block also covers half the square") {
        auto res = contour_integrate_nested(seq, [](Branch b, double, Branch bp, double) {
            return (b == Branch::Lower && bp == Branch::Lower) ? 1.0 : 0.0;
        });
        CHECK(res.value == doctest::Approx(0.5 * span * span).epsilon(1e-12));
    }
    SUBCASE("cross block carries the orientation product") {
        // outer on the lower sweep, inner anywhere on the earlier upper sweep
        auto res = contour_integrate_nested(seq, [](Branch b, double, Branch bp, double) {
            return (b == Branch::Lower && bp == Branch::Upper) ? 1.0 : 0.0;
        });
        CHECK(res.value == doctest::Approx(-span * span).epsilon(1e-12));
    }
    SUBCASE("time-ordering: inner time precedes outer on the upper branch") {
        // integral of (t - t') over upper-upper is positive by contour order
        auto res = contour_integrate_nested(seq, [](Branch b, double t, Branch bp, double tp) {
            return (b == Branch::Upper && bp == Branch::Upper) ? (t - tp) : 0.0;
        });
        CHECK(res.value > 0.0);
    }
}

TEST_CASE("signed contour nodes") {
    PulseSequence seq = rb_mz();
    ContourNodes nodes = contour_nodes(seq, 16);
    double measure = 0.0;
    for (double w : nodes.weight) measure += w;
    CHECK(std::abs(measure) < 1e-14);  // the loop has zero signed length
    CHECK(nodes.t.size() == 2 * 2 * 16);
}
