#include <doctest.h>

#include <cmath>

#include "phaseloop/classical_oracle.hpp"
#include "phaseloop/engine.hpp"

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

std::shared_ptr<PolynomialPotential> linear_z(double c) {
    PolynomialCoeffs pc;
    pc.linear = Vec3(0, 0, c);
    return std::make_shared<PolynomialPotential>(pc);
}

std::shared_ptr<PolynomialPotential> cubic_earth(double g, double R, double mass,
                                                 double lambda = 1.0) {
    PolynomialCoeffs pc;
    pc.cubic = (lambda * mass) * earth_gravity_tensors(g, R).gamma2;
    return std::make_shared<PolynomialPotential>(pc);
}

GaussianState rb_trap() {
    const double w = 2.0 * M_PI * 60.0;
    return trap_ground_state(Vec3(w, w, 0.5 * w), constants::mass_rb87);
}

}  // namespace

TEST_CASE("first-order phase") {
    PulseSequence seq = rb_mz();
    GaussianState state = rb_trap();
    const double vr = seq.hbar * 1.61e7 / seq.mass;

    SUBCASE("zero potential contributes nothing") {
        FirstOrderPhase f = phase_first_order(seq, *linear_z(0.0), state);
        CHECK(f.classical == 0.0);
        CHECK(f.wavepacket == 0.0);
    }
    SUBCASE("constant gradient: classical = -(c/hbar) v_r T^2, no wave-packet part") {
        const double c = 1e-28;
        FirstOrderPhase f = phase_first_order(seq, *linear_z(c), state);
        CHECK(f.classical == doctest::Approx(-c * vr / seq.hbar).epsilon(1e-12));
        CHECK(f.wavepacket == 0.0);
    }
    SUBCASE("cubic gravity term matches its closed forms") {
        const double g = 9.81, R = 6.371e6, m = seq.mass;
        const double w = 2.0 * M_PI * 60.0;
        FirstOrderPhase f = phase_first_order(seq, *cubic_earth(g, R, m), state);
        MzCubicReference ref = mz_cubic_reference(1.0, vr, g, 0.0, w, R, m);
        // classical part: -(m/6 hbar) Gamma2_zzz f_phi
        CHECK(f.classical ==
              doctest::Approx(-(m / (6.0 * seq.hbar)) * (6.0 * g / (R * R)) * ref.f_phi)
                  .epsilon(1e-12));
        // wave-packet part from the moment contraction of the f integrals
        const double gq = g / (R * R);
        const double srr = state.sigma_rr(0, 0), szz = state.sigma_rr(2, 2);
        const double prr = state.sigma_pp(0, 0), pzz = state.sigma_pp(2, 2);
        const double wp_expected =
            -0.5 / seq.hbar * m *
            ((-3.0 * gq) * 2.0 * (srr * ref.f_rr + prr / (m * m) * ref.f_pp) +
             (6.0 * gq) * (szz * ref.f_rr + pzz / (m * m) * ref.f_pp));
        CHECK(f.wavepacket == doctest::Approx(wp_expected).epsilon(1e-10));
        // engine total against the end-to-end closed form
        CHECK(f.classical + f.wavepacket ==
              doctest::Approx(ref.phase_eq_bracket).epsilon(1e-10));
    }
    SUBCASE("first order is additive in the potential") {
        auto pa = linear_z(2e-29);
        auto pb = cubic_earth(9.81, 6.371e6, seq.mass);
        PolynomialCoeffs sum;
        sum.linear = Vec3(0, 0, 2e-29);
        sum.cubic = seq.mass * earth_gravity_tensors(9.81, 6.371e6).gamma2;
        PolynomialPotential pot_sum(sum);
        FirstOrderPhase fa = phase_first_order(seq, *pa, state);
        FirstOrderPhase fb = phase_first_order(seq, *pb, state);
        FirstOrderPhase fs = phase_first_order(seq, pot_sum, state);
        CHECK(fs.classical ==
              doctest::Approx(fa.classical + fb.classical).epsilon(1e-12));
        CHECK(fs.wavepacket ==
              doctest::Approx(fa.wavepacket + fb.wavepacket).epsilon(1e-12));
    }
    SUBCASE("open geometry refuses") {
        PulseSequence open = seq;
        open.pulses.pop_back();
        CHECK_THROWS_AS(phase_first_order(open, *linear_z(1e-30), state), ClosureError);
    }
}

TEST_CASE("second-order phase") {
    PulseSequence seq = rb_mz(0.1);
    GaussianState state = rb_trap();

    SUBCASE("zero potential") {
        CHECK(phase_second_order(seq, *linear_z(0.0), state) == 0.0);
    }
    SUBCASE("uniform force: the commutator kernel cancels on a closed loop") {
        const double c = 1e-26;
        FirstOrderPhase f = phase_first_order(seq, *linear_z(c), state);
        // exact cancellation up to rounding of the nested quadrature
        CHECK(std::abs(phase_second_order(seq, *linear_z(c), state)) <
              1e-10 * std::abs(f.classical));
    }
    SUBCASE("tracks the classical-oracle residual for a strong cubic") {
        // lambda exaggerated so that eps ~ 1e-3
        const double g = 9.81, R = 6.371e6;
        auto pot = cubic_earth(g, R, seq.mass, 2.1e12);
        FirstOrderPhase f = phase_first_order(seq, *pot, state);
        const double p2 = phase_second_order(seq, *pot, state);
        ClassicalOracleOptions copts;
        copts.steps_per_segment = 20000;
        OracleResult oracle = classical_oracle(seq, *pot, copts);
        const double residual = oracle.phase - (phi0(seq) + f.classical + f.wavepacket);
        CHECK(p2 == doctest::Approx(residual).epsilon(0.1));
        CHECK(std::abs(p2) > 1e-3);  // the check is non-vacuous
    }
}

TEST_CASE("contrast") {
    PulseSequence seq = rb_mz();
    GaussianState state = rb_trap();

    SUBCASE("zero potential: C = 1") {
        CHECK(contrast(seq, *linear_z(0.0), state) == 1.0);
    }
    SUBCASE("branch-independent constant gradient: the loop cancels, C = 1") {
        CHECK(contrast(seq, *linear_z(1e-26), state) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("strong cubic drops the contrast but keeps it in (0, 1]") {
        auto pot = cubic_earth(9.81, 6.371e6, seq.mass, 1e7);
        const double C = contrast(seq, *pot, state);
        CHECK(C < 0.9999);
        CHECK(C > 0.0);
    }
}

TEST_CASE("phase_total assembly and gates") {
    PulseSequence seq = rb_mz();
    GaussianState state = rb_trap();

    SUBCASE("zero potential: total is phi0, contrast 1") {
        EngineOptions opts;
        PhaseBreakdown bd = phase_total(seq, *linear_z(0.0), state, opts);
        CHECK(bd.total() == doctest::Approx(phi0(seq)));
        CHECK(bd.phi1_classical == 0.0);
        CHECK(bd.phi2 == 0.0);
        CHECK(bd.contrast == 1.0);
        CHECK_FALSE(bd.validity.refuse);
    }
    SUBCASE("validity refusal and override") {
        auto strong = cubic_earth(9.81, 6.371e6, seq.mass, 1e15);
        EngineOptions opts;
        CHECK_THROWS_AS(phase_total(seq, *strong, state, opts), ValidityRefusal);
        opts.validity_action = ValidityAction::Override;
        PhaseBreakdown bd = phase_total(seq, *strong, state, opts);
        CHECK(bd.validity.refuse);  // the report still says so
    }
    SUBCASE("orders beyond the truncation are rejected") {
        EngineOptions opts;
        opts.max_order = 3;
        CHECK_THROWS_AS(phase_total(seq, *linear_z(0.0), state, opts), ConfigError);
    }
    SUBCASE("first-order-only run leaves phi2 at zero") {
        EngineOptions opts;
        opts.max_order = 1;
        auto pot = cubic_earth(9.81, 6.371e6, seq.mass);
        PhaseBreakdown bd = phase_total(seq, *pot, state, opts);
        CHECK(bd.phi2 == 0.0);
        CHECK(bd.phi1_classical != 0.0);
        CHECK(*bd.validity.phi1_wavepacket_magnitude ==
              doctest::Approx(std::abs(bd.phi1_wavepacket)));
    }
}

TEST_CASE("closed-form MZ cubic reference") {
    const double vr = 0.0123, T = 1.4, g = 9.81;
    SUBCASE("loop moments") {
        MzCubicReference ref = mz_cubic_reference(T, vr, g, 0.3, 1.0, 1.0, 1.0);
        CHECK(ref.f_rr == doctest::Approx(vr * T * T));
        CHECK(ref.f_rp == doctest::Approx(vr * T * T * T));
        CHECK(ref.f_pp == doctest::Approx(7.0 / 6.0 * vr * std::pow(T, 4)));
    }
    SUBCASE("f_phi at z_i = 0") {
        MzCubicReference ref = mz_cubic_reference(T, vr, g, 0.0, 1.0, 1.0, 1.0);
        const double expect = 31.0 / 20.0 * g * g * vr * std::pow(T, 6) -
                              9.0 / 4.0 * g * vr * vr * std::pow(T, 5) +
                              vr * vr * vr * std::pow(T, 4);
        CHECK(ref.f_phi == doctest::Approx(expect).epsilon(1e-14));
    }
    SUBCASE("coincident branches: all moments vanish") {
        MzCubicReference ref = mz_cubic_reference(T, 0.0, g, 0.5, 1.0, 1.0, 1.0);
        CHECK(ref.f_phi == 0.0);
        CHECK(ref.f_rr == 0.0);
        CHECK(ref.f_rp == 0.0);
        CHECK(ref.f_pp == 0.0);
    }
}
