#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "phaseloop/grid_potential.hpp"
#include "phaseloop/potential.hpp"

using namespace phaseloop;

TEST_CASE("polynomial potential derivative ladder") {
    SUBCASE("V = c z^3") {
        const double c = 2.7;
        PolynomialCoeffs pc;
        pc.cubic(2, 2, 2) = 6.0 * c;  // 1/6 C_zzz z^3 = c z^3
        PolynomialPotential pot(pc);
        const Vec3 r(0.0, 0.0, 1.3);
        const double z = r[2];
        CHECK(pot.value(r, 0, Branch::Upper) == doctest::Approx(c * z * z * z));
        CHECK(pot.gradient(r, 0, Branch::Upper)[2] == doctest::Approx(3 * c * z * z));
        CHECK(pot.hessian(r, 0, Branch::Upper)(2, 2) == doctest::Approx(6 * c * z));
        CHECK(pot.third(r, 0, Branch::Upper)(2, 2, 2) == doctest::Approx(6 * c));
        CHECK(pot.fourth(r, 0, Branch::Upper)(2, 2, 2, 2) == 0.0);
    }
    SUBCASE("zero coefficients: identically zero") {
        PolynomialPotential pot(PolynomialCoeffs{});
        const Vec3 r(0.3, -4.0, 2.0);
        CHECK(pot.value(r, 1.0, Branch::Lower) == 0.0);
        CHECK(pot.gradient(r, 1.0, Branch::Lower).norm() == 0.0);
        CHECK(pot.hessian(r, 1.0, Branch::Lower).norm() == 0.0);
    }
    SUBCASE("1/2 m Gamma1 r r has Hessian m Gamma1 everywhere") {
        const double m = constants::mass_rb87;
        GravityTensors t = earth_gravity_tensors(9.81, 6.371e6);
        PolynomialCoeffs pc;
        pc.quadratic = m * t.gamma1;
        PolynomialPotential pot(pc);
        for (const Vec3& r : {Vec3(0, 0, 0), Vec3(1, -2, 5)})
            CHECK((pot.hessian(r, 0, Branch::Upper) - m * t.gamma1).norm() == 0.0);
    }
    SUBCASE("asymmetric quadratic input rejected") {
        PolynomialCoeffs pc;
        pc.quadratic(0, 1) = 1.0;  // no (1,0) partner
        CHECK_THROWS_AS(PolynomialPotential{pc}, ConfigError);
    }
    SUBCASE("branch-dependent coefficients") {
        PolynomialCoeffs up, lo;
        up.linear = Vec3(0, 0, 1.0);
        lo.linear = Vec3(0, 0, -1.0);
        PolynomialPotential pot(up, lo);
        CHECK(pot.branch_dependent());
        CHECK(pot.value(Vec3(0, 0, 2), 0, Branch::Upper) == 2.0);
        CHECK(pot.value(Vec3(0, 0, 2), 0, Branch::Lower) == -2.0);
    }
}

TEST_CASE("earth gravity tensors") {
    const double g = 9.81, R = 6.371e6;
    GravityTensors t = earth_gravity_tensors(g, R);

    CHECK(t.gamma1(2, 2) == doctest::Approx(-3.0796e-6).epsilon(1e-4));
    CHECK(t.gamma2(2, 2, 2) == doctest::Approx(1.4503e-12).epsilon(1e-4));
    CHECK(t.gamma1.trace() == doctest::Approx(0.0));
    CHECK(t.gamma2(0, 0, 2) + t.gamma2(1, 1, 2) + t.gamma2(2, 2, 2) ==
          doctest::Approx(0.0).epsilon(1e-18));

    SUBCASE("order 2 equals order 3 with the cubic removed") {
        const double m = constants::mass_rb87;
        auto e2 = earth_taylor(g, R, 2, m);
        auto e3 = earth_taylor(g, R, 3, m);
        const Vec3 r(0.5, -0.3, 2.0);
        const Tensor3 c3 = e3.potential->third(r, 0, Branch::Upper);
        const double cubic_part = c3.contract(r, r, r) / 6.0;
        CHECK(e2.potential->value(r, 0, Branch::Upper) ==
              doctest::Approx(e3.potential->value(r, 0, Branch::Upper) - cubic_part));
    }
    SUBCASE("linear term excluded by default, included on request") {
        const double m = constants::mass_rb87;
        auto off = earth_taylor(g, R, 1, m);
        CHECK(off.potential->value(Vec3(0, 0, 1), 0, Branch::Upper) == 0.0);
        auto on = earth_taylor(g, R, 1, m, true);
        CHECK(on.potential->value(Vec3(0, 0, 1), 0, Branch::Upper) == doctest::Approx(m * g));
    }
}

namespace {

// exposes only value(); derivatives exercise the finite-difference defaults
class ValueOnly final : public Potential {
  public:
    explicit ValueOnly(std::shared_ptr<Potential> inner) : inner_(std::move(inner)) {
        set_fd_step(1e-3);
    }
    double value(const Vec3& r, double t, Branch b) const override {
        return inner_->value(r, t, b);
    }

  private:
    std::shared_ptr<Potential> inner_;
};

}  // namespace

TEST_CASE("finite-difference defaults against analytic derivatives") {
    PolynomialCoeffs pc;
    pc.linear = Vec3(0.2, -0.1, 0.7);
    pc.quadratic << 0.3, 0.1, 0.0, 0.1, -0.2, 0.05, 0.0, 0.05, 0.6;
    pc.cubic(2, 2, 2) = 0.9;
    pc.cubic = pc.cubic.symmetrized();
    auto exact = std::make_shared<PolynomialPotential>(pc);
    ValueOnly fd(exact);

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    for (int i = 0; i < 5; ++i) {
        const Vec3 r(uni(rng), uni(rng), uni(rng));
        const Vec3 ga = exact->gradient(r, 0, Branch::Upper);
        const Vec3 gf = fd.gradient(r, 0, Branch::Upper);
        CHECK((ga - gf).norm() <= 1e-7 * std::max(1.0, ga.norm()));
        const Mat3 ha = exact->hessian(r, 0, Branch::Upper);
        const Mat3 hf = fd.hessian(r, 0, Branch::Upper);
        CHECK((ha - hf).norm() <= 1e-7 * std::max(1.0, ha.norm()));
        const double t3a = exact->third(r, 0, Branch::Upper)(2, 2, 2);
        const double t3f = fd.third(r, 0, Branch::Upper)(2, 2, 2);
        CHECK(t3f == doctest::Approx(t3a).epsilon(1e-5));
    }
}

TEST_CASE("derivative tensors are symmetric under random index permutations") {
    PolynomialCoeffs pc;
    pc.cubic(0, 1, 2) = 0.4;
    pc.cubic = pc.cubic.symmetrized();
    pc.quartic(0, 0, 1, 2) = -0.7;
    pc.quartic = pc.quartic.symmetrized();
    PolynomialPotential pot(pc);
    const Vec3 r(0.3, 0.9, -1.1);
    const Tensor3 t3 = pot.third(r, 0, Branch::Upper);
    const Tensor4 t4 = pot.fourth(r, 0, Branch::Upper);
    CHECK(t3.max_asymmetry() <= 1e-15);
    CHECK(t4.max_asymmetry() <= 1e-15);
    CHECK(t3(0, 1, 2) == doctest::Approx(t3(2, 0, 1)).epsilon(1e-14));
    CHECK(t4(0, 0, 1, 2) == doctest::Approx(t4(2, 0, 1, 0)).epsilon(1e-14));
}

TEST_CASE("grid potential") {
    const double c = 3.2;
    GridData g;
    g.axes = {2};
    g.n = {201};
    g.lo = {-2.0};
    g.hi = {2.0};
    for (int i = 0; i < 201; ++i) {
        const double z = -2.0 + 4.0 * i / 200.0;
        g.values.push_back(c * z * z);
    }

    SUBCASE("Hessian of a sampled quadratic") {
        GridPotential pot(g);
        for (double z : {-0.8, 0.0, 0.55, 1.2}) {
            CHECK(pot.value(Vec3(0, 0, z), 0, Branch::Upper) ==
                  doctest::Approx(c * z * z).epsilon(1e-8));
            CHECK(pot.gradient(Vec3(0, 0, z), 0, Branch::Upper)[2] ==
                  doctest::Approx(2 * c * z).epsilon(1e-6));
            CHECK(pot.hessian(Vec3(0, 0, z), 0, Branch::Upper)(2, 2) ==
                  doctest::Approx(2 * c).epsilon(1e-6));
        }
        // off-grid axes carry no dependence
        CHECK(pot.gradient(Vec3(5, -3, 0.5), 0, Branch::Upper)[0] == 0.0);
    }
    SUBCASE("constant grid: all derivatives vanish") {
        GridData cg = g;
        for (auto& v : cg.values) v = 7.0;
        GridPotential pot(cg);
        CHECK(pot.value(Vec3(0, 0, 0.3), 0, Branch::Upper) == doctest::Approx(7.0));
        CHECK(pot.gradient(Vec3(0, 0, 0.3), 0, Branch::Upper).norm() < 1e-12);
        CHECK(pot.hessian(Vec3(0, 0, 0.3), 0, Branch::Upper).norm() < 1e-9);
    }
    SUBCASE("query outside the domain") {
        GridPotential pot(g);
        CHECK_THROWS_AS(pot.value(Vec3(0, 0, 2.5), 0, Branch::Upper), EvaluationError);
    }
    SUBCASE("too few points rejected") {
        GridData bad = g;
        bad.n = {3};
        bad.values.resize(3);
        std::ostringstream os;
        write_grid(os, bad);
        std::istringstream is(os.str());
        CHECK_THROWS_AS(read_grid(is), ConfigError);
    }
    SUBCASE("file round trip") {
        std::ostringstream os;
        write_grid(os, g);
        std::istringstream is(os.str());
        GridData back = read_grid(is);
        CHECK(back.axes == g.axes);
        CHECK(back.n == g.n);
        CHECK(back.values == g.values);
    }
    SUBCASE("two-dimensional grid with a cross term") {
        GridData g2;
        g2.axes = {1, 2};  // y, z; z fastest
        g2.n = {41, 51};
        g2.lo = {-1.0, -1.5};
        g2.hi = {1.0, 1.5};
        const double a = 0.7, b = -0.4, cc = 0.9;
        for (int iy = 0; iy < 41; ++iy)
            for (int iz = 0; iz < 51; ++iz) {
                const double y = -1.0 + 2.0 * iy / 40.0;
                const double z = -1.5 + 3.0 * iz / 50.0;
                g2.values.push_back(a * y * y + b * z * z + cc * y * z);
            }
        GridPotential pot(g2);
        const Vec3 r(9.0, 0.3, -0.4);  // x is inert
        CHECK(pot.value(r, 0, Branch::Upper) ==
              doctest::Approx(a * 0.09 + b * 0.16 - cc * 0.12).epsilon(1e-7));
        CHECK(pot.gradient(r, 0, Branch::Upper)[1] ==
              doctest::Approx(2 * a * 0.3 + cc * (-0.4)).epsilon(1e-5));
        Mat3 h = pot.hessian(r, 0, Branch::Upper);
        CHECK(h(1, 2) == doctest::Approx(cc).epsilon(1e-5));
        CHECK(h(2, 1) == h(1, 2));
        CHECK(h(0, 0) == 0.0);
    }
    SUBCASE("three-dimensional grid") {
        GridData g3;
        g3.axes = {0, 1, 2};
        g3.n = {9, 9, 9};
        g3.lo = {-1.0, -1.0, -1.0};
        g3.hi = {1.0, 1.0, 1.0};
        auto f = [](double x, double y, double z) {
            return x * x + 2 * y * y + 3 * z * z + 0.5 * x * y;
        };
        for (int ix = 0; ix < 9; ++ix)
            for (int iy = 0; iy < 9; ++iy)
                for (int iz = 0; iz < 9; ++iz)
                    g3.values.push_back(f(-1 + ix / 4.0, -1 + iy / 4.0, -1 + iz / 4.0));
        GridPotential pot(g3);
        // coarse grid: natural-end effects cap the accuracy; this exercises
        // the 3-D indexing, the 1-D cases pin the interpolation error
        const Vec3 r(0.2, -0.1, 0.3);
        CHECK(pot.value(r, 0, Branch::Upper) ==
              doctest::Approx(f(r[0], r[1], r[2])).epsilon(2e-3));
        CHECK(pot.gradient(r, 0, Branch::Upper)[0] ==
              doctest::Approx(2 * r[0] + 0.5 * r[1]).epsilon(1e-2));
        Mat3 h = pot.hessian(r, 0, Branch::Upper);
        CHECK(h(0, 1) == doctest::Approx(0.5).epsilon(1e-2));
        CHECK(h(2, 2) == doctest::Approx(6.0).epsilon(1e-2));
    }
    SUBCASE("third derivative via finite differences of the spline Hessian") {
        GridData g3;
        g3.axes = {2};
        g3.n = {401};
        g3.lo = {-2.0};
        g3.hi = {2.0};
        const double cc = 1.7;
        for (int i = 0; i < 401; ++i) {
            const double z = -2.0 + 4.0 * i / 400.0;
            g3.values.push_back(cc * z * z * z);
        }
        GridPotential pot(g3);
        CHECK(pot.third(Vec3(0, 0, 0.2), 0, Branch::Upper)(2, 2, 2) ==
              doctest::Approx(6.0 * cc).epsilon(0.02));
    }
}

TEST_CASE("eval_on_contour") {
    MachZehnderParams p;
    p.T = 1.0;
    p.k = 1.61e7;
    p.g = 9.81;
    p.mass = constants::mass_rb87;
    PulseSequence seq = mach_zehnder(p);
    const double q = 9.81 / (6.371e6 * 6.371e6);
    PolynomialCoeffs pc;
    pc.cubic = p.mass * earth_gravity_tensors(9.81, 6.371e6).gamma2;
    PolynomialPotential pot(pc);
    auto tu = unperturbed_trajectory(seq, Branch::Upper);

    SUBCASE("cubic term on the upper branch at t") {
        const double t = 0.8;
        const double z = tu.position(t)[2];
        PotentialDerivs d = eval_on_contour(pot, seq, tu, t, Branch::Upper);
        CHECK(d.value == doctest::Approx(p.mass * q * z * z * z).epsilon(1e-12));
    }
    SUBCASE("coincident branches see identical tensors when k = 0") {
        MachZehnderParams p0 = p;
        p0.k = 0.0;
        PulseSequence s0 = mach_zehnder(p0);
        auto u0 = unperturbed_trajectory(s0, Branch::Upper);
        auto l0 = unperturbed_trajectory(s0, Branch::Lower);
        const double t = 1.3;
        PotentialDerivs du = eval_on_contour(pot, s0, u0, t, Branch::Upper);
        PotentialDerivs dl = eval_on_contour(pot, s0, l0, t, Branch::Lower);
        CHECK(du.value == dl.value);
        CHECK((du.grad - dl.grad).norm() == 0.0);
    }
    SUBCASE("t outside the sequence") {
        CHECK_THROWS_AS(eval_on_contour(pot, seq, tu, 2.5, Branch::Upper), EvaluationError);
    }
}
