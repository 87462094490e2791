#include "phaseloop/potential.hpp"

#include <cmath>
#include <sstream>

namespace phaseloop {

void Potential::set_fd_step(double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ConfigError("potential: finite-difference step must be positive");
    fd_step_ = h;
}

namespace {

// Central difference with one Richardson refinement: (4 D(h/2) - D(h))/3.
// T must be a concrete value type (double / Vec3 / Mat3), not an Eigen
// expression, so the arithmetic below cannot dangle.
template <typename T, typename F>
T richardson_diff(const F& f, double h) {
    const T coarse = f(h);
    const T fine = f(0.5 * h);
    return T((4.0 * fine - coarse) / 3.0);
}

Vec3 axis(int i) {
    Vec3 e = Vec3::Zero();
    e[i] = 1.0;
    return e;
}

}  // namespace

Vec3 Potential::gradient(const Vec3& r, double t, Branch b) const {
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
        g[i] = richardson_diff<double>(
            [&](double h) {
                return (value(r + h * axis(i), t, b) - value(r - h * axis(i), t, b)) / (2.0 * h);
            },
            fd_step_);
    }
    return g;
}

Mat3 Potential::hessian(const Vec3& r, double t, Branch b) const {
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
        Vec3 col = richardson_diff<Vec3>(
            [&](double h) {
                return Vec3((gradient(r + h * axis(i), t, b) - gradient(r - h * axis(i), t, b)) /
                            (2.0 * h));
            },
            fd_step_);
        m.col(i) = col;
    }
    return Mat3(0.5 * (m + m.transpose()));
}

Tensor3 Potential::third(const Vec3& r, double t, Branch b) const {
    Tensor3 out;
    for (int k = 0; k < 3; ++k) {
        Mat3 d = richardson_diff<Mat3>(
            [&](double h) {
                return Mat3((hessian(r + h * axis(k), t, b) - hessian(r - h * axis(k), t, b)) /
                            (2.0 * h));
            },
            fd_step_);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out(i, j, k) = d(i, j);
    }
    return out.symmetrized();
}

Tensor4 Potential::fourth(const Vec3& r, double t, Branch b) const {
    Tensor4 out;
    for (int l = 0; l < 3; ++l) {
        const double h = fd_step_;
        // plain central difference of third(); Richardson here would stack
        // four levels of differencing on a black box for little gain
        Tensor3 hi = third(r + h * axis(l), t, b);
        Tensor3 lo = third(r - h * axis(l), t, b);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    out(i, j, k, l) = (hi(i, j, k) - lo(i, j, k)) / (2.0 * h);
    }
    return out.symmetrized();
}

PotentialDerivs Potential::derivs(const Vec3& r, double t, Branch b, int order) const {
    PotentialDerivs d;
    d.value = value(r, t, b);
    if (order >= 1) d.grad = gradient(r, t, b);
    if (order >= 2) d.hess = hessian(r, t, b);
    if (order >= 3) d.third = third(r, t, b);
    if (order >= 4) d.fourth = fourth(r, t, b);
    return d;
}

namespace {

PolynomialCoeffs symmetrize_checked(PolynomialCoeffs c, double tol) {
    auto scale = [](double m, double ref) { return std::max(std::abs(m), ref); };
    const double qs = c.quadratic.cwiseAbs().maxCoeff();
    if ((c.quadratic - c.quadratic.transpose()).cwiseAbs().maxCoeff() > tol * scale(qs, 1e-300))
        throw ConfigError("polynomial potential: quadratic tensor is not symmetric");
    c.quadratic = 0.5 * (c.quadratic + c.quadratic.transpose());

    double cs = 0.0;
    for (double x : c.cubic.v) cs = std::max(cs, std::abs(x));
    if (c.cubic.max_asymmetry() > tol * scale(cs, 1e-300))
        throw ConfigError("polynomial potential: cubic tensor is not symmetric");
    c.cubic = c.cubic.symmetrized();

    double fs = 0.0;
    for (double x : c.quartic.v) fs = std::max(fs, std::abs(x));
    if (c.quartic.max_asymmetry() > tol * scale(fs, 1e-300))
        throw ConfigError("polynomial potential: quartic tensor is not symmetric");
    c.quartic = c.quartic.symmetrized();
    return c;
}

}  // namespace

PolynomialPotential::PolynomialPotential(PolynomialCoeffs coeffs, double asym_tol)
    : upper_(symmetrize_checked(std::move(coeffs), asym_tol)), lower_(upper_), two_sided_(false) {}

PolynomialPotential::PolynomialPotential(PolynomialCoeffs upper, PolynomialCoeffs lower,
                                         double asym_tol)
    : upper_(symmetrize_checked(std::move(upper), asym_tol)),
      lower_(symmetrize_checked(std::move(lower), asym_tol)),
      two_sided_(true) {}

double PolynomialPotential::value(const Vec3& r, double, Branch b) const {
    const auto& c = coeffs(b);
    double v = c.constant + c.linear.dot(r) + 0.5 * r.dot(c.quadratic * r) +
               c.cubic.contract(r, r, r) / 6.0;
    // quartic: 1/24 F_ijkl r_i r_j r_k r_l
    const Tensor3 fr = c.quartic.contract(r);
    v += fr.contract(r, r, r) / 24.0;
    return v;
}

Vec3 PolynomialPotential::gradient(const Vec3& r, double, Branch b) const {
    const auto& c = coeffs(b);
    const Mat3 rr = r * r.transpose();
    Vec3 g = c.linear + c.quadratic * r + 0.5 * c.cubic.contract(rr);
    g += c.quartic.contract(r).contract(rr) / 6.0;
    return g;
}

Mat3 PolynomialPotential::hessian(const Vec3& r, double, Branch b) const {
    const auto& c = coeffs(b);
    Mat3 h = c.quadratic + c.cubic.contract(r);
    h += 0.5 * c.quartic.contract(r).contract(r);
    return h;
}

Tensor3 PolynomialPotential::third(const Vec3& r, double, Branch b) const {
    const auto& c = coeffs(b);
    Tensor3 t = c.cubic;
    const Tensor3 fr = c.quartic.contract(r);
    for (int a = 0; a < 27; ++a) t.v[a] += fr.v[a];
    return t;
}

Tensor4 PolynomialPotential::fourth(const Vec3&, double, Branch b) const {
    return coeffs(b).quartic;
}

GravityTensors earth_gravity_tensors(double g, double R) {
    if (!(g > 0.0) || !(R > 0.0)) throw ConfigError("earth_taylor: g and R must be positive");
    GravityTensors t;
    t.g = g;
    t.R = R;
    t.gamma1.setZero();
    t.gamma1(0, 0) = g / R;
    t.gamma1(1, 1) = g / R;
    t.gamma1(2, 2) = -2.0 * g / R;
    const double q = g / (R * R);
    auto set_sym = [&](int i, int j, int k, double val) {
        t.gamma2(i, j, k) = t.gamma2(i, k, j) = t.gamma2(j, i, k) = t.gamma2(j, k, i) =
            t.gamma2(k, i, j) = t.gamma2(k, j, i) = val;
    };
    set_sym(0, 0, 2, -3.0 * q);
    set_sym(1, 1, 2, -3.0 * q);
    t.gamma2(2, 2, 2) = 6.0 * q;
    return t;
}

EarthTaylor earth_taylor(double g, double R, int order, double mass, bool include_linear) {
    if (order < 1 || order > 3)
        throw ConfigError("earth_taylor: only expansion orders 1..3 are supported");
    if (!(mass > 0.0)) throw ConfigError("earth_taylor: mass must be positive");
    GravityTensors t = earth_gravity_tensors(g, R);
    PolynomialCoeffs c;
    if (include_linear) c.linear = Vec3(0.0, 0.0, mass * g);
    if (order >= 2) c.quadratic = mass * t.gamma1;
    if (order >= 3) c.cubic = mass * t.gamma2;
    EarthTaylor out;
    out.potential = std::make_shared<PolynomialPotential>(c);
    out.tensors = t;
    return out;
}

PotentialDerivs eval_on_contour(const Potential& pot, const PulseSequence& seq,
                                const BranchTrajectory& traj, double t, Branch branch,
                                int order) {
    if (t < seq.t_initial || t > seq.t_detect) {
        std::ostringstream os;
        os << "eval_on_contour: t=" << t << " outside [" << seq.t_initial << ", " << seq.t_detect
           << "]";
        throw EvaluationError(os.str());
    }
    if (traj.branch != branch)
        throw EvaluationError("eval_on_contour: trajectory/branch mismatch");
    return pot.derivs(traj.position(t), t, branch, order);
}

}  // namespace phaseloop
