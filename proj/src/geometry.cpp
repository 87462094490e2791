#include "phaseloop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace phaseloop {

Tensor3 Tensor3::symmetrized() const {
    Tensor3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                out(i, j, k) = ((*this)(i, j, k) + (*this)(i, k, j) + (*this)(j, i, k) +
                                (*this)(j, k, i) + (*this)(k, i, j) + (*this)(k, j, i)) /
                               6.0;
    return out;
}

double Tensor3::max_asymmetry() const {
    Tensor3 s = symmetrized();
    double m = 0.0;
    for (int a = 0; a < 27; ++a) m = std::max(m, std::abs(v[a] - s.v[a]));
    return m;
}

Tensor4 Tensor4::symmetrized() const {
    Tensor4 out;
    static const int perms[24][4] = {
        {0, 1, 2, 3}, {0, 1, 3, 2}, {0, 2, 1, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}, {0, 3, 2, 1},
        {1, 0, 2, 3}, {1, 0, 3, 2}, {1, 2, 0, 3}, {1, 2, 3, 0}, {1, 3, 0, 2}, {1, 3, 2, 0},
        {2, 0, 1, 3}, {2, 0, 3, 1}, {2, 1, 0, 3}, {2, 1, 3, 0}, {2, 3, 0, 1}, {2, 3, 1, 0},
        {3, 0, 1, 2}, {3, 0, 2, 1}, {3, 1, 0, 2}, {3, 1, 2, 0}, {3, 2, 0, 1}, {3, 2, 1, 0}};
    int idx[4];
    for (idx[0] = 0; idx[0] < 3; ++idx[0])
        for (idx[1] = 0; idx[1] < 3; ++idx[1])
            for (idx[2] = 0; idx[2] < 3; ++idx[2])
                for (idx[3] = 0; idx[3] < 3; ++idx[3]) {
                    double s = 0.0;
                    for (auto& p : perms)
                        s += (*this)(idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]]);
                    out(idx[0], idx[1], idx[2], idx[3]) = s / 24.0;
                }
    return out;
}

double Tensor4::max_asymmetry() const {
    Tensor4 s = symmetrized();
    double m = 0.0;
    for (int a = 0; a < 81; ++a) m = std::max(m, std::abs(v[a] - s.v[a]));
    return m;
}

void PulseSequence::validate() const {
    if (!(mass > 0.0)) throw ConfigError("pulse sequence: mass must be positive");
    if (!(hbar > 0.0)) throw ConfigError("pulse sequence: hbar must be positive");
    if (!(t_detect > t_initial))
        throw ConfigError("pulse sequence: t_detect must exceed t_initial");
    double prev = t_initial - 1.0;
    bool first = true;
    for (const Pulse& p : pulses) {
        if (!std::isfinite(p.time) || !p.k_upper.allFinite() || !p.k_lower.allFinite() ||
            !std::isfinite(p.phi_upper) || !std::isfinite(p.phi_lower))
            throw ConfigError("pulse sequence: non-finite pulse data");
        if (p.time < t_initial || p.time > t_detect)
            throw ConfigError("pulse sequence: pulse outside [t_initial, t_detect]");
        if (!first && !(p.time > prev))
            throw ConfigError("pulse sequence: pulse times must be strictly increasing");
        prev = p.time;
        first = false;
    }
    if (!gravity.allFinite() || !r_mean0.allFinite() || !v_mean0.allFinite())
        throw ConfigError("pulse sequence: non-finite initial data");
}

double PulseSequence::max_recoil_speed() const {
    double v = 0.0;
    for (const Pulse& p : pulses) {
        v = std::max(v, hbar * p.k_upper.norm() / mass);
        v = std::max(v, hbar * p.k_lower.norm() / mass);
    }
    return v;
}

PulseSequence mach_zehnder(const MachZehnderParams& p) {
    if (!(p.T > 0.0)) throw ConfigError("mach_zehnder: T must be positive");
    PulseSequence seq;
    seq.t_initial = 0.0;
    seq.t_detect = p.t_detect ? *p.t_detect : 2.0 * p.T;
    seq.mass = p.mass;
    seq.hbar = p.hbar;
    seq.gravity = Vec3(0.0, 0.0, -p.g);
    seq.r_mean0 = Vec3(0.0, 0.0, p.z_initial);
    seq.v_mean0 = Vec3(0.0, 0.0, p.v_initial);

    const Vec3 kz(0.0, 0.0, p.k);
    Pulse split;   // upper branch kicked up
    split.time = 0.0;
    split.k_upper = kz;
    split.phi_upper = p.laser_phases[0];
    Pulse mirror;  // redirects both
    mirror.time = p.T;
    mirror.k_upper = -kz;
    mirror.phi_upper = -p.laser_phases[1];
    mirror.k_lower = kz;
    mirror.phi_lower = p.laser_phases[1];
    Pulse recombine;
    recombine.time = 2.0 * p.T;
    recombine.k_lower = -kz;
    recombine.phi_lower = -p.laser_phases[2];
    seq.pulses = {split, mirror, recombine};
    seq.validate();
    return seq;
}

std::vector<double> contour_breakpoints(const PulseSequence& seq) {
    std::vector<double> bp{seq.t_initial};
    for (const Pulse& p : seq.pulses)
        if (p.time > seq.t_initial && p.time < seq.t_detect) bp.push_back(p.time);
    bp.push_back(seq.t_detect);
    return bp;
}

BranchTrajectory unperturbed_trajectory(const PulseSequence& seq, Branch branch) {
    seq.validate();
    BranchTrajectory traj;
    traj.branch = branch;
    Vec3 r = seq.r_mean0;
    Vec3 v = seq.v_mean0;
    const Vec3 half_g = 0.5 * seq.gravity;
    for (const Pulse& p : seq.pulses)
        if (p.time == seq.t_initial) v += seq.hbar * p.k(branch) / seq.mass;

    auto bp = contour_breakpoints(seq);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        BranchTrajectory::Segment s;
        s.t0 = bp[i];
        s.t1 = bp[i + 1];
        s.c0 = r;
        s.c1 = v;
        s.c2 = half_g;
        traj.segments.push_back(s);
        const double dt = s.t1 - s.t0;
        r = s.position_local(dt);
        v = s.velocity_local(dt);
        for (const Pulse& p : seq.pulses)
            if (p.time == s.t1 && p.time < seq.t_detect) v += seq.hbar * p.k(branch) / seq.mass;
    }
    traj.final_position = r;
    for (const Pulse& p : seq.pulses)
        if (p.time == seq.t_detect) v += seq.hbar * p.k(branch) / seq.mass;
    traj.final_velocity = v;
    return traj;
}

namespace {

const BranchTrajectory::Segment& segment_at(const BranchTrajectory& traj, double t) {
    for (const auto& s : traj.segments)
        if (t <= s.t1 || &s == &traj.segments.back()) return s;
    return traj.segments.back();
}

}  // namespace

Vec3 BranchTrajectory::position(double t) const {
    const Segment& s = segment_at(*this, t);
    return s.position_local(t - s.t0);
}

Vec3 BranchTrajectory::velocity(double t) const {
    const Segment& s = segment_at(*this, t);
    return s.velocity_local(t - s.t0);
}

void BranchTrajectory::bounding_box(Vec3& lo, Vec3& hi) const {
    lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi = -lo;
    auto take = [&](const Vec3& r) {
        lo = lo.cwiseMin(r);
        hi = hi.cwiseMax(r);
    };
    for (const auto& s : segments) {
        const double dt = s.t1 - s.t0;
        take(s.position_local(0.0));
        take(s.position_local(dt));
        // interior extremum of each quadratic component
        for (int a = 0; a < 3; ++a)
            if (s.c2[a] != 0.0) {
                double sm = -s.c1[a] / (2.0 * s.c2[a]);
                if (sm > 0.0 && sm < dt) {
                    Vec3 r = s.position_local(sm);
                    take(r);
                }
            }
    }
}

double BranchTrajectory::max_extent() const {
    Vec3 lo, hi;
    bounding_box(lo, hi);
    return (hi - lo).maxCoeff();
}

ClosureReport closure_check(const PulseSequence& seq) {
    BranchTrajectory u = unperturbed_trajectory(seq, Branch::Upper);
    BranchTrajectory l = unperturbed_trajectory(seq, Branch::Lower);
    ClosureReport rep;
    rep.delta_r = u.final_position - l.final_position;
    rep.delta_v = u.final_velocity - l.final_velocity;
    const double extent = std::max(u.max_extent(), l.max_extent());
    rep.tol_r = 1e-12 * std::max(1.0, extent);
    rep.tol_v = 1e-12 * std::max(1.0, seq.max_recoil_speed());
    rep.closed = rep.delta_r.norm() < rep.tol_r && rep.delta_v.norm() < rep.tol_v;
    return rep;
}

namespace {

// Per-branch laser term sum_l (k_l . r(t_l) + phi_l).
double laser_sum(const PulseSequence& seq, const BranchTrajectory& traj, Branch b) {
    double s = 0.0;
    for (const Pulse& p : seq.pulses) s += p.k(b).dot(traj.position(p.time)) + p.phi(b);
    return s;
}

}  // namespace

double phi0(const PulseSequence& seq) {
    ClosureReport rep = closure_check(seq);
    if (!rep.closed) {
        std::ostringstream os;
        os << "phi0: unperturbed interferometer not closed (|dr|=" << rep.delta_r.norm()
           << " m, |dv|=" << rep.delta_v.norm() << " m/s)";
        throw ClosureError(os.str());
    }
    BranchTrajectory u = unperturbed_trajectory(seq, Branch::Upper);
    BranchTrajectory l = unperturbed_trajectory(seq, Branch::Lower);

    // dS = S_u - S_l with L = m|v|^2/2 + m g.r. Both branches share segment
    // boundaries and the same c2; the action difference is integrated from
    // coefficient differences so no large-term cancellation occurs:
    //   |v_u|^2 - |v_l|^2 = (v_u - v_l).(v_u + v_l).
    double dS_over_m = 0.0;
    for (std::size_t i = 0; i < u.segments.size(); ++i) {
        const auto& su = u.segments[i];
        const auto& sl = l.segments[i];
        const double dt = su.t1 - su.t0;
        const Vec3 d1 = su.c1 - sl.c1, p1 = su.c1 + sl.c1;
        const Vec3 d2 = su.c2 - sl.c2, p2 = su.c2 + sl.c2;
        // velocity polynomials: v = c1 + 2 c2 s
        // (v_u-v_l).(v_u+v_l) = d1.p1 + 2s(d1.p2 + d2.p1) + 4s^2 d2.p2
        dS_over_m += 0.5 * (d1.dot(p1) * dt + (d1.dot(p2) + d2.dot(p1)) * dt * dt +
                            (4.0 / 3.0) * d2.dot(p2) * dt * dt * dt);
        // g.(r_u - r_l) with dr = d0 + d1 s + d2 s^2
        const Vec3 d0 = su.c0 - sl.c0;
        dS_over_m += seq.gravity.dot(d0) * dt + seq.gravity.dot(d1) * dt * dt / 2.0 +
                     seq.gravity.dot(d2) * dt * dt * dt / 3.0;
    }
    const double action_term = seq.mass * dS_over_m / seq.hbar;
    return action_term + laser_sum(seq, u, Branch::Upper) - laser_sum(seq, l, Branch::Lower);
}

}  // namespace phaseloop
