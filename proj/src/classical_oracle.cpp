#include "phaseloop/classical_oracle.hpp"

#include <cmath>
#include <sstream>

namespace phaseloop {

namespace {

// 7-component state: deviation position, deviation velocity, action increment.
struct DevState {
    Vec3 dr = Vec3::Zero();
    Vec3 dv = Vec3::Zero();
    double ds = 0.0;

    DevState& axpy(double a, const DevState& o) {
        dr += a * o.dr;
        dv += a * o.dv;
        ds += a * o.ds;
        return *this;
    }
};

struct BranchPhase {
    double phase = 0.0;  // (m v0(t_d).dr(t_d) + dS)/hbar
    Vec3 r_final = Vec3::Zero();
    Vec3 v_final = Vec3::Zero();
    Vec3 dr_final = Vec3::Zero();
    long evals = 0;
};

BranchPhase propagate_branch(const PulseSequence& seq, const Potential& pot, Branch branch,
                             const BranchTrajectory& traj, int steps_per_segment) {
    const double m = seq.mass;
    DevState y;
    long evals = 0;

    auto deriv = [&](const BranchTrajectory::Segment& seg, double s, const DevState& st) {
        DevState d;
        const double t = seg.t0 + s;
        const Vec3 r = seg.position_local(s) + st.dr;
        const Vec3 grad = pot.gradient(r, t, branch);
        if (!grad.allFinite()) {
            std::ostringstream os;
            os << "classical oracle: non-finite force on " << branch_name(branch)
               << " branch at t=" << t;
            throw EvaluationError(os.str());
        }
        ++evals;
        d.dr = st.dv;
        d.dv = -grad / m;
        d.ds = 0.5 * m * st.dv.squaredNorm() - pot.value(r, t, branch);
        return d;
    };

    for (const auto& seg : traj.segments) {
        const double h = (seg.t1 - seg.t0) / steps_per_segment;
        double s = 0.0;
        for (int i = 0; i < steps_per_segment; ++i) {
            const DevState k1 = deriv(seg, s, y);
            DevState y2 = y;
            y2.axpy(0.5 * h, k1);
            const DevState k2 = deriv(seg, s + 0.5 * h, y2);
            DevState y3 = y;
            y3.axpy(0.5 * h, k2);
            const DevState k3 = deriv(seg, s + 0.5 * h, y3);
            DevState y4 = y;
            y4.axpy(h, k3);
            const DevState k4 = deriv(seg, s + h, y4);
            y.axpy(h / 6.0, k1);
            y.axpy(h / 3.0, k2);
            y.axpy(h / 3.0, k3);
            y.axpy(h / 6.0, k4);
            s += h;
        }
        // pulses carry identical kicks on path and reference, so the
        // deviation state crosses them unchanged
    }

    BranchPhase out;
    out.phase = (m * traj.final_velocity.dot(y.dr) + y.ds) / seq.hbar;
    out.r_final = traj.final_position + y.dr;
    out.v_final = traj.final_velocity + y.dv;
    out.dr_final = y.dr;
    out.evals = evals;
    return out;
}

struct OnePass {
    double phase = 0.0;
    Vec3 delta_r = Vec3::Zero();
    Vec3 p_mean = Vec3::Zero();
    double phi_s = 0.0;
    long evals = 0;
};

OnePass run_pass(const PulseSequence& seq, const Potential& pot, double unperturbed_phase,
                 const BranchTrajectory& tu, const BranchTrajectory& tl, bool closed,
                 int steps) {
    BranchPhase up = propagate_branch(seq, pot, Branch::Upper, tu, steps);
    BranchPhase lo = propagate_branch(seq, pot, Branch::Lower, tl, steps);
    OnePass out;
    // For a closed unperturbed sequence the separation is exactly the
    // deviation difference; the raw endpoint difference would re-inject the
    // trajectory rounding, amplified by p_mean/hbar.
    out.delta_r = closed ? Vec3(up.dr_final - lo.dr_final)
                         : Vec3(up.r_final - lo.r_final);
    out.p_mean = 0.5 * seq.mass * (up.v_final + lo.v_final);
    out.phi_s = -out.p_mean.dot(out.delta_r) / seq.hbar;
    out.phase = unperturbed_phase + up.phase - lo.phase + out.phi_s;
    out.evals = up.evals + lo.evals;
    return out;
}

// Action difference + laser terms of the unperturbed sequence, without the
// closure gate (the oracle also serves deliberately opened geometries).
double unperturbed_phase(const PulseSequence& seq, const BranchTrajectory& tu,
                         const BranchTrajectory& tl) {
    double dS_over_m = 0.0;
    for (std::size_t i = 0; i < tu.segments.size(); ++i) {
        const auto& su = tu.segments[i];
        const auto& sl = tl.segments[i];
        const double dt = su.t1 - su.t0;
        const Vec3 d0 = su.c0 - sl.c0, d1 = su.c1 - sl.c1, d2 = su.c2 - sl.c2;
        const Vec3 p1 = su.c1 + sl.c1, p2 = su.c2 + sl.c2;
        dS_over_m += 0.5 * (d1.dot(p1) * dt + (d1.dot(p2) + d2.dot(p1)) * dt * dt +
                            (4.0 / 3.0) * d2.dot(p2) * dt * dt * dt);
        dS_over_m += seq.gravity.dot(d0) * dt + seq.gravity.dot(d1) * dt * dt / 2.0 +
                     seq.gravity.dot(d2) * dt * dt * dt / 3.0;
    }
    double laser = 0.0;
    for (const Pulse& p : seq.pulses)
        laser += p.k_upper.dot(tu.position(p.time)) + p.phi_upper -
                 p.k_lower.dot(tl.position(p.time)) - p.phi_lower;
    return seq.mass * dS_over_m / seq.hbar + laser;
}

}  // namespace

OracleResult classical_oracle(const PulseSequence& seq, const Potential& pot,
                              const ClassicalOracleOptions& opts) {
    seq.validate();
    if (opts.steps_per_segment < 2)
        throw ConfigError("classical oracle: steps_per_segment must be >= 2");
    const BranchTrajectory tu = unperturbed_trajectory(seq, Branch::Upper);
    const BranchTrajectory tl = unperturbed_trajectory(seq, Branch::Lower);
    const double phi_unp = unperturbed_phase(seq, tu, tl);
    const bool closed = closure_check(seq).closed;

    OnePass base = run_pass(seq, pot, phi_unp, tu, tl, closed, opts.steps_per_segment);
    OracleResult res;
    res.contrast = 1.0;
    res.evaluations = base.evals;
    if (opts.richardson) {
        OnePass fine = run_pass(seq, pot, phi_unp, tu, tl, closed, 2 * opts.steps_per_segment);
        res.evaluations += fine.evals;
        res.error_estimate = std::abs(fine.phase - base.phase);
        // RK4 is fourth order; extrapolate the halved-step pass
        res.phase = fine.phase + (fine.phase - base.phase) / 15.0;
        res.delta_r = fine.delta_r;
        res.p_mean = fine.p_mean;
        res.phi_s = fine.phi_s;
    } else {
        res.phase = base.phase;
        res.delta_r = base.delta_r;
        res.p_mean = base.p_mean;
        res.phi_s = base.phi_s;
    }
    return res;
}

}  // namespace phaseloop
