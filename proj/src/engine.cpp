#include "phaseloop/engine.hpp"

#include <cmath>
#include <sstream>

namespace phaseloop {

namespace {

void require_closed(const PulseSequence& seq) {
    ClosureReport rep = closure_check(seq);
    if (!rep.closed) {
        std::ostringstream os;
        os << "engine: unperturbed interferometer must be closed (|dr|=" << rep.delta_r.norm()
           << ", |dv|=" << rep.delta_v.norm() << ")";
        throw ClosureError(os.str());
    }
}

}  // namespace

FirstOrderPhase phase_first_order(const PulseSequence& seq, const Potential& pot,
                                  const GaussianState& state, const QuadOptions& quad) {
    require_closed(seq);
    const BranchTrajectory tu = unperturbed_trajectory(seq, Branch::Upper);
    const BranchTrajectory tl = unperturbed_trajectory(seq, Branch::Lower);
    auto pos = [&](Branch b, double t) {
        return b == Branch::Upper ? tu.position(t) : tl.position(t);
    };
    const double inv_hbar = 1.0 / seq.hbar;

    // integrands are pre-scaled by 1/hbar so quadrature sums stay O(1)
    IntegralResult v_loop = contour_integrate(
        seq, [&](Branch b, double t) { return pot.value(pos(b, t), t, b) * inv_hbar; }, quad);

    IntegralResult wp_loop = contour_integrate(
        seq,
        [&](Branch b, double t) {
            const Mat3 hess = pot.hessian(pos(b, t), t, b);
            const Mat3 cov = state.covariance_at(t - seq.t_initial);
            return hess.cwiseProduct(cov).sum() * inv_hbar;
        },
        quad);

    FirstOrderPhase out;
    out.classical = -v_loop.value;
    out.wavepacket = -0.5 * wp_loop.value;
    out.quad_error = v_loop.error_estimate + 0.5 * wp_loop.error_estimate;
    return out;
}

double phase_second_order(const PulseSequence& seq, const Potential& pot,
                          const GaussianState& state, const QuadOptions& nested) {
    require_closed(seq);
    const BranchTrajectory tu = unperturbed_trajectory(seq, Branch::Upper);
    const BranchTrajectory tl = unperturbed_trajectory(seq, Branch::Lower);
    auto pos = [&](Branch b, double t) {
        return b == Branch::Upper ? tu.position(t) : tl.position(t);
    };
    const double t_i = seq.t_initial;
    const double scale = 1.0 / (seq.hbar * seq.mass);

    // G(tau,tau') is the symmetric two-time moment of the freely evolving
    // centered packet. Same-time operator pairs (the V' V_ijk and V V'_ijk
    // terms) take G at equal times; the Hessian-Hessian pair mixes times.
    auto kernel = [&](Branch b, double t, Branch bp, double tp) {
        const Vec3 r = pos(b, t), rp = pos(bp, tp);
        const Vec3 g1 = pot.gradient(r, t, b);
        const Vec3 g1p = pot.gradient(rp, tp, bp);
        const Mat3 h2 = pot.hessian(r, t, b);
        const Mat3 h2p = pot.hessian(rp, tp, bp);
        const Tensor3 t3 = pot.third(r, t, b);
        const Tensor3 t3p = pot.third(rp, tp, bp);
        const Mat3 g_tt = two_time_moment(state, t - t_i, t - t_i).G;
        const Mat3 g_pp = two_time_moment(state, tp - t_i, tp - t_i).G;
        const Mat3 g_tp = two_time_moment(state, t - t_i, tp - t_i).G;

        double sum = g1.dot(g1p);
        sum += 0.5 * g1p.dot(t3.contract(g_tt));
        sum += 0.5 * g1.dot(t3p.contract(g_pp));
        sum += Mat3(h2 * h2p).cwiseProduct(g_tp).sum();
        return (tp - t) * sum * scale;
    };

    IntegralResult res = contour_integrate_nested(seq, kernel, nested);
    return -0.5 * res.value;
}

double contrast(const PulseSequence& seq, const Potential& pot, const GaussianState& state,
                int nodes_per_segment) {
    require_closed(seq);
    const BranchTrajectory tu = unperturbed_trajectory(seq, Branch::Upper);
    const BranchTrajectory tl = unperturbed_trajectory(seq, Branch::Lower);

    // Var = <(loop V_i rbar_i)^2>/hbar^2. With rbar(tau) = dr + dp tau/m the
    // loop collapses to a = loop V_i, b = loop V_i tau, and
    //   Var = [a.Srr.a + 2 a.Srp.b/m + b.Spp.b/m^2]/hbar^2,
    // manifestly >= 0 for a PSD covariance.
    const ContourNodes nodes = contour_nodes(seq, nodes_per_segment);
    Vec3 a = Vec3::Zero(), b = Vec3::Zero();
    for (std::size_t i = 0; i < nodes.t.size(); ++i) {
        const Branch br = nodes.branch[i];
        const double t = nodes.t[i];
        const Vec3 r = br == Branch::Upper ? tu.position(t) : tl.position(t);
        const Vec3 g = pot.gradient(r, t, br);
        if (!g.allFinite()) throw EvaluationError("contrast: non-finite potential gradient");
        a += nodes.weight[i] * g;
        b += nodes.weight[i] * (t - seq.t_initial) * g;
    }
    const double m = seq.mass;
    double var = a.dot(state.sigma_rr * a) + 2.0 / m * a.dot(state.sigma_rp * b) +
                 b.dot(state.sigma_pp * b) / (m * m);
    var /= seq.hbar * seq.hbar;
    return std::exp(-0.5 * std::max(var, 0.0));
}

PhaseBreakdown phase_total(const PulseSequence& seq, const Potential& pot,
                           const GaussianState& state, const EngineOptions& opts) {
    if (opts.max_order < 1 || opts.max_order > 2) {
        std::ostringstream os;
        os << "phase_total: order " << opts.max_order
           << " is out of scope (the expansion is truncated at the nested second-order term)";
        throw ConfigError(os.str());
    }
    PhaseBreakdown out;
    out.phi0 = phi0(seq);

    PotentialScales scales = probe_scales(seq, pot, opts.probe);
    out.validity = validity_report(scales, state, seq, opts.thresholds);
    if (out.validity.refuse && opts.validity_action == ValidityAction::Refuse) {
        std::ostringstream os;
        os << "phase_total: validity gates tripped (epsilon=" << out.validity.epsilon
           << ", d/xi=" << out.validity.d_over_xi
           << ", eta d/xi=" << out.validity.eta_d_over_xi << " vs refuse threshold "
           << opts.thresholds.refuse << "); pass the override flag to proceed";
        throw ValidityRefusal(os.str());
    }

    FirstOrderPhase first = phase_first_order(seq, pot, state, opts.quad);
    out.phi1_classical = first.classical;
    out.phi1_wavepacket = first.wavepacket;
    out.validity.phi1_wavepacket_magnitude = std::abs(first.wavepacket);
    if (opts.max_order >= 2) out.phi2 = phase_second_order(seq, pot, state, opts.nested);
    out.contrast = contrast(seq, pot, state, opts.quad.nodes);
    return out;
}

MzCubicReference mz_cubic_reference(double T, double v_r, double g, double z_i, double omega,
                                    double R, double mass, double hbar) {
    MzCubicReference ref;
    ref.f_rr = v_r * T * T;
    ref.f_rp = v_r * T * T * T;
    ref.f_pp = 7.0 / 6.0 * v_r * T * T * T * T;
    const double T2 = T * T, T4 = T2 * T2;
    ref.f_phi = 31.0 * g * g * v_r * T4 * T2 / 20.0 -
                v_r * g * T4 * (14.0 * z_i + 9.0 * v_r * T) / 4.0 +
                v_r * T2 * (v_r * v_r * T2 + 3.0 * v_r * T * z_i + 3.0 * z_i * z_i);
    ref.phase_eq_bracket =
        -(g / (R * R)) * (mass / hbar * ref.f_phi +
                          v_r * T2 / omega * (1.5 - 7.0 / 8.0 * omega * omega * T2));
    return ref;
}

}  // namespace phaseloop
