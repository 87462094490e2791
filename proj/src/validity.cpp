#include "phaseloop/validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phaseloop {

namespace {

struct SamplePoint {
    double t;
    Branch branch;
    int segment;
};

}  // namespace

PotentialScales probe_scales(const PulseSequence& seq, const Potential& pot,
                             const ProbeOptions& opts) {
    seq.validate();
    if (opts.samples_per_segment < 2)
        throw ConfigError("probe_scales: need at least 2 samples per segment");
    const BranchTrajectory traj_u = unperturbed_trajectory(seq, Branch::Upper);
    const BranchTrajectory traj_l = unperturbed_trajectory(seq, Branch::Lower);
    auto pos = [&](Branch b, double t) {
        return b == Branch::Upper ? traj_u.position(t) : traj_l.position(t);
    };
    auto value = [&](Branch b, double t) {
        const double v = pot.value(pos(b, t), t, b);
        if (!std::isfinite(v)) throw EvaluationError("probe_scales: non-finite potential value");
        return v;
    };

    const auto bp = contour_breakpoints(seq);
    const int n = opts.samples_per_segment;

    PotentialScales out;
    double vmax = -std::numeric_limits<double>::infinity();
    double vmin = std::numeric_limits<double>::infinity();
    double dbr_max = 0.0;
    double grad2_sum = 0.0, hess2_sum = 0.0;
    long grad_count = 0;
    SamplePoint at_max{}, at_min{}, at_dbr{};

    for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
        const double dt = (bp[s + 1] - bp[s]) / (n - 1);
        for (int i = 0; i < n; ++i) {
            const double t = bp[s] + i * dt;
            const double vu = value(Branch::Upper, t);
            const double vl = value(Branch::Lower, t);
            if (vu > vmax) { vmax = vu; at_max = {t, Branch::Upper, int(s)}; }
            if (vl > vmax) { vmax = vl; at_max = {t, Branch::Lower, int(s)}; }
            if (vu < vmin) { vmin = vu; at_min = {t, Branch::Upper, int(s)}; }
            if (vl < vmin) { vmin = vl; at_min = {t, Branch::Lower, int(s)}; }
            if (std::abs(vu - vl) > dbr_max) { dbr_max = std::abs(vu - vl); at_dbr = {t, Branch::Upper, int(s)}; }
            for (Branch b : {Branch::Upper, Branch::Lower}) {
                grad2_sum += pot.gradient(pos(b, t), t, b).squaredNorm();
                hess2_sum += pot.hessian(pos(b, t), t, b).squaredNorm();
                ++grad_count;
            }
        }
    }

    if (opts.refine_extrema) {
        // one refinement pass in a +-1 coarse-step window around each arg-max
        auto refine = [&](const SamplePoint& p, auto&& update) {
            const double dt = (bp[p.segment + 1] - bp[p.segment]) / (n - 1);
            const double lo = std::max(bp[p.segment], p.t - dt);
            const double hi = std::min(bp[p.segment + 1], p.t + dt);
            for (int i = 0; i < n; ++i) {
                const double t = lo + (hi - lo) * i / (n - 1);
                update(t);
            }
        };
        refine(at_max, [&](double t) {
            vmax = std::max({vmax, value(Branch::Upper, t), value(Branch::Lower, t)});
        });
        refine(at_min, [&](double t) {
            vmin = std::min({vmin, value(Branch::Upper, t), value(Branch::Lower, t)});
        });
        refine(at_dbr, [&](double t) {
            dbr_max = std::max(dbr_max, std::abs(value(Branch::Upper, t) - value(Branch::Lower, t)));
        });
    }

    out.delta_v_extremal = vmax - vmin;
    out.delta_v_branch = dbr_max;
    out.grad_rms = std::sqrt(grad2_sum / grad_count);
    out.hess_rms = std::sqrt(hess2_sum / grad_count);
    out.xi = out.grad_rms > 0.0 ? out.delta_v_extremal / out.grad_rms
                                : std::numeric_limits<double>::infinity();
    out.scale_consistency_n2 = (out.delta_v_extremal > 0.0 && std::isfinite(out.xi))
                                   ? out.xi * out.xi * out.hess_rms / out.delta_v_extremal
                                   : 0.0;
    return out;
}

ValidityReport validity_report(const PotentialScales& scales, const GaussianState& state,
                               const PulseSequence& seq, const ValidityThresholds& thresholds,
                               std::optional<double> d_override,
                               std::optional<double> T_override) {
    ValidityReport rep;
    rep.scales = scales;
    rep.thresholds = thresholds;
    rep.T = T_override ? *T_override : seq.characteristic_time();
    rep.d = d_override ? *d_override : state.width_at(seq.t_detect - seq.t_initial);

    const double xi2 = scales.xi * scales.xi;
    rep.epsilon = std::isfinite(scales.xi) && xi2 > 0.0
                      ? scales.delta_v_extremal * rep.T * rep.T / (xi2 * seq.mass)
                      : 0.0;
    rep.eta = scales.delta_v_branch * rep.T / seq.hbar;
    rep.d_over_xi = std::isfinite(scales.xi) ? rep.d / scales.xi : 0.0;
    rep.eta_d_over_xi = rep.eta * rep.d_over_xi;

    const double worst = std::max({rep.epsilon, rep.d_over_xi, rep.eta_d_over_xi});
    rep.warn = worst > thresholds.warn;
    rep.refuse = worst > thresholds.refuse;
    return rep;
}

}  // namespace phaseloop
