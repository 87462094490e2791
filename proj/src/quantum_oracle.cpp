#include "phaseloop/quantum_oracle.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <vector>

namespace phaseloop {

double circular_distance(double a, double b) {
    double d = std::fmod(a - b, 2.0 * M_PI);
    if (d > M_PI) d -= 2.0 * M_PI;
    if (d < -M_PI) d += 2.0 * M_PI;
    return std::abs(d);
}

namespace {

using cplx = std::complex<double>;

struct Grid {
    double lo = 0.0;
    double dz = 0.0;
    int n = 0;
    std::vector<double> z;
    std::vector<double> k2;  // wave-number squared in FFT ordering

    void build(double lo_, double hi_, int n_) {
        lo = lo_;
        n = n_;
        dz = (hi_ - lo_) / n_;
        z.resize(n);
        k2.resize(n);
        for (int j = 0; j < n; ++j) z[j] = lo + j * dz;
        const double dk = 2.0 * M_PI / (n * dz);
        for (int j = 0; j < n; ++j) {
            const double kj = (j <= n / 2 ? j : j - n) * dk;
            k2[j] = kj * kj;
        }
    }
};

struct FftPlans {
    fftw_plan fwd = nullptr, bwd = nullptr;
    std::vector<cplx> buf;

    explicit FftPlans(int n) : buf(n) {
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        fwd = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPlans() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
};

struct Propagator {
    const PulseSequence& seq;
    const Potential& pot;
    const Grid& grid;
    FftPlans& fft;
    Branch branch;
    const QuantumGridOptions& opts;
    Vec3 r_perp0, v_perp0;  // transverse mean path: V is sampled along it

    bool static_potential() const {
        return pot.time_independent() && v_perp0.head<2>().norm() == 0.0;
    }

    double potential_at(double z, double t) const {
        Vec3 r = r_perp0 + (t - seq.t_initial) * v_perp0;
        r[2] = z;
        // dominant linear-gravity part plus the perturbation
        return -seq.mass * seq.gravity[2] * z + pot.value(r, t, branch);
    }

    void apply_pulse(std::vector<cplx>& psi, const Pulse& p) const {
        const double kz = p.k(branch)[2];
        const double phi = p.phi(branch);
        if (kz == 0.0 && phi == 0.0) return;
        for (int j = 0; j < grid.n; ++j)
            psi[j] *= std::polar(1.0, kz * grid.z[j] + phi);
    }

    // reusable per-substep factors for a fixed dt
    struct Factors {
        std::vector<cplx> vhalf;  // exp(-i V dt / 2 hbar), empty when V is time dependent
        std::vector<cplx> kin;    // exp(-i hbar k^2 dt / 2 m)
        double dt = 0.0;
    };

    Factors make_factors(double dt) const {
        Factors f;
        f.dt = dt;
        f.kin.resize(grid.n);
        const double ck = seq.hbar * dt / (2.0 * seq.mass);
        for (int j = 0; j < grid.n; ++j) f.kin[j] = std::polar(1.0, -ck * grid.k2[j]);
        if (static_potential()) {
            f.vhalf.resize(grid.n);
            const double cv = 0.5 * dt / seq.hbar;
            for (int j = 0; j < grid.n; ++j)
                f.vhalf[j] = std::polar(1.0, -cv * potential_at(grid.z[j], seq.t_initial));
        }
        return f;
    }

    void strang_step(std::vector<cplx>& psi, double t, const Factors& f) const {
        auto& buf = fft.buf;
        if (f.vhalf.empty()) {
            const double tm = t + 0.5 * f.dt;
            const double cv = 0.5 * f.dt / seq.hbar;
            std::vector<cplx> vh(grid.n);
            for (int j = 0; j < grid.n; ++j)
                vh[j] = std::polar(1.0, -cv * potential_at(grid.z[j], tm));
            for (int j = 0; j < grid.n; ++j) buf[j] = psi[j] * vh[j];
            fftw_execute(fft.fwd);
            for (int j = 0; j < grid.n; ++j) buf[j] *= f.kin[j];
            fftw_execute(fft.bwd);
            const double inv_n = 1.0 / grid.n;
            for (int j = 0; j < grid.n; ++j) psi[j] = buf[j] * inv_n * vh[j];
        } else {
            for (int j = 0; j < grid.n; ++j) buf[j] = psi[j] * f.vhalf[j];
            fftw_execute(fft.fwd);
            for (int j = 0; j < grid.n; ++j) buf[j] *= f.kin[j];
            fftw_execute(fft.bwd);
            const double inv_n = 1.0 / grid.n;
            for (int j = 0; j < grid.n; ++j) psi[j] = buf[j] * inv_n * f.vhalf[j];
        }
    }

    void snapshot(const std::vector<cplx>& psi, const std::string& path) const {
        std::ofstream os(path);
        os.precision(17);
        os << "# z_m re_psi im_psi\n";
        for (int j = 0; j < grid.n; ++j)
            os << grid.z[j] << " " << psi[j].real() << " " << psi[j].imag() << "\n";
    }

    std::vector<cplx> run(const std::vector<cplx>& psi0, int steps_per_segment) const {
        std::vector<cplx> psi = psi0;
        for (const Pulse& p : seq.pulses)
            if (p.time == seq.t_initial) apply_pulse(psi, p);
        // Forest-Ruth composition weights (order 4); order 2 is one plain step
        static const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
        static const double w0 = 1.0 - 2.0 * w1;
        auto bp = contour_breakpoints(seq);
        for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
            const double dt = (bp[s + 1] - bp[s]) / steps_per_segment;
            std::vector<std::pair<double, Factors>> sub;  // (weight, factors)
            if (opts.split_order == 2) {
                sub.emplace_back(1.0, make_factors(dt));
            } else {
                Factors f1 = make_factors(w1 * dt);
                sub.emplace_back(w1, f1);
                sub.emplace_back(w0, make_factors(w0 * dt));
                sub.emplace_back(w1, std::move(f1));
            }
            double t = bp[s];
            for (int i = 0; i < steps_per_segment; ++i) {
                double tt = t;
                for (const auto& [w, f] : sub) {
                    strang_step(psi, tt, f);
                    tt += w * dt;
                }
                t += dt;
            }
            for (const Pulse& p : seq.pulses)
                if (p.time == bp[s + 1]) apply_pulse(psi, p);
            for (const auto& [time, path] : opts.snapshot_times)
                if (std::abs(time - bp[s + 1]) < 1e-12)
                    snapshot(psi, path + "." + branch_name(branch));
        }
        return psi;
    }
};

struct OverlapOut {
    double contrast = 0.0;
    double phase = 0.0;
    double norm_drift = 0.0;
};

OverlapOut run_both(const PulseSequence& seq, const Potential& pot, const GaussianState& state,
                    const QuantumGridOptions& opts, int n_points, int steps) {
    // spatial domain: branch excursions padded by wave-packet widths
    const BranchTrajectory tu = unperturbed_trajectory(seq, Branch::Upper);
    const BranchTrajectory tl = unperturbed_trajectory(seq, Branch::Lower);
    Vec3 lo_u, hi_u, lo_l, hi_l;
    tu.bounding_box(lo_u, hi_u);
    tl.bounding_box(lo_l, hi_l);
    const double zmin = std::min(lo_u[2], lo_l[2]);
    const double zmax = std::max(hi_u[2], hi_l[2]);
    const double width = std::max(state.width_at(0.0),
                                  state.width_at(seq.t_detect - seq.t_initial));
    const double pad =
        std::max(opts.pad_widths * width, opts.pad_fraction * std::max(zmax - zmin, 1e-300));
    const double lo = zmin - pad, hi = zmax + pad;

    Grid grid;
    grid.build(lo, hi, n_points);
    FftPlans fft(n_points);

    // initial packet: per-axis pure Gaussian along z
    const double s2 = state.sigma_rr(2, 2);
    const double srp = state.sigma_rp(2, 2);
    const double spp = state.sigma_pp(2, 2);
    const double pure = (state.hbar * state.hbar / 4.0 + srp * srp) / s2;
    if (std::abs(spp - pure) > 1e-6 * spp)
        throw ConfigError(
            "quantum oracle: state is not pure along z (sigma_pp_zz != (hbar^2/4 + "
            "sigma_rp_zz^2)/sigma_rr_zz)");
    const double z0 = state.mean_r[2];
    const double p0 = state.mean_p[2];
    const cplx a = cplx(1.0, -2.0 * srp / state.hbar) / (4.0 * s2);
    std::vector<cplx> psi0(grid.n);
    const double norm = std::pow(2.0 * M_PI * s2, -0.25);
    for (int j = 0; j < grid.n; ++j) {
        const double zb = grid.z[j] - z0;
        psi0[j] = norm * std::exp(-a * zb * zb + cplx(0.0, p0 * zb / state.hbar));
    }

    Propagator prop_u{seq, pot, grid, fft, Branch::Upper, opts,
                      Vec3(state.mean_r[0], state.mean_r[1], 0.0),
                      Vec3(state.mean_p[0] / state.mass, state.mean_p[1] / state.mass, 0.0)};
    Propagator prop_l = prop_u;
    prop_l.branch = Branch::Lower;

    std::vector<cplx> psi_u = prop_u.run(psi0, steps);
    std::vector<cplx> psi_l = prop_l.run(psi0, steps);

    auto norm_of = [&](const std::vector<cplx>& psi) {
        double s = 0.0;
        for (const cplx& c : psi) s += std::norm(c);
        return s * grid.dz;
    };
    cplx overlap = 0.0;
    for (int j = 0; j < grid.n; ++j) overlap += std::conj(psi_l[j]) * psi_u[j];
    overlap *= grid.dz;

    OverlapOut out;
    out.contrast = std::abs(overlap);
    out.phase = std::arg(overlap);
    out.norm_drift =
        std::max(std::abs(norm_of(psi_u) - 1.0), std::abs(norm_of(psi_l) - 1.0));
    return out;
}

}  // namespace

OracleResult quantum_oracle_1d(const PulseSequence& seq, const Potential& pot,
                               const GaussianState& state, const QuantumGridOptions& opts) {
    seq.validate();
    state.validate();
    for (const Pulse& p : seq.pulses)
        if (p.k_upper.head<2>().norm() != 0.0 || p.k_lower.head<2>().norm() != 0.0)
            throw ConfigError("quantum oracle: kicks must be along z for the 1-D reduction");
    if (seq.gravity.head<2>().norm() != 0.0)
        throw ConfigError("quantum oracle: gravity must be along z for the 1-D reduction");
    if (std::abs(state.sigma_rp(2, 0)) + std::abs(state.sigma_rp(2, 1)) +
            std::abs(state.sigma_rp(0, 2)) + std::abs(state.sigma_rp(1, 2)) +
            std::abs(state.sigma_rr(2, 0)) + std::abs(state.sigma_rr(2, 1)) +
            std::abs(state.sigma_pp(2, 0)) + std::abs(state.sigma_pp(2, 1)) !=
        0.0)
        throw ConfigError("quantum oracle: z axis must be uncorrelated with x/y");
    if (opts.n_points < 16 || (opts.n_points & (opts.n_points - 1)) != 0)
        throw ConfigError("quantum oracle: n_points must be a power of two >= 16");

    OverlapOut fine = run_both(seq, pot, state, opts, opts.n_points, opts.steps_per_segment);
    OracleResult res;
    res.phase = fine.phase;
    res.contrast = fine.contrast;
    res.norm_drift = fine.norm_drift;
    if (res.norm_drift > opts.norm_tol) {
        std::ostringstream os;
        os << "quantum oracle: norm leakage " << res.norm_drift << " exceeds " << opts.norm_tol
           << " (grid too small?)";
        throw ConvergenceError(os.str());
    }
    if (opts.convergence_check) {
        // coarsened companion run: if halving the resolution barely moves the
        // phase, refining it moves it far less
        OverlapOut coarse =
            run_both(seq, pot, state, opts, opts.n_points / 2, opts.steps_per_segment / 2);
        res.convergence_dphi = circular_distance(fine.phase, coarse.phase);
        if (res.convergence_dphi > opts.conv_tol) {
            std::ostringstream os;
            os << "quantum oracle: not converged (phase changes by " << res.convergence_dphi
               << " rad under refinement, tol " << opts.conv_tol << ")";
            throw ConvergenceError(os.str());
        }
    }
    return res;
}

}  // namespace phaseloop
