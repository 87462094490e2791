#pragma once

#include <optional>
#include <vector>

#include "phaseloop/types.hpp"

namespace phaseloop {

// A laser pulse: instantaneous momentum kick hbar*k and phase imprint
// exp(+i(k.r + phi)) on each branch. A branch with no kick carries k = 0.
struct Pulse {
    double time = 0.0;
    Vec3 k_upper = Vec3::Zero();
    Vec3 k_lower = Vec3::Zero();
    double phi_upper = 0.0;
    double phi_lower = 0.0;

    const Vec3& k(Branch b) const { return b == Branch::Upper ? k_upper : k_lower; }
    double phi(Branch b) const { return b == Branch::Upper ? phi_upper : phi_lower; }
};

// Interferometer timing, kicks, initial means and constants.
// The dominant Hamiltonian is p^2/2m - m g.r plus the pulse potentials,
// i.e. gravity is the acceleration vector (0,0,-g) for a standard drop.
struct PulseSequence {
    double t_initial = 0.0;
    double t_detect = 0.0;
    std::vector<Pulse> pulses;  // strictly increasing times in [t_initial, t_detect]
    double mass = 0.0;
    double hbar = constants::hbar_si;
    Vec3 gravity = Vec3::Zero();  // acceleration vector [m/s^2]
    Vec3 r_mean0 = Vec3::Zero();
    Vec3 v_mean0 = Vec3::Zero();

    void validate() const;  // throws ConfigError on bad timing/mass/hbar

    // Characteristic interferometer time, (t_detect - t_initial)/2 unless overridden.
    std::optional<double> T_override;
    double characteristic_time() const {
        return T_override ? *T_override : 0.5 * (t_detect - t_initial);
    }

    double max_recoil_speed() const;  // max_l |hbar k_l|/m over branches
};

struct MachZehnderParams {
    double T = 0.0;               // pulse spacing [s]
    double k = 0.0;               // effective wave number along +z [rad/m]
    double mass = 0.0;
    double g = 0.0;               // downward gravitational acceleration (>= 0)
    std::array<double, 3> laser_phases{0.0, 0.0, 0.0};
    double hbar = constants::hbar_si;
    double z_initial = 0.0;
    double v_initial = 0.0;       // initial z velocity
    std::optional<double> t_detect;  // default 2T
};

// pi/2 - pi - pi/2 at t = 0, T, 2T. Upper branch is kicked first (+k at 0,
// -k at T); lower branch gets +k at T, -k at 2T. Laser phases follow the
// kick direction: a -k kick imprints -phi.
PulseSequence mach_zehnder(const MachZehnderParams& p);

// Piecewise-quadratic classical path of one branch under the dominant
// Hamiltonian; exact polynomial coefficients, no numerical integration.
struct BranchTrajectory {
    struct Segment {
        double t0 = 0.0, t1 = 0.0;
        Vec3 c0 = Vec3::Zero(), c1 = Vec3::Zero(), c2 = Vec3::Zero();  // r(s) = c0 + c1 s + c2 s^2, s = t - t0

        Vec3 position_local(double s) const { return c0 + s * c1 + s * s * c2; }
        Vec3 velocity_local(double s) const { return c1 + 2.0 * s * c2; }
    };

    Branch branch = Branch::Upper;
    std::vector<Segment> segments;
    Vec3 final_position = Vec3::Zero();  // at t_detect
    Vec3 final_velocity = Vec3::Zero();  // post any pulse at t_detect

    Vec3 position(double t) const;  // t in [t_initial, t_detect]
    Vec3 velocity(double t) const;  // within-segment velocity (pre-kick at boundaries)

    // Componentwise min/max of r(t) over the whole trajectory.
    void bounding_box(Vec3& lo, Vec3& hi) const;
    double max_extent() const;
};

BranchTrajectory unperturbed_trajectory(const PulseSequence& seq, Branch branch);

struct ClosureReport {
    Vec3 delta_r = Vec3::Zero();  // r_u(t_d) - r_l(t_d)
    Vec3 delta_v = Vec3::Zero();
    bool closed = false;
    double tol_r = 0.0, tol_v = 0.0;
};

ClosureReport closure_check(const PulseSequence& seq);

// Phase of the unperturbed interferometer: exact action difference of the
// polynomial branch trajectories plus per-branch laser terms k.r + phi.
// Sign convention: phase = Phi_upper - Phi_lower (overlap <psi_l|psi_u>),
// so the standard drop MZ with k up and gravity down gives -k g T^2.
// Throws ClosureError when the unperturbed sequence is not closed.
double phi0(const PulseSequence& seq);

// Inter-pulse breakpoints t_initial = b_0 < ... < b_n = t_detect.
std::vector<double> contour_breakpoints(const PulseSequence& seq);

}  // namespace phaseloop
