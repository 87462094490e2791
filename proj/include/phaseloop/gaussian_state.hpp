#pragma once

#include "phaseloop/types.hpp"

namespace phaseloop {

// Gaussian wave packet: phase-space mean and 6x6 central covariance in
// (r, p) blocks. Supplies every moment of the freely-evolving centered
// operator rbar(t) = dr + dp t/m that the engine needs.
struct GaussianState {
    Vec3 mean_r = Vec3::Zero();
    Vec3 mean_p = Vec3::Zero();
    Mat3 sigma_rr = Mat3::Zero();  // <dr_i dr_j>            [m^2]
    Mat3 sigma_rp = Mat3::Zero();  // sym <{dr_i, dp_j}>/2   [m kg m/s]
    Mat3 sigma_pp = Mat3::Zero();  // <dp_i dp_j>            [(kg m/s)^2]
    double mass = 0.0;
    double hbar = constants::hbar_si;

    // Throws ConfigError unless the 6x6 covariance is symmetric PSD and each
    // axis satisfies sigma_rr,jj sigma_pp,jj - sigma_rp,jj^2 >= hbar^2/4
    // (up to rounding slack).
    void validate() const;

    // <rbar_i(tau) rbar_j(tau)>, tau measured from t_initial.
    Mat3 covariance_at(double tau) const;

    // Largest axis width sqrt(cov_jj) at tau.
    double width_at(double tau) const;
};

// Two-time moment of rbar: symmetric part G and the coefficient of the
// imaginary unit on the diagonal, hbar (tau' - tau)/(2 m):
//   <rbar_i(tau) rbar_j(tau')> = G_ij + i c delta_ij,
//   [rbar_i(tau), rbar_j(tau')] = 2 i c delta_ij.
struct TwoTimeMoment {
    Mat3 G = Mat3::Zero();
    double commutator_coeff = 0.0;
};

TwoTimeMoment two_time_moment(const GaussianState& s, double tau, double tau_prime);

// Ground state of a harmonic trap: sigma_rr,ii = hbar/(2 m w_i),
// sigma_pp,ii = hbar m w_i / 2, no correlations.
GaussianState trap_ground_state(const Vec3& omega, double mass,
                                double hbar = constants::hbar_si);

}  // namespace phaseloop
