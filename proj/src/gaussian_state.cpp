#include "phaseloop/gaussian_state.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace phaseloop {

void GaussianState::validate() const {
    if (!(mass > 0.0)) throw ConfigError("gaussian state: mass must be positive");
    if (!(hbar > 0.0)) throw ConfigError("gaussian state: hbar must be positive");
    const double sym_tol = 1e-12;
    auto check_sym = [&](const Mat3& m, const char* name) {
        const double s = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
        if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * s) {
            std::ostringstream os;
            os << "gaussian state: " << name << " block is not symmetric";
            throw ConfigError(os.str());
        }
    };
    check_sym(sigma_rr, "sigma_rr");
    check_sym(sigma_pp, "sigma_pp");

    Eigen::Matrix<double, 6, 6> full;
    full.topLeftCorner<3, 3>() = sigma_rr;
    full.topRightCorner<3, 3>() = sigma_rp;
    full.bottomLeftCorner<3, 3>() = sigma_rp.transpose();
    full.bottomRightCorner<3, 3>() = sigma_pp;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(full);
    const double scale = std::max(full.cwiseAbs().maxCoeff(), 1e-300);
    if (es.eigenvalues().minCoeff() < -1e-9 * scale)
        throw ConfigError("gaussian state: covariance is not positive semidefinite");

    for (int j = 0; j < 3; ++j) {
        const double det = sigma_rr(j, j) * sigma_pp(j, j) - sigma_rp(j, j) * sigma_rp(j, j);
        const double bound = hbar * hbar / 4.0;
        if (det < bound * (1.0 - 1e-9)) {
            std::ostringstream os;
            os << "gaussian state: axis " << j
               << " violates the uncertainty bound (det=" << det << ", hbar^2/4=" << bound << ")";
            throw ConfigError(os.str());
        }
    }
}

Mat3 GaussianState::covariance_at(double tau) const {
    return Mat3(sigma_rr + (tau / mass) * (sigma_rp + sigma_rp.transpose()) +
                (tau * tau / (mass * mass)) * sigma_pp);
}

double GaussianState::width_at(double tau) const {
    return std::sqrt(covariance_at(tau).diagonal().maxCoeff());
}

TwoTimeMoment two_time_moment(const GaussianState& s, double tau, double tau_prime) {
    TwoTimeMoment m;
    m.G = Mat3(s.sigma_rr + (tau_prime / s.mass) * s.sigma_rp +
               (tau / s.mass) * s.sigma_rp.transpose() +
               (tau * tau_prime / (s.mass * s.mass)) * s.sigma_pp);
    m.commutator_coeff = s.hbar * (tau_prime - tau) / (2.0 * s.mass);
    return m;
}

GaussianState trap_ground_state(const Vec3& omega, double mass, double hbar) {
    if (!(omega.minCoeff() > 0.0))
        throw ConfigError("trap_ground_state: frequencies must be positive");
    if (!(mass > 0.0)) throw ConfigError("trap_ground_state: mass must be positive");
    GaussianState s;
    s.mass = mass;
    s.hbar = hbar;
    for (int j = 0; j < 3; ++j) {
        s.sigma_rr(j, j) = hbar / (2.0 * mass * omega[j]);
        s.sigma_pp(j, j) = hbar * mass * omega[j] / 2.0;
    }
    return s;
}

}  // namespace phaseloop
