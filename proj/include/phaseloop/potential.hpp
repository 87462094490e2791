#pragma once

#include <memory>
#include <optional>

#include "phaseloop/geometry.hpp"
#include "phaseloop/types.hpp"

namespace phaseloop {

// Value and spatial-derivative tensors of a potential at one point.
struct PotentialDerivs {
    double value = 0.0;
    Vec3 grad = Vec3::Zero();
    Mat3 hess = Mat3::Zero();
    Tensor3 third = Tensor3::zero();
    Tensor4 fourth = Tensor4::zero();
};

// Branch-dependent scalar perturbation V^(alpha)(r, t) with derivatives up
// to fourth order. Branch-independent potentials ignore the branch label.
// Default derivative implementations are Richardson-refined central
// differences with step fd_step(); analytic subclasses override them.
class Potential {
  public:
    virtual ~Potential() = default;

    virtual double value(const Vec3& r, double t, Branch b) const = 0;
    virtual Vec3 gradient(const Vec3& r, double t, Branch b) const;
    virtual Mat3 hessian(const Vec3& r, double t, Branch b) const;
    virtual Tensor3 third(const Vec3& r, double t, Branch b) const;
    virtual Tensor4 fourth(const Vec3& r, double t, Branch b) const;

    virtual bool branch_dependent() const { return false; }

    // Static potentials let consumers cache spatial samples.
    virtual bool time_independent() const { return false; }

    // Finite-difference step for the default derivative implementations;
    // tied to the length scale on which the potential varies.
    double fd_step() const { return fd_step_; }
    void set_fd_step(double h);

    PotentialDerivs derivs(const Vec3& r, double t, Branch b, int order = 4) const;

  private:
    double fd_step_ = 1e-4;
};

// V = c + l.r + 1/2 Q_ij r_i r_j + 1/6 C_ijk r_i r_j r_k + 1/24 F_ijkl r_i r_j r_k r_l.
// Tensors are symmetrized on input; asymmetry beyond `asym_tol` (relative) is rejected.
struct PolynomialCoeffs {
    double constant = 0.0;
    Vec3 linear = Vec3::Zero();
    Mat3 quadratic = Mat3::Zero();
    Tensor3 cubic = Tensor3::zero();
    Tensor4 quartic = Tensor4::zero();
};

class PolynomialPotential final : public Potential {
  public:
    explicit PolynomialPotential(PolynomialCoeffs coeffs, double asym_tol = 1e-10);
    // Branch-dependent variant: separate coefficient sets per branch.
    PolynomialPotential(PolynomialCoeffs upper, PolynomialCoeffs lower, double asym_tol = 1e-10);

    double value(const Vec3& r, double t, Branch b) const override;
    Vec3 gradient(const Vec3& r, double t, Branch b) const override;
    Mat3 hessian(const Vec3& r, double t, Branch b) const override;
    Tensor3 third(const Vec3& r, double t, Branch b) const override;
    Tensor4 fourth(const Vec3& r, double t, Branch b) const override;
    bool branch_dependent() const override { return two_sided_; }
    bool time_independent() const override { return true; }

    const PolynomialCoeffs& coeffs(Branch b) const {
        return (b == Branch::Lower && two_sided_) ? lower_ : upper_;
    }

  private:
    PolynomialCoeffs upper_, lower_;
    bool two_sided_ = false;
};

// Gravity-gradient tensors of a 1/r potential expanded at radius R, with the
// z axis along the outward radial direction.
struct GravityTensors {
    Mat3 gamma1 = Mat3::Zero();        // [1/s^2]
    Tensor3 gamma2 = Tensor3::zero();  // [1/(m s^2)]
    double g = 0.0;
    double R = 0.0;
};

GravityTensors earth_gravity_tensors(double g, double R);

struct EarthTaylor {
    std::shared_ptr<PolynomialPotential> potential;
    GravityTensors tensors;
};

// Taylor polynomial of Earth's Newtonian potential around a surface point:
// m g z + 1/2 m Gamma1_ij r_i r_j + 1/6 m Gamma2_ijk r_i r_j r_k, truncated
// at `order` (2 or 3). The linear m g z term already lives in the dominant
// Hamiltonian, so it is excluded by default to avoid double counting.
EarthTaylor earth_taylor(double g, double R, int order, double mass,
                         bool include_linear = false);

// Potential and derivative tensors evaluated at the unperturbed position of
// the requested branch. `traj` must be the trajectory of `branch`.
PotentialDerivs eval_on_contour(const Potential& pot, const PulseSequence& seq,
                                const BranchTrajectory& traj, double t, Branch branch,
                                int order = 4);

}  // namespace phaseloop
