#pragma once

#include <Eigen/Core>
#include <array>
#include <stdexcept>
#include <string>

namespace phaseloop {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class Branch { Upper, Lower };

inline const char* branch_name(Branch b) { return b == Branch::Upper ? "upper" : "lower"; }

// Fully symmetric rank-3 tensor over R^3 (third spatial derivatives).
struct Tensor3 {
    std::array<double, 27> v{};

    double& operator()(int i, int j, int k) { return v[9 * i + 3 * j + k]; }
    double operator()(int i, int j, int k) const { return v[9 * i + 3 * j + k]; }

    static Tensor3 zero() { return Tensor3{}; }

    Tensor3 symmetrized() const;
    double max_asymmetry() const;

    // w_i = T_ijk M_jk
    Vec3 contract(const Mat3& m) const {
        Vec3 w = Vec3::Zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) w[i] += (*this)(i, j, k) * m(j, k);
        return w;
    }

    Mat3 contract(const Vec3& r) const {
        Mat3 m = Mat3::Zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) m(i, j) += (*this)(i, j, k) * r[k];
        return m;
    }

    double contract(const Vec3& a, const Vec3& b, const Vec3& c) const {
        double s = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) s += (*this)(i, j, k) * a[i] * b[j] * c[k];
        return s;
    }

    Tensor3& operator*=(double s) {
        for (auto& x : v) x *= s;
        return *this;
    }
    friend Tensor3 operator*(double s, Tensor3 t) { return t *= s; }
};

// Fully symmetric rank-4 tensor over R^3 (fourth spatial derivatives).
struct Tensor4 {
    std::array<double, 81> v{};

    double& operator()(int i, int j, int k, int l) { return v[27 * i + 9 * j + 3 * k + l]; }
    double operator()(int i, int j, int k, int l) const { return v[27 * i + 9 * j + 3 * k + l]; }

    static Tensor4 zero() { return Tensor4{}; }

    Tensor4 symmetrized() const;
    double max_asymmetry() const;

    Tensor3 contract(const Vec3& r) const {
        Tensor3 t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) t(i, j, k) += (*this)(i, j, k, l) * r[l];
        return t;
    }

    Tensor4& operator*=(double s) {
        for (auto& x : v) x *= s;
        return *this;
    }
    friend Tensor4 operator*(double s, Tensor4 t) { return t *= s; }
};

struct ClosureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown by the engine when validity gates trip and no override is set.
struct ValidityRefusal : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace constants {
inline constexpr double hbar_si = 1.054571817e-34;   // J s
inline constexpr double mass_rb87 = 1.44316060e-25;  // kg
}  // namespace constants

}  // namespace phaseloop
