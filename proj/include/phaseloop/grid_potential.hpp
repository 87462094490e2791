#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "phaseloop/potential.hpp"

namespace phaseloop {

// Uniform rectilinear sample grid of a static potential over 1-3 of the
// axes {x, y, z}; the potential is constant along axes not present.
// Storage is row-major with the last listed axis fastest.
struct GridData {
    std::vector<int> axes;       // subset of {0,1,2}, in storage order
    std::vector<int> n;          // points per axis (>= 4)
    std::vector<double> lo, hi;  // axis ranges [m]
    std::vector<double> values;  // [J]
};

// Text format (strict; see docs/grid_format.md):
//   phaseloop-grid v1
//   axes: z
//   n: 257
//   min_m: -25.0
//   max_m: 1.0
//   unit: J
//   values:
//   <whitespace-separated doubles>
GridData read_grid(std::istream& in);
GridData read_grid_file(const std::string& path);
void write_grid(std::ostream& out, const GridData& grid);

// Tensor-product cubic B-spline interpolant (C^2): value, gradient and
// Hessian are spline derivatives; third/fourth derivatives fall back to the
// base-class finite differences of the analytic Hessian. Queries outside the
// grid domain throw EvaluationError.
class GridPotential final : public Potential {
  public:
    explicit GridPotential(GridData grid);

    double value(const Vec3& r, double t, Branch b) const override;
    Vec3 gradient(const Vec3& r, double t, Branch b) const override;
    Mat3 hessian(const Vec3& r, double t, Branch b) const override;
    bool time_independent() const override { return true; }

    const GridData& data() const { return grid_; }

  private:
    // derivative order per active axis: 0, 1 or 2
    double eval(const Vec3& r, const std::vector<int>& deriv) const;

    GridData grid_;
    std::vector<double> coeff_;           // B-spline coefficients, same layout
    std::vector<double> h_;               // spacing per active axis
};

}  // namespace phaseloop
