#include "phaseloop/grid_potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace phaseloop {

namespace {

const char* kMagic = "phaseloop-grid v1";

std::string read_line(std::istream& in, const char* what) {
    std::string line;
    if (!std::getline(in, line)) {
        std::ostringstream os;
        os << "grid file: unexpected end of file, expected " << what;
        throw ConfigError(os.str());
    }
    return line;
}

std::vector<std::string> tokens_after(const std::string& line, const std::string& key) {
    if (line.rfind(key, 0) != 0) {
        std::ostringstream os;
        os << "grid file: expected '" << key << " ...', got '" << line << "'";
        throw ConfigError(os.str());
    }
    std::istringstream is(line.substr(key.size()));
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

GridData read_grid(std::istream& in) {
    if (read_line(in, "header") != kMagic)
        throw ConfigError(std::string("grid file: first line must be '") + kMagic + "'");
    GridData g;
    for (const std::string& t : tokens_after(read_line(in, "axes"), "axes:")) {
        if (t == "x") g.axes.push_back(0);
        else if (t == "y") g.axes.push_back(1);
        else if (t == "z") g.axes.push_back(2);
        else throw ConfigError("grid file: axes must be from {x, y, z}");
    }
    if (g.axes.empty() || g.axes.size() > 3)
        throw ConfigError("grid file: need 1-3 axes");
    for (std::size_t i = 1; i < g.axes.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (g.axes[i] == g.axes[j]) throw ConfigError("grid file: duplicate axis");

    auto parse_doubles = [&](const char* key, std::size_t count) {
        auto toks = tokens_after(read_line(in, key), std::string(key) + ":");
        if (toks.size() != count) {
            std::ostringstream os;
            os << "grid file: '" << key << "' needs " << count << " entries";
            throw ConfigError(os.str());
        }
        std::vector<double> out;
        for (const auto& t : toks) out.push_back(std::stod(t));
        return out;
    };

    auto n_toks = tokens_after(read_line(in, "n"), "n:");
    if (n_toks.size() != g.axes.size()) throw ConfigError("grid file: 'n' count mismatch");
    std::size_t total = 1;
    for (const auto& t : n_toks) {
        const int n = std::stoi(t);
        if (n < 4) throw ConfigError("grid file: need at least 4 points per axis");
        g.n.push_back(n);
        total *= n;
    }
    g.lo = parse_doubles("min_m", g.axes.size());
    g.hi = parse_doubles("max_m", g.axes.size());
    for (std::size_t a = 0; a < g.axes.size(); ++a)
        if (!(g.hi[a] > g.lo[a])) throw ConfigError("grid file: max_m must exceed min_m");
    auto unit = tokens_after(read_line(in, "unit"), "unit:");
    if (unit.size() != 1 || unit[0] != "J") throw ConfigError("grid file: unit must be J");
    if (read_line(in, "values") != "values:")
        throw ConfigError("grid file: expected 'values:'");
    g.values.reserve(total);
    double v;
    while (in >> v) g.values.push_back(v);
    if (g.values.size() != total) {
        std::ostringstream os;
        os << "grid file: expected " << total << " values, found " << g.values.size();
        throw ConfigError(os.str());
    }
    return g;
}

GridData read_grid_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("grid file: cannot open '" + path + "'");
    return read_grid(in);
}

void write_grid(std::ostream& out, const GridData& g) {
    out << kMagic << "\n";
    out << "axes:";
    for (int a : g.axes) out << " " << "xyz"[a];
    out << "\nn:";
    for (int n : g.n) out << " " << n;
    out.precision(17);
    out << "\nmin_m:";
    for (double x : g.lo) out << " " << x;
    out << "\nmax_m:";
    for (double x : g.hi) out << " " << x;
    out << "\nunit: J\nvalues:\n";
    for (std::size_t i = 0; i < g.values.size(); ++i)
        out << g.values[i] << ((i + 1) % 8 == 0 ? "\n" : " ");
    out << "\n";
}

namespace {

// Cubic B-spline interpolation coefficients along one axis: interior stencil
// (c_{j-1} + 4 c_j + c_{j+1})/6 = f_j with natural ends (c_0 = f_0,
// c_{n-1} = f_{n-1} via the ghost convention c_{-1} = 2c_0 - c_1).
void filter_axis(std::vector<double>& data, int n, long stride, long lines) {
    std::vector<double> d(n), c(n), cp(n);
    for (long li = 0; li < lines; ++li) {
        // line starts enumerate every index combination of the other axes
        double* base = data.data() + (li / stride) * stride * n + (li % stride);
        for (int j = 0; j < n; ++j) d[j] = base[j * stride];
        // Thomas on rows: [1] ; [1 4 1]/6 ; [1]
        cp[0] = 0.0;
        c[0] = d[0];
        for (int j = 1; j < n - 1; ++j) {
            const double m = 4.0 - cp[j - 1];
            cp[j] = 1.0 / m;
            c[j] = (6.0 * d[j] - c[j - 1]) / m;
        }
        c[n - 1] = d[n - 1];
        for (int j = n - 2; j >= 1; --j) c[j] -= cp[j] * c[j + 1];
        for (int j = 0; j < n; ++j) base[j * stride] = c[j];
    }
}

void bspline_weights(double tau, int deriv, double inv_h, std::array<double, 4>& w) {
    const double t = tau;
    switch (deriv) {
        case 0:
            w[0] = (1 - t) * (1 - t) * (1 - t) / 6.0;
            w[1] = (3 * t * t * t - 6 * t * t + 4) / 6.0;
            w[2] = (-3 * t * t * t + 3 * t * t + 3 * t + 1) / 6.0;
            w[3] = t * t * t / 6.0;
            break;
        case 1:
            w[0] = -0.5 * (1 - t) * (1 - t) * inv_h;
            w[1] = (9 * t * t - 12 * t) / 6.0 * inv_h;
            w[2] = (-9 * t * t + 6 * t + 3) / 6.0 * inv_h;
            w[3] = 0.5 * t * t * inv_h;
            break;
        case 2:
            w[0] = (1 - t) * inv_h * inv_h;
            w[1] = (3 * t - 2) * inv_h * inv_h;
            w[2] = (1 - 3 * t) * inv_h * inv_h;
            w[3] = t * inv_h * inv_h;
            break;
        default:
            throw EvaluationError("grid potential: spline derivatives go up to order 2");
    }
}

}  // namespace

GridPotential::GridPotential(GridData grid) : grid_(std::move(grid)) {
    const std::size_t dim = grid_.axes.size();
    std::size_t total = 1;
    for (int n : grid_.n) total *= n;
    if (grid_.values.size() != total) throw ConfigError("grid potential: value count mismatch");
    for (double v : grid_.values)
        if (!std::isfinite(v)) throw ConfigError("grid potential: non-finite sample");
    coeff_ = grid_.values;
    h_.resize(dim);
    double min_h = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < dim; ++a) {
        h_[a] = (grid_.hi[a] - grid_.lo[a]) / (grid_.n[a] - 1);
        min_h = std::min(min_h, h_[a]);
    }
    // prefilter along each axis; last axis has stride 1
    long stride = 1;
    for (int a = int(dim) - 1; a >= 0; --a) {
        const long lines = long(total) / grid_.n[a];
        filter_axis(coeff_, grid_.n[a], stride, lines);
        stride *= grid_.n[a];
    }
    set_fd_step(0.5 * min_h);
}

namespace {

// Coefficient lookup with one layer of linear ghost extrapolation per axis,
// matching the natural-end filter above.
double coeff_with_ghosts(const std::vector<double>& coeff, const std::vector<int>& n,
                         const std::array<long, 3>& stride, std::array<int, 3> idx,
                         std::size_t dim) {
    for (std::size_t a = 0; a < dim; ++a) {
        if (idx[a] >= 0 && idx[a] < n[a]) continue;
        std::array<int, 3> edge = idx, inner = idx;
        if (idx[a] < 0) {
            edge[a] = 0;
            inner[a] = 1;
        } else {
            edge[a] = n[a] - 1;
            inner[a] = n[a] - 2;
        }
        return 2.0 * coeff_with_ghosts(coeff, n, stride, edge, dim) -
               coeff_with_ghosts(coeff, n, stride, inner, dim);
    }
    long flat = 0;
    for (std::size_t a = 0; a < dim; ++a) flat += idx[a] * stride[a];
    return coeff[flat];
}

}  // namespace

double GridPotential::eval(const Vec3& r, const std::vector<int>& deriv) const {
    const std::size_t dim = grid_.axes.size();
    std::array<int, 3> cell{};
    std::array<std::array<double, 4>, 3> w{};
    for (std::size_t a = 0; a < dim; ++a) {
        const double x = r[grid_.axes[a]];
        const double span = grid_.hi[a] - grid_.lo[a];
        if (x < grid_.lo[a] - 1e-12 * span || x > grid_.hi[a] + 1e-12 * span) {
            std::ostringstream os;
            os << "grid potential: query " << "xyz"[grid_.axes[a]] << "=" << x
               << " outside domain [" << grid_.lo[a] << ", " << grid_.hi[a] << "]";
            throw EvaluationError(os.str());
        }
        const double u = std::clamp((x - grid_.lo[a]) / h_[a], 0.0, double(grid_.n[a] - 1));
        int i = std::min(int(u), grid_.n[a] - 2);
        bspline_weights(u - i, deriv[a], 1.0 / h_[a], w[a]);
        cell[a] = i;
    }
    // strides in the flattened coefficient array
    std::array<long, 3> stride{};
    long s = 1;
    for (int a = int(dim) - 1; a >= 0; --a) {
        stride[a] = s;
        s *= grid_.n[a];
    }
    double sum = 0.0;
    std::array<int, 3> off{};
    const int lim0 = 4, lim1 = dim > 1 ? 4 : 1, lim2 = dim > 2 ? 4 : 1;
    for (off[0] = 0; off[0] < lim0; ++off[0])
        for (off[1] = 0; off[1] < lim1; ++off[1])
            for (off[2] = 0; off[2] < lim2; ++off[2]) {
                double wt = w[0][off[0]];
                if (dim > 1) wt *= w[1][off[1]];
                if (dim > 2) wt *= w[2][off[2]];
                if (wt == 0.0) continue;
                std::array<int, 3> idx{};
                for (std::size_t a = 0; a < dim; ++a) idx[a] = cell[a] - 1 + off[a];
                sum += wt * coeff_with_ghosts(coeff_, grid_.n, stride, idx, dim);
            }
    return sum;
}

double GridPotential::value(const Vec3& r, double, Branch) const {
    std::vector<int> d(grid_.axes.size(), 0);
    return eval(r, d);
}

Vec3 GridPotential::gradient(const Vec3& r, double, Branch) const {
    Vec3 g = Vec3::Zero();
    for (std::size_t a = 0; a < grid_.axes.size(); ++a) {
        std::vector<int> d(grid_.axes.size(), 0);
        d[a] = 1;
        g[grid_.axes[a]] = eval(r, d);
    }
    return g;
}

Mat3 GridPotential::hessian(const Vec3& r, double, Branch) const {
    Mat3 h = Mat3::Zero();
    const std::size_t dim = grid_.axes.size();
    for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = a; b < dim; ++b) {
            std::vector<int> d(dim, 0);
            d[a] += 1;
            d[b] += 1;
            const double v = eval(r, d);
            h(grid_.axes[a], grid_.axes[b]) = v;
            h(grid_.axes[b], grid_.axes[a]) = v;
        }
    return h;
}

}  // namespace phaseloop
