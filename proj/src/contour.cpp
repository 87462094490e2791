#include "phaseloop/contour.hpp"

#include <cmath>
#include <sstream>

namespace phaseloop {

namespace {

void check_finite(double v, Branch b, double t) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "contour integrand non-finite on " << branch_name(b) << " branch at t=" << t;
        throw EvaluationError(os.str());
    }
}

double integrate_once(const PulseSequence& seq, const ContourFn& f, int nodes) {
    const GaussLegendre& gl = gauss_legendre(nodes);
    auto bp = contour_breakpoints(seq);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double mid = 0.5 * (bp[i] + bp[i + 1]);
        const double half = 0.5 * (bp[i + 1] - bp[i]);
        double acc = 0.0;
        for (int q = 0; q < nodes; ++q) {
            const double t = mid + half * gl.nodes[q];
            const double fu = f(Branch::Upper, t);
            check_finite(fu, Branch::Upper, t);
            const double fl = f(Branch::Lower, t);
            check_finite(fl, Branch::Lower, t);
            acc += gl.weights[q] * (fu - fl);
        }
        total += half * acc;
    }
    return total;
}

// Directed contour segments: upper breakpoint intervals forward, then lower
// intervals backward. The signed Jacobian (b - a) carries the orientation.
struct DirectedSegment {
    Branch branch;
    double a, b;
};

std::vector<DirectedSegment> directed_segments(const PulseSequence& seq) {
    auto bp = contour_breakpoints(seq);
    std::vector<DirectedSegment> segs;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i)
        segs.push_back({Branch::Upper, bp[i], bp[i + 1]});
    for (std::size_t i = bp.size() - 1; i >= 1; --i)
        segs.push_back({Branch::Lower, bp[i], bp[i - 1]});
    return segs;
}

double integrate_nested_once(const PulseSequence& seq, const ContourKernel& h, int nodes) {
    const GaussLegendre& gl = gauss_legendre(nodes);
    auto segs = directed_segments(seq);
    const int n = nodes;
    // unit-interval nodes
    std::vector<double> u(n), w(n);
    for (int q = 0; q < n; ++q) {
        u[q] = 0.5 * (gl.nodes[q] + 1.0);
        w[q] = 0.5 * gl.weights[q];
    }
    double total = 0.0;
    for (std::size_t I = 0; I < segs.size(); ++I) {
        const auto& si = segs[I];
        const double ji = si.b - si.a;
        // cross blocks: inner point anywhere on an earlier segment
        for (std::size_t J = 0; J < I; ++J) {
            const auto& sj = segs[J];
            const double jj = sj.b - sj.a;
            double acc = 0.0;
            for (int qi = 0; qi < n; ++qi) {
                const double t = si.a + ji * u[qi];
                double inner = 0.0;
                for (int qj = 0; qj < n; ++qj) {
                    const double tp = sj.a + jj * u[qj];
                    const double v = h(si.branch, t, sj.branch, tp);
                    check_finite(v, sj.branch, tp);
                    inner += w[qj] * v;
                }
                acc += w[qi] * inner;
            }
            total += ji * jj * acc;
        }
        // triangular self block: contour-earlier points of the same segment
        double acc = 0.0;
        for (int qi = 0; qi < n; ++qi) {
            const double sigma = u[qi];
            const double t = si.a + ji * sigma;
            double inner = 0.0;
            for (int qj = 0; qj < n; ++qj) {
                const double tp = si.a + ji * sigma * u[qj];
                const double v = h(si.branch, t, si.branch, tp);
                check_finite(v, si.branch, tp);
                inner += w[qj] * v;
            }
            acc += w[qi] * sigma * inner;
        }
        total += ji * ji * acc;
    }
    return total;
}

}  // namespace

IntegralResult contour_integrate(const PulseSequence& seq, const ContourFn& f,
                                 const QuadOptions& opts) {
    seq.validate();
    IntegralResult res;
    res.value = integrate_once(seq, f, opts.nodes);
    if (opts.estimate_error && opts.nodes >= 4) {
        const double coarse = integrate_once(seq, f, opts.nodes / 2);
        res.error_estimate = std::abs(res.value - coarse);
    }
    return res;
}

IntegralResult contour_integrate_nested(const PulseSequence& seq, const ContourKernel& h,
                                        const QuadOptions& opts) {
    seq.validate();
    IntegralResult res;
    res.value = integrate_nested_once(seq, h, opts.nodes);
    if (opts.estimate_error && opts.nodes >= 4) {
        const double coarse = integrate_nested_once(seq, h, opts.nodes / 2);
        res.error_estimate = std::abs(res.value - coarse);
    }
    return res;
}

ContourNodes contour_nodes(const PulseSequence& seq, int nodes_per_segment) {
    const GaussLegendre& gl = gauss_legendre(nodes_per_segment);
    auto bp = contour_breakpoints(seq);
    ContourNodes out;
    for (int pass = 0; pass < 2; ++pass) {
        const Branch b = pass == 0 ? Branch::Upper : Branch::Lower;
        const double sign = pass == 0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            const double mid = 0.5 * (bp[i] + bp[i + 1]);
            const double half = 0.5 * (bp[i + 1] - bp[i]);
            for (int q = 0; q < nodes_per_segment; ++q) {
                out.t.push_back(mid + half * gl.nodes[q]);
                out.weight.push_back(sign * half * gl.weights[q]);
                out.branch.push_back(b);
            }
        }
    }
    return out;
}

}  // namespace phaseloop
