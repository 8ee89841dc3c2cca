#include "dynn/oracle.hpp"
#include "dynn/error.hpp"

#include <cmath>
#include <sstream>

namespace dynn::oracle {

namespace {

struct Propagator {
    double h;
    Matrix phi, g_start, g_end; // x1 = phi x0 + g_start u0 + g_end u1
};

Propagator make_propagator(const StateSpace& ss, double h, Interpolation mode) {
    const Index n = ss.states(), m = ss.inputs();
    Propagator p;
    p.h = h;
    if (mode == Interpolation::linear) {
        Matrix big = Matrix::Zero(n + 2 * m, n + 2 * m);
        big.topLeftCorner(n, n) = ss.a;
        big.block(0, n, n, m) = ss.b;
        big.block(n, n + m, m, m).setIdentity();
        const Matrix e = linalg::matrix_exponential(big, h);
        p.phi = e.topLeftCorner(n, n);
        const Matrix g1 = e.block(0, n, n, m);
        const Matrix g2 = e.block(0, n + m, n, m);
        p.g_start = g1 - g2 / h;
        p.g_end = g2 / h;
    } else {
        Matrix big = Matrix::Zero(n + m, n + m);
        big.topLeftCorner(n, n) = ss.a;
        big.topRightCorner(n, m) = ss.b;
        const Matrix e = linalg::matrix_exponential(big, h);
        p.phi = e.topLeftCorner(n, n);
        p.g_start = e.topRightCorner(n, m);
        p.g_end = Matrix::Zero(n, m);
    }
    return p;
}

} // namespace

LsimResult lsim_exact(const StateSpace& ss, const std::vector<double>& times, const Matrix& u_samples, Interpolation mode) {
    ss.validate();
    const Index nt = static_cast<Index>(times.size());
    if (nt < 1) throw PreconditionError("lsim_exact: empty time grid");
    if (u_samples.rows() != nt || u_samples.cols() != ss.inputs())
        throw PreconditionError("lsim_exact: input samples must be (number of times) x (number of inputs)");
    for (Index k = 0; k + 1 < nt; ++k)
        if (!(times[k + 1] > times[k])) throw PreconditionError("lsim_exact: time grid must be strictly increasing");

    LsimResult r;
    r.times = times;
    r.states = Matrix::Zero(nt, ss.states());
    std::vector<Propagator> cache;
    Vector x = Vector::Zero(ss.states());
    for (Index k = 0; k + 1 < nt; ++k) {
        const double h = times[k + 1] - times[k];
        const Propagator* p = nullptr;
        for (const auto& c : cache)
            if (std::abs(c.h - h) <= 1e-14 * std::max(1.0, std::abs(h))) p = &c;
        if (!p) {
            cache.push_back(make_propagator(ss, h, mode));
            p = &cache.back();
        }
        x = p->phi * x + p->g_start * u_samples.row(k).transpose() + p->g_end * u_samples.row(k + 1).transpose();
        r.states.row(k + 1) = x.transpose();
    }
    r.outputs = r.states * ss.c.transpose() + u_samples * ss.d.transpose();
    return r;
}

Vector CoupledSolution::output(double t) const { return c * x(t) + d * u.value(t); }

Matrix CoupledSolution::sample_outputs(const std::vector<double>& times) const {
    Matrix out(static_cast<Index>(times.size()), c.rows());
    for (std::size_t k = 0; k < times.size(); ++k) out.row(static_cast<Index>(k)) = output(times[k]).transpose();
    return out;
}

CoupledSolution reference_coupled_solve(const StateSpace& ss, const InputSignal& u, double t0, double tf, const SolverConfig& cfg) {
    ss.validate();
    if (u.dim() != ss.inputs()) throw PreconditionError("reference_coupled_solve: input dimension mismatch");
    const Index n = ss.states();
    const Matrix a = ss.a, b = ss.b;
    const InputSignal uu = u;
    VectorField f = [&a, &b, &uu, n](double t, Side side, const double* y, double* dy) {
        Eigen::Map<const Vector> ym(y, n);
        Eigen::Map<Vector> dym(dy, n);
        dym.noalias() = a * ym;
        dym.noalias() += b * uu.value(t, side);
    };
    SolverConfig c = cfg;
    c.breakpoints.insert(c.breakpoints.end(), u.breakpoints().begin(), u.breakpoints().end());
    CoupledSolution s{integrate_dense(f, Vector::Zero(n), t0, tf, c), 0, ss.c, ss.d, u};
    s.nfe = s.x.nfe();
    return s;
}

} // namespace dynn::oracle
