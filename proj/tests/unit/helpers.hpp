#pragma once

#include "dynn/linalg.hpp"
#include "dynn/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <vector>

namespace testutil {

using dynn::Index;
using dynn::Matrix;
using dynn::Vector;

inline Matrix random_matrix(dynn::Rng& rng, Index r, Index c) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline std::vector<std::complex<double>> eigs(const Matrix& m) {
    Eigen::EigenSolver<Matrix> es(m, false);
    std::vector<std::complex<double>> v(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    std::sort(v.begin(), v.end(), [](auto a, auto b) {
        if (std::abs(a.real() - b.real()) > 1e-7) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return v;
}

inline double multiset_gap(const Matrix& a, const Matrix& b) {
    const auto x = eigs(a), y = eigs(b);
    double gap = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) gap = std::max(gap, std::abs(x[k] - y[k]) / (1.0 + std::abs(x[k])));
    return gap;
}

// Brute-force solution of a X - X b = f through the (pq)x(pq) Kronecker system.
inline Matrix kronecker_sylvester(const Matrix& a, const Matrix& b, const Matrix& f) {
    const Index p = a.rows(), q = b.rows();
    Matrix k = Matrix::Zero(p * q, p * q);
    for (Index j = 0; j < q; ++j)
        for (Index i = 0; i < q; ++i) {
            k.block(j * p, i * p, p, p) -= b(i, j) * Matrix::Identity(p, p);
            if (i == j) k.block(j * p, j * p, p, p) += a;
        }
    const Vector x = k.fullPivLu().solve(Eigen::Map<const Vector>(f.data(), p * q));
    return Eigen::Map<const Matrix>(x.data(), p, q);
}

// Quasi-triangular matrix with 1x1 reals and 2x2 rotation-scaling blocks, random upper fill.
inline Matrix quasi_triangular(dynn::Rng& rng, const std::vector<std::pair<double, double>>& units) {
    Index n = 0;
    for (auto u : units) n += u.second != 0.0 ? 2 : 1;
    Matrix t = Matrix::Zero(n, n);
    Index o = 0;
    for (auto [re, im] : units) {
        const Index s = im != 0.0 ? 2 : 1;
        if (s == 2)
            t.block(o, o, 2, 2) << re, -im, im, re;
        else
            t(o, o) = re;
        for (Index i = o; i < o + s; ++i)
            for (Index j = o + s; j < n; ++j) t(i, j) = rng.uniform(-1, 1);
        o += s;
    }
    return t;
}

} // namespace testutil
