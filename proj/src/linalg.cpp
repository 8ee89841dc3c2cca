#include "dynn/linalg.hpp"
#include "dynn/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>

namespace dynn::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

using Complex = std::complex<double>;

void require_square(const Matrix& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        std::ostringstream os;
        os << who << ": expected a non-empty square matrix, got " << a.rows() << "x" << a.cols();
        throw PreconditionError(os.str());
    }
    if (!a.allFinite()) throw PreconditionError(std::string(who) + ": matrix has non-finite entries");
}

// eigenvalues of a 1x1 or 2x2 block
std::vector<Complex> small_eigs(const Matrix& b) {
    if (b.rows() == 1) return {Complex(b(0, 0), 0.0)};
    const double tr = b(0, 0) + b(1, 1);
    const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    const double disc = 0.25 * tr * tr - det;
    const double half = 0.5 * tr;
    if (disc >= 0) {
        const double s = std::sqrt(disc);
        return {Complex(half + s, 0.0), Complex(half - s, 0.0)};
    }
    const double s = std::sqrt(-disc);
    return {Complex(half, s), Complex(half, -s)};
}

// LAPACK dlanv2: Schur factorization of a real 2x2 nonsymmetric matrix in standardized form.
void lanv2(double& a, double& b, double& c, double& d, double& cs, double& sn) {
    const double multpl = 4.0;
    if (c == 0.0) {
        cs = 1.0;
        sn = 0.0;
    } else if (b == 0.0) {
        cs = 0.0;
        sn = 1.0;
        std::swap(a, d);
        b = -c;
        c = 0.0;
    } else if (a - d == 0.0 && std::signbit(b) != std::signbit(c)) {
        cs = 1.0;
        sn = 0.0;
    } else {
        double temp = a - d;
        double p = 0.5 * temp;
        const double bcmax = std::max(std::abs(b), std::abs(c));
        const double bcmis = std::min(std::abs(b), std::abs(c)) * std::copysign(1.0, b) * std::copysign(1.0, c);
        double scale = std::max(std::abs(p), bcmax);
        double z = (p / scale) * p + (bcmax / scale) * bcmis;
        if (z >= multpl * kEps) {
            // real eigenvalues
            z = p + std::copysign(std::sqrt(scale) * std::sqrt(z), p);
            a = d + z;
            d = d - (bcmax / z) * bcmis;
            const double tau = std::hypot(c, z);
            cs = z / tau;
            sn = c / tau;
            b = b - c;
            c = 0.0;
        } else {
            // complex or almost equal real eigenvalues: make the diagonal equal
            const double sigma = b + c;
            const double tau = std::hypot(sigma, temp);
            cs = std::sqrt(0.5 * (1.0 + std::abs(sigma) / tau));
            sn = -(p / (tau * cs)) * std::copysign(1.0, sigma);
            const double aa = a * cs + b * sn;
            const double bb = -a * sn + b * cs;
            const double cc = c * cs + d * sn;
            const double dd = -c * sn + d * cs;
            a = aa * cs + cc * sn;
            b = bb * cs + dd * sn;
            c = -aa * sn + cc * cs;
            d = -bb * sn + dd * cs;
            temp = 0.5 * (a + d);
            a = temp;
            d = temp;
            if (c != 0.0) {
                if (b != 0.0) {
                    if (std::signbit(b) == std::signbit(c)) {
                        // real eigenvalues after all
                        const double sab = std::sqrt(std::abs(b));
                        const double sac = std::sqrt(std::abs(c));
                        p = std::copysign(sab * sac, c);
                        const double tau2 = 1.0 / std::sqrt(std::abs(b + c));
                        a = temp + p;
                        d = temp - p;
                        b = b - c;
                        c = 0.0;
                        const double cs1 = sab * tau2;
                        const double sn1 = sac * tau2;
                        temp = cs * cs1 - sn * sn1;
                        sn = cs * sn1 + sn * cs1;
                        cs = temp;
                    }
                } else {
                    b = -c;
                    c = 0.0;
                    temp = cs;
                    cs = -sn;
                    sn = temp;
                }
            }
        }
    }
}

// Swap the adjacent diagonal blocks of sizes p (at j) and r (at j+p).
void swap_adjacent(Matrix& t, Matrix& q, Index j, Index p, Index r) {
    const Index n = t.rows();
    const Index nd = p + r;
    const Matrix d = t.block(j, j, nd, nd);
    const Matrix t11 = d.topLeftCorner(p, p);
    const Matrix t22 = d.bottomRightCorner(r, r);

    const auto e1 = small_eigs(t11);
    const auto e2 = small_eigs(t22);
    double gap = std::numeric_limits<double>::infinity();
    double mag = 0.0;
    for (const auto& x : e1)
        for (const auto& y : e2) {
            gap = std::min(gap, std::abs(x - y));
            mag = std::max({mag, std::abs(x), std::abs(y)});
        }
    if (gap <= 1e-9 * (1.0 + mag)) {
        std::ostringstream os;
        os << "inseparable blocks: swapping blocks at row " << j << " with eigenvalue gap " << gap;
        throw InseparableBlocksError(os.str());
    }

    // T11 X - X T22 = T12 via the Kronecker form
    const Index m = p * r;
    Matrix k = Matrix::Zero(m, m);
    for (Index col = 0; col < r; ++col)
        for (Index row = 0; row < r; ++row) {
            if (row == col) k.block(col * p, col * p, p, p) += t11;
            k.block(col * p, row * p, p, p) -= t22(row, col) * Matrix::Identity(p, p);
        }
    Eigen::FullPivLU<Matrix> lu(k);
    if (!lu.isInvertible()) throw InseparableBlocksError("inseparable blocks: singular swap equation");
    const Vector rhs = Eigen::Map<const Vector>(Matrix(d.topRightCorner(p, r)).data(), m);
    const Vector xv = lu.solve(rhs);
    const Matrix x = Eigen::Map<const Matrix>(xv.data(), p, r);

    Matrix s(nd, r);
    s.topRows(p) = -x;
    s.bottomRows(r).setIdentity();
    Eigen::HouseholderQR<Matrix> qr(s);
    const Matrix g = qr.householderQ() * Matrix::Identity(nd, nd);

    Matrix dn = g.transpose() * d * g;
    const double dnorm = max_abs(d);
    const double thresh = std::max(10.0 * kEps * dnorm, std::numeric_limits<double>::min());
    const double resid = dn.bottomLeftCorner(p, r).cwiseAbs().maxCoeff();
    if (!(resid <= thresh)) {
        std::ostringstream os;
        os << "inseparable blocks: swap at row " << j << " left residual " << resid << " (threshold " << thresh << ")";
        throw InseparableBlocksError(os.str());
    }

    t.block(j, j, nd, n - j) = g.transpose() * t.block(j, j, nd, n - j);
    t.block(0, j, j + nd, nd) = t.block(0, j, j + nd, nd) * g;
    q.block(0, j, n, nd) = q.block(0, j, n, nd) * g;
    t.block(j + r, j, p, r).setZero();
    if (r == 2 && !standardize_2x2(t, &q, j))
        throw InseparableBlocksError("inseparable blocks: complex pair split into reals during swap");
    if (p == 2 && !standardize_2x2(t, &q, j + r))
        throw InseparableBlocksError("inseparable blocks: complex pair split into reals during swap");
}

bool is_quasi_triangular(const Matrix& a) {
    const Index n = a.rows();
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 2; i < n; ++i)
            if (a(i, j) != 0.0) return false;
    for (Index k = 0; k + 2 < n; ++k)
        if (a(k + 1, k) != 0.0 && a(k + 2, k + 1) != 0.0) return false;
    return true;
}

std::vector<Index> exact_blocks(const Matrix& a) {
    std::vector<Index> sizes;
    const Index n = a.rows();
    for (Index k = 0; k < n;) {
        if (k + 1 < n && a(k + 1, k) != 0.0) {
            sizes.push_back(2);
            k += 2;
        } else {
            sizes.push_back(1);
            k += 1;
        }
    }
    return sizes;
}

// Small Sylvester a*X - X*b = f with a,b at most 2x2.
Matrix solve_small(const Matrix& a, const Matrix& b, const Matrix& f) {
    const Index p = a.rows(), r = b.rows();
    if (p == 1 && r == 1) {
        Matrix x(1, 1);
        x(0, 0) = f(0, 0) / (a(0, 0) - b(0, 0));
        return x;
    }
    const Index m = p * r;
    Matrix k = Matrix::Zero(m, m);
    for (Index col = 0; col < r; ++col)
        for (Index row = 0; row < r; ++row) {
            if (row == col) k.block(col * p, col * p, p, p) += a;
            k.block(col * p, row * p, p, p) -= b(row, col) * Matrix::Identity(p, p);
        }
    const Matrix fm = f;
    const Vector rhs = Eigen::Map<const Vector>(fm.data(), m);
    const Vector xv = Eigen::FullPivLU<Matrix>(k).solve(rhs);
    return Eigen::Map<const Matrix>(xv.data(), p, r);
}

std::vector<Complex> quasi_eigs(const Matrix& a, const std::vector<Index>& sizes) {
    std::vector<Complex> out;
    Index o = 0;
    for (Index s : sizes) {
        auto e = small_eigs(a.block(o, o, s, s));
        out.insert(out.end(), e.begin(), e.end());
        o += s;
    }
    return out;
}

Matrix solve_quasi_triangular(const Matrix& a, const std::vector<Index>& ba, const Matrix& b,
                              const std::vector<Index>& bb, const Matrix& f) {
    const Index p = a.rows(), q = b.rows();
    std::vector<Index> oa(ba.size()), ob(bb.size());
    std::exclusive_scan(ba.begin(), ba.end(), oa.begin(), Index(0));
    std::exclusive_scan(bb.begin(), bb.end(), ob.begin(), Index(0));
    Matrix x = Matrix::Zero(p, q);
    for (std::size_t l = 0; l < bb.size(); ++l) {
        const Index cl = ob[l], sl = bb[l];
        for (std::size_t kk = ba.size(); kk-- > 0;) {
            const Index rk = oa[kk], sk = ba[kk];
            Matrix rhs = f.block(rk, cl, sk, sl);
            const Index below = p - rk - sk;
            if (below > 0) rhs.noalias() -= a.block(rk, rk + sk, sk, below) * x.block(rk + sk, cl, below, sl);
            if (cl > 0) rhs.noalias() += x.block(rk, 0, sk, cl) * b.block(0, cl, cl, sl);
            x.block(rk, cl, sk, sl) = solve_small(a.block(rk, rk, sk, sk), b.block(cl, cl, sl, sl), rhs);
        }
    }
    return x;
}

} // namespace

BlockLayout::BlockLayout(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
    offsets_.resize(sizes_.size() + 1, 0);
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (sizes_[i] < 1) throw PreconditionError("block layout: block sizes must be >= 1");
        offsets_[i + 1] = offsets_[i] + sizes_[i];
    }
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool standardize_2x2(Matrix& t, Matrix* q, Index k) {
    const Index n = t.rows();
    double a = t(k, k), b = t(k, k + 1), c = t(k + 1, k), d = t(k + 1, k + 1);
    double cs = 1.0, sn = 0.0;
    lanv2(a, b, c, d, cs, sn);
    // rows k,k+1 to the right of the block, columns k,k+1 above it
    for (Index j = k + 2; j < n; ++j) {
        const double x = t(k, j), y = t(k + 1, j);
        t(k, j) = cs * x + sn * y;
        t(k + 1, j) = cs * y - sn * x;
    }
    for (Index i = 0; i < k; ++i) {
        const double x = t(i, k), y = t(i, k + 1);
        t(i, k) = cs * x + sn * y;
        t(i, k + 1) = cs * y - sn * x;
    }
    if (q) {
        for (Index i = 0; i < q->rows(); ++i) {
            const double x = (*q)(i, k), y = (*q)(i, k + 1);
            (*q)(i, k) = cs * x + sn * y;
            (*q)(i, k + 1) = cs * y - sn * x;
        }
    }
    t(k, k) = a;
    t(k, k + 1) = b;
    t(k + 1, k) = c;
    t(k + 1, k + 1) = d;
    return c != 0.0;
}

std::vector<Index> detect_quasi_blocks(const Matrix& r) {
    std::vector<Index> sizes;
    const Index n = r.rows();
    for (Index k = 0; k < n;) {
        bool two = false;
        if (k + 1 < n) {
            const double local = r.row(k + 1).norm() + r.col(k).norm();
            two = std::abs(r(k + 1, k)) > 1e-11 * local;
        }
        sizes.push_back(two ? 2 : 1);
        k += two ? 2 : 1;
    }
    return sizes;
}

SchurForm real_schur(const Matrix& a) {
    require_square(a, "real_schur");
    const Index n = a.rows();
    Eigen::RealSchur<Matrix> rs(n);
    rs.compute(a, true);
    if (rs.info() != Eigen::Success) {
        std::ostringstream os;
        os << "real_schur: QR iteration did not converge within " << rs.getMaxIterations() << " iterations";
        throw ConvergenceError(os.str(), static_cast<int>(rs.getMaxIterations()));
    }
    SchurForm s{rs.matrixU(), rs.matrixT(), {}};
    Matrix& t = s.r;
    for (Index j = 0; j < n; ++j)
        for (Index i = j + 2; i < n; ++i) t(i, j) = 0.0;

    for (Index k = 0; k < n;) {
        if (k + 1 < n && t(k + 1, k) != 0.0) {
            const double local = t.row(k + 1).norm() + t.col(k).norm();
            if (std::abs(t(k + 1, k)) <= 1e-11 * local) {
                t(k + 1, k) = 0.0;
                s.block_sizes.push_back(1);
                k += 1;
            } else if (standardize_2x2(t, &s.q, k)) {
                s.block_sizes.push_back(2);
                k += 2;
            } else {
                s.block_sizes.push_back(1);
                k += 1;
            }
        } else {
            s.block_sizes.push_back(1);
            k += 1;
        }
    }
    return s;
}

SchurForm reorder_schur(const SchurForm& s, std::span<const std::size_t> target) {
    const std::size_t nb = s.block_sizes.size();
    if (target.size() != nb) throw PreconditionError("reorder_schur: target must list every block once");
    std::vector<bool> seen(nb, false);
    for (std::size_t b : target) {
        if (b >= nb || seen[b]) throw PreconditionError("reorder_schur: target is not a permutation of the blocks");
        seen[b] = true;
    }

    SchurForm out = s;
    std::vector<std::size_t> cur(nb);
    std::iota(cur.begin(), cur.end(), 0);
    std::vector<Index> sizes = s.block_sizes;

    for (std::size_t k = 0; k < nb; ++k) {
        std::size_t pos = k;
        while (cur[pos] != target[k]) ++pos;
        while (pos > k) {
            Index row = 0;
            for (std::size_t i = 0; i + 1 < pos; ++i) row += sizes[i];
            swap_adjacent(out.r, out.q, row, sizes[pos - 1], sizes[pos]);
            std::swap(sizes[pos - 1], sizes[pos]);
            std::swap(cur[pos - 1], cur[pos]);
            --pos;
        }
    }
    out.block_sizes = sizes;
    return out;
}

Matrix solve_sylvester(const Matrix& a11, const Matrix& a22, const Matrix& f) {
    if (a11.rows() != a11.cols() || a22.rows() != a22.cols())
        throw PreconditionError("solve_sylvester: coefficient matrices must be square");
    if (f.rows() != a11.rows() || f.cols() != a22.rows())
        throw PreconditionError("solve_sylvester: right-hand side has the wrong shape");
    if (!a11.allFinite() || !a22.allFinite() || !f.allFinite())
        throw PreconditionError("solve_sylvester: non-finite input");

    if (is_quasi_triangular(a11) && is_quasi_triangular(a22)) {
        const auto ba = exact_blocks(a11), bb = exact_blocks(a22);
        const auto ea = quasi_eigs(a11, ba), eb = quasi_eigs(a22, bb);
        double gap = std::numeric_limits<double>::infinity();
        bool clash = false;
        for (const auto& x : ea)
            for (const auto& y : eb) {
                const double g = std::abs(x - y);
                gap = std::min(gap, g);
                if (g <= 1e-9 * (1.0 + std::max(std::abs(x), std::abs(y)))) clash = true;
            }
        if (clash) {
            std::ostringstream os;
            os << "spectra not separated: minimal eigenvalue gap " << gap;
            throw SpectraNotSeparatedError(os.str(), gap);
        }
        return solve_quasi_triangular(a11, ba, a22, bb, f);
    }

    // general coefficients: reduce both to real Schur form first
    const SchurForm sa = real_schur(a11);
    const SchurForm sb = real_schur(a22);
    const Matrix y = solve_sylvester(sa.r, sb.r, sa.q.transpose() * f * sb.q);
    return sa.q * y * sb.q.transpose();
}

BlockDiagonalization block_diagonalize(const Matrix& r, const BlockLayout& layout) {
    require_square(r, "block_diagonalize");
    if (layout.total() != r.rows()) throw PreconditionError("block_diagonalize: layout does not match matrix size");
    const Index n = r.rows();
    const std::size_t nb = layout.count();
    Matrix t = r;
    Matrix y = Matrix::Identity(n, n);

    for (std::size_t j = 1; j < nb; ++j) {
        const Index oj = layout.offset(j), sj = layout.size(j);
        const Index rest = n - oj - sj;
        for (std::size_t i = 0; i < j; ++i) {
            const Index oi = layout.offset(i), si = layout.size(i);
            Matrix z;
            try {
                z = solve_sylvester(t.block(oi, oi, si, si), t.block(oj, oj, sj, sj), -t.block(oi, oj, si, sj));
            } catch (const SpectraNotSeparatedError& e) {
                std::ostringstream os;
                os << "spectra not separated between diagonal blocks " << i << " and " << j
                   << " (minimal eigenvalue gap " << e.gap() << ")";
                throw SpectraNotSeparatedError(os.str(), e.gap(), static_cast<int>(i), static_cast<int>(j));
            }
            if (rest > 0) t.block(oi, oj + sj, si, rest).noalias() -= z * t.block(oj, oj + sj, sj, rest);
            y.block(0, oj, oi + si, sj).noalias() += y.block(0, oi, oi + si, si) * z;
            t.block(oi, oj, si, sj).setZero();
        }
    }

    Matrix a = Matrix::Zero(n, n);
    for (std::size_t b = 0; b < nb; ++b) {
        const Index o = layout.offset(b), s = layout.size(b);
        a.block(o, o, s, s) = r.block(o, o, s, s);
    }
    return {std::move(y), std::move(a)};
}

Matrix matrix_exponential(const Matrix& m, double scale) {
    require_square(m, "matrix_exponential");
    const Matrix sm = scale * m;
    const double norm1 = sm.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(norm1)) throw OverflowError("matrix_exponential: scaled matrix is not finite", norm1);
    Matrix e = sm.exp();
    if (!e.allFinite()) {
        std::ostringstream os;
        os << "matrix_exponential: overflow for ||scale*m||_1 = " << norm1;
        throw OverflowError(os.str(), norm1);
    }
    return e;
}

ConditionNumber condition_number_2norm(const Matrix& m) {
    require_square(m, "condition_number_2norm");
    Eigen::BDCSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (smax == 0.0 || smin < 1e3 * kEps * smax) return {std::numeric_limits<double>::infinity(), true};
    return {smax / smin, false};
}

} // namespace dynn::linalg
