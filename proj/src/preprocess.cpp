#include "dynn/preprocess.hpp"
#include "dynn/error.hpp"

#include <cmath>
#include <sstream>

namespace dynn {

namespace {

std::string shape(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

} // namespace

void StateSpace::validate() const {
    const Index n = a.rows();
    if (n < 1 || a.cols() != n) throw PreconditionError("state space: A must be square and non-empty, got " + shape(a));
    if (b.rows() != n || b.cols() < 1) throw PreconditionError("state space: B must have " + std::to_string(n) + " rows, got " + shape(b));
    if (c.cols() != n || c.rows() < 1) throw PreconditionError("state space: C must have " + std::to_string(n) + " columns, got " + shape(c));
    if (d.rows() != c.rows() || d.cols() != b.cols())
        throw PreconditionError("state space: D must be " + std::to_string(c.rows()) + "x" + std::to_string(b.cols()) + ", got " + shape(d));
    if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !d.allFinite())
        throw PreconditionError("state space: matrices contain non-finite entries");
}

const char* to_string(BlockClass c) {
    switch (c) {
    case BlockClass::real: return "G_r";
    case BlockClass::complex: return "G_c";
    case BlockClass::mixed: return "G_mixed";
    }
    return "?";
}

BlockInfo classify_block(const Matrix& blk) {
    const Index n = blk.rows();
    if (blk.cols() != n || n < 1) throw PreconditionError("classify: diagonal block must be square");
    const auto sizes = linalg::detect_quasi_blocks(blk);
    BlockInfo info;
    info.dim = n;
    Index o = 0;
    for (Index s : sizes) {
        // nothing may sit below the quasi-diagonal
        for (Index j = o; j < o + s; ++j)
            for (Index i = o + s; i < n; ++i)
                if (std::abs(blk(i, j)) > 1e-11 * (blk.row(i).norm() + blk.col(j).norm()))
                    throw GMembershipError("G-membership violation: block is not quasi-upper-triangular");
        if (s == 1) {
            if (info.k_c > 0) throw GMembershipError("G-membership violation: real eigenvalue placed after a complex pair");
            ++info.k_r;
        } else {
            const double a = blk(o, o), b = blk(o, o + 1), c = blk(o + 1, o), d = blk(o + 1, o + 1);
            if (b == 0.0) throw GMembershipError("G-membership violation: 2x2 block with zero upper-right entry");
            const double tr = a + d, det = a * d - b * c;
            if (tr * tr - 4.0 * det >= 0.0) throw GMembershipError("G-membership violation: 2x2 block with real eigenvalues");
            ++info.k_c;
        }
        o += s;
    }
    info.cls = info.k_c == 0 ? BlockClass::real : (info.k_r == 0 ? BlockClass::complex : BlockClass::mixed);
    return info;
}

std::vector<BlockInfo> classify_diagonal_blocks(const Matrix& a, const linalg::BlockLayout& layout) {
    if (a.rows() != a.cols() || layout.total() != a.rows())
        throw PreconditionError("classify: layout does not match the matrix");
    std::vector<BlockInfo> out;
    for (std::size_t l = 0; l < layout.count(); ++l) {
        const Index o = layout.offset(l), s = layout.size(l);
        try {
            out.push_back(classify_block(a.block(o, o, s, s)));
        } catch (const GMembershipError& e) {
            throw GMembershipError(std::string(e.what()) + " (diagonal block " + std::to_string(l) + ")");
        }
    }
    return out;
}

TransformedLTI preprocess_lti(const StateSpace& ss, std::size_t num_clusters, const PreprocessOptions& opts) {
    ss.validate();
    const Index n = ss.states();
    if (num_clusters < 1 || num_clusters > static_cast<std::size_t>(n)) {
        std::ostringstream os;
        os << "preprocess: cluster count " << num_clusters << " outside [1, " << n << "]";
        throw PreconditionError(os.str());
    }

    const linalg::SchurForm s = linalg::real_schur(ss.a);
    TransformedLTI out;

    bool diagonal = true;
    for (Index s_ : s.block_sizes)
        if (s_ != 1) diagonal = false;
    if (diagonal) {
        Matrix off = s.r;
        off.diagonal().setZero();
        diagonal = linalg::max_abs(off) <= 1e-10 * linalg::max_abs(s.r);
    }

    if (diagonal) {
        out.unitary_path = true;
        out.t = s.q;
        out.t_inv = s.q.transpose();
        out.ss.a = Matrix(s.r.diagonal().asDiagonal());
        out.layout = linalg::BlockLayout(std::vector<Index>(n, 1));
        if (num_clusters != static_cast<std::size_t>(n)) {
            std::ostringstream os;
            os << "Schur form is diagonal: using " << n << " single-state layers instead of the requested " << num_clusters;
            out.warnings.push_back(os.str());
        }
    } else {
        const auto evs = spectra::extract_eigenvalues(s.r, s.layout());
        const auto plan = spectra::plan_clusters(evs, num_clusters, opts.clustering);
        const auto seq = spectra::sequence_blocks(plan);
        const linalg::SchurForm ordered = linalg::reorder_schur(s, seq);

        std::vector<Index> sizes;
        for (std::size_t c : plan.cluster_order) {
            Index d = 0;
            for (std::size_t b : plan.within_order[c]) d += s.block_sizes[b];
            sizes.push_back(d);
        }
        out.layout = linalg::BlockLayout(sizes);
        const auto bd = linalg::block_diagonalize(ordered.r, out.layout);
        out.t = ordered.q * bd.t3;
        out.t_inv = bd.t3.triangularView<Eigen::UnitUpper>().solve(Matrix(ordered.q.transpose()));
        out.ss.a = bd.a;
    }

    out.ss.b = out.t_inv * ss.b;
    out.ss.c = ss.c * out.t;
    out.ss.d = ss.d;
    out.blocks = classify_diagonal_blocks(out.ss.a, out.layout);

    const auto cond = linalg::condition_number_2norm(out.t);
    out.cond_t = cond.value;
    out.cond_singular = cond.numerically_singular;
    if (cond.numerically_singular) out.warnings.push_back("transformation matrix is numerically singular");
    if (out.cond_t > opts.max_cond) {
        std::ostringstream os;
        os << "condition number of the transformation " << out.cond_t << " exceeds max_cond " << opts.max_cond;
        out.warnings.push_back(os.str());
    }
    return out;
}

} // namespace dynn
