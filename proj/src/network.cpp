#include "dynn/network.hpp"
#include "dynn/error.hpp"

#include <sstream>

namespace dynn {

namespace {

void zero_strict_lower(Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = j + 1; i < m.rows(); ++i) m(i, j) = 0.0;
}

bool is_upper(const Matrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = j + 1; i < m.rows(); ++i)
            if (m(i, j) != 0.0) return false;
    return true;
}

Matrix rows_every_other(const Matrix& m, Index start) {
    const Index n = m.rows() / 2;
    Matrix out(n, m.cols());
    for (Index i = 0; i < n; ++i) out.row(i) = m.row(2 * i + start);
    return out;
}

Matrix cols_every_other(const Matrix& m, Index start) {
    const Index n = m.cols() / 2;
    Matrix out(m.rows(), n);
    for (Index j = 0; j < n; ++j) out.col(j) = m.col(2 * j + start);
    return out;
}

struct Partition {
    BlockInfo info;
    Matrix a11, a12, a13, a22, a23, a32, a33;
    Matrix b1, b2, b3;
};

Partition partition(const Matrix& a_l, const Matrix& b_l) {
    if (b_l.rows() != a_l.rows()) throw PreconditionError("layer input matrix has the wrong number of rows");
    Partition p;
    p.info = classify_block(a_l);
    const Index kr = p.info.k_r, kc = p.info.k_c;
    p.a11 = a_l.topLeftCorner(kr, kr);
    p.b1 = b_l.topRows(kr);
    if (kc > 0) {
        const Matrix arc = a_l.topRightCorner(kr, 2 * kc);
        p.a12 = cols_every_other(arc, 0);
        p.a13 = cols_every_other(arc, 1);
        const auto perm = permute_complex_block(a_l.bottomRightCorner(2 * kc, 2 * kc));
        p.a22 = perm.a;
        p.a23 = perm.b;
        p.a32 = perm.c;
        p.a33 = perm.d;
        const Matrix bc = b_l.bottomRows(2 * kc);
        p.b2 = rows_every_other(bc, 0);
        p.b3 = rows_every_other(bc, 1);
    }
    return p;
}

EtaMap eta_from(const Partition& p) {
    const auto a23 = p.a23.triangularView<Eigen::Upper>();
    for (Index i = 0; i < p.a23.rows(); ++i)
        if (p.a23(i, i) == 0.0) throw GMembershipError("G-membership violation: singular coupling block in eta map");
    EtaMap e;
    e.q = a23.solve(Matrix::Identity(p.a23.rows(), p.a23.cols()));
    e.w = -a23.solve(p.a22);
    e.z = -a23.solve(p.b2);
    zero_strict_lower(e.q);
    zero_strict_lower(e.w);
    return e;
}

} // namespace

Index DynnParams::state_count() const {
    Index n = 0;
    for (const auto& l : layers)
        for (const auto& nr : l.neurons) n += output_width(nr.order);
    return n;
}

void DynnParams::validate() const {
    if (input_dim < 1 || output_dim < 1) throw PreconditionError("dynn params: input/output dimensions must be positive");
    if (phi.size() != layers.size()) throw PreconditionError("dynn params: phi must have one entry per layer");
    if (psi.rows() != output_dim || psi.cols() != input_dim) throw PreconditionError("dynn params: psi has the wrong shape");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.input_dim != input_dim) throw PreconditionError("dynn params: layer input width disagrees with input_dim");
        if (phi[l].size() != layer.size()) throw PreconditionError("dynn params: phi count disagrees with neuron count");
        Index tail = 0;
        for (std::size_t i = layer.size(); i-- > 0;) {
            const auto& n = layer.neurons[i];
            if (n.w.size() != 2 * input_dim + tail) {
                std::ostringstream os;
                os << "dynn params: neuron " << i << " of layer " << l << " has weight length " << n.w.size() << ", expected "
                   << 2 * input_dim + tail;
                throw PreconditionError(os.str());
            }
            if (n.order == NeuronOrder::first && (n.m != 0.0 || n.c == 0.0))
                throw PreconditionError("dynn params: first-order neuron needs m = 0 and c != 0");
            if (n.order == NeuronOrder::second && n.m == 0.0) throw PreconditionError("dynn params: second-order neuron needs m != 0");
            if (phi[l][i].rows() != output_dim || phi[l][i].cols() != output_width(n.order))
                throw PreconditionError("dynn params: phi block has the wrong shape");
            tail += output_width(n.order);
        }
    }
}

ArchitectureSummary summarize(const DynnParams& p) {
    ArchitectureSummary s;
    for (const auto& l : p.layers) {
        Index f = 0, q = 0;
        for (const auto& n : l.neurons) (n.order == NeuronOrder::first ? f : q) += 1;
        s.layer_sizes.push_back(static_cast<Index>(l.size()));
        s.first_order_per_layer.push_back(f);
        s.second_order_per_layer.push_back(q);
        s.first_order += f;
        s.second_order += q;
    }
    return s;
}

ComplexPermutation permute_complex_block(const Matrix& m_c) {
    if (m_c.rows() != m_c.cols() || m_c.rows() % 2 != 0 || m_c.rows() == 0)
        throw PreconditionError("permute_complex_block: expected a square matrix of even dimension");
    const Index n = m_c.rows() / 2;
    ComplexPermutation out;
    out.t = Matrix::Zero(2 * n, 2 * n);
    for (Index i = 0; i < n; ++i) {
        out.t(i, 2 * i) = 1.0;
        out.t(n + i, 2 * i + 1) = 1.0;
    }
    out.a.resize(n, n);
    out.b.resize(n, n);
    out.c.resize(n, n);
    out.d.resize(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            out.a(i, j) = m_c(2 * i, 2 * j);
            out.b(i, j) = m_c(2 * i, 2 * j + 1);
            out.c(i, j) = m_c(2 * i + 1, 2 * j);
            out.d(i, j) = m_c(2 * i + 1, 2 * j + 1);
        }
    return out;
}

EtaMap map_eta(const Matrix& a_l, const Matrix& b_l) {
    const Partition p = partition(a_l, b_l);
    if (p.info.k_c == 0) throw PreconditionError("map_eta: block has no complex pairs");
    return eta_from(p);
}

SecondOrderSystem map_lti_second_order(const Matrix& a_l, const Matrix& b_l) {
    const Partition p = partition(a_l, b_l);
    const Index kr = p.info.k_r, kc = p.info.k_c, nl = kr + kc, di = b_l.cols();
    SecondOrderSystem s;
    s.m = Matrix::Zero(nl, nl);
    s.c = Matrix::Zero(nl, nl);
    s.k = Matrix::Zero(nl, nl);
    s.e = Matrix::Zero(nl, di);
    s.v = Matrix::Zero(nl, di);

    s.c.topLeftCorner(kr, kr).setIdentity();
    s.k.topLeftCorner(kr, kr) = -p.a11;
    if (kc == 0) {
        s.e = p.b1;
        zero_strict_lower(s.k);
        return s;
    }
    const EtaMap eta = eta_from(p);
    const Matrix a23a33 = p.a23 * p.a33;
    s.m.bottomRightCorner(kc, kc).setIdentity();
    s.c.topRightCorner(kr, kc) = -p.a13 * eta.q;
    s.c.bottomRightCorner(kc, kc) = -(p.a22 + a23a33 * eta.q);
    s.k.topRightCorner(kr, kc) = -(p.a12 + p.a13 * eta.w);
    s.k.bottomRightCorner(kc, kc) = -(p.a23 * p.a32 + a23a33 * eta.w);
    s.e.topRows(kr) = p.a13 * eta.z + p.b1;
    s.e.bottomRows(kc) = a23a33 * eta.z + p.a23 * p.b3;
    s.v.bottomRows(kc) = p.b2;
    zero_strict_lower(s.c);
    zero_strict_lower(s.k);
    return s;
}

SecondOrderSystem n_dynn_forward(const HorizontalLayer& layer) {
    const Index nl = static_cast<Index>(layer.size()), di = layer.input_dim;
    SecondOrderSystem s;
    s.m = Matrix::Zero(nl, nl);
    s.c = Matrix::Zero(nl, nl);
    s.k = Matrix::Zero(nl, nl);
    s.e = Matrix::Zero(nl, di);
    s.v = Matrix::Zero(nl, di);
    for (Index i = 0; i < nl; ++i) {
        const NeuronSpec& n = layer.neurons[i];
        s.m(i, i) = n.m;
        s.c(i, i) = n.c;
        s.k(i, i) = n.k;
        s.e.row(i) = n.w.segment(0, di);
        s.v.row(i) = n.w.segment(di, di);
        Index pos = 2 * di;
        for (Index j = i + 1; j < nl; ++j) {
            s.k(i, j) = -n.w(pos++);
            if (layer.neurons[j].order == NeuronOrder::second) s.c(i, j) = -n.w(pos++);
        }
        if (pos != n.w.size()) throw PreconditionError("n_dynn_forward: neuron weight vector has the wrong length");
    }
    return s;
}

HorizontalLayer n_dynn_inverse(const SecondOrderSystem& sys) {
    const Index nl = sys.m.rows(), di = sys.e.cols();
    if (sys.m.cols() != nl || sys.c.rows() != nl || sys.c.cols() != nl || sys.k.rows() != nl || sys.k.cols() != nl ||
        sys.e.rows() != nl || sys.v.rows() != nl || sys.v.cols() != di)
        throw PreconditionError("n_dynn_inverse: inconsistent matrix shapes");
    Matrix offm = sys.m;
    offm.diagonal().setZero();
    if (linalg::max_abs(offm) != 0.0 || !is_upper(sys.c) || !is_upper(sys.k))
        throw PreconditionError("n_dynn_inverse: M must be diagonal and C, K upper-triangular");

    HorizontalLayer layer;
    layer.input_dim = di;
    layer.neurons.resize(nl);
    for (Index i = 0; i < nl; ++i) layer.neurons[i].order = sys.m(i, i) == 0.0 ? NeuronOrder::first : NeuronOrder::second;

    for (Index i = 0; i < nl; ++i) {
        NeuronSpec& n = layer.neurons[i];
        const double mi = sys.m(i, i);
        const double scale = (mi == 0.0 || mi == 1.0) ? 1.0 : mi;
        n.m = mi / scale;
        n.c = sys.c(i, i) / scale;
        n.k = sys.k(i, i) / scale;
        if (n.order == NeuronOrder::first && n.c == 0.0)
            throw PreconditionError("n_dynn_inverse: first-order neuron " + std::to_string(i) + " has c = 0 (algebraic, not an ODE)");
        Index tail = 0;
        for (Index j = i + 1; j < nl; ++j) tail += output_width(layer.neurons[j].order);
        n.w.resize(2 * di + tail);
        n.w.segment(0, di) = sys.e.row(i) / scale;
        n.w.segment(di, di) = sys.v.row(i) / scale;
        Index pos = 2 * di;
        for (Index j = i + 1; j < nl; ++j) {
            n.w(pos++) = -sys.k(i, j) / scale;
            if (layer.neurons[j].order == NeuronOrder::second) {
                n.w(pos++) = -sys.c(i, j) / scale;
            } else if (sys.c(i, j) != 0.0) {
                throw PreconditionError("n_dynn_inverse: nonzero damping coupling to first-order neuron " + std::to_string(j));
            }
        }
        (n.order == NeuronOrder::first ? layer.k_r : layer.k_c) += 1;
    }
    return layer;
}

std::vector<HorizontalLayer> map_hidden(const Matrix& a, const Matrix& b, const linalg::BlockLayout& layout) {
    if (a.rows() != layout.total() || b.rows() != layout.total()) throw PreconditionError("map_hidden: layout does not match A/B");
    std::vector<HorizontalLayer> layers;
    for (std::size_t l = 0; l < layout.count(); ++l) {
        const Index o = layout.offset(l), s = layout.size(l);
        try {
            layers.push_back(n_dynn_inverse(map_lti_second_order(a.block(o, o, s, s), b.middleRows(o, s))));
        } catch (const GMembershipError& e) {
            throw GMembershipError(std::string(e.what()) + " (layer " + std::to_string(l) + ")");
        } catch (const PreconditionError& e) {
            throw PreconditionError(std::string(e.what()) + " (layer " + std::to_string(l) + ")");
        }
    }
    return layers;
}

LayerReconstruction layer_reconstruction(const Matrix& a_l, const Matrix& b_l) {
    const Partition p = partition(a_l, b_l);
    const Index kr = p.info.k_r, kc = p.info.k_c, nl = kr + kc, dl = kr + 2 * kc;
    LayerReconstruction r;
    r.f = Matrix::Zero(dl, 2 * nl);
    r.z = Matrix::Zero(dl, b_l.cols());
    for (Index i = 0; i < kr; ++i) r.f(i, 2 * i) = 1.0;
    if (kc == 0) return r;
    const EtaMap eta = eta_from(p);
    for (Index m = 0; m < kc; ++m) {
        r.f(kr + 2 * m, 2 * (kr + m)) = 1.0;
        for (Index q = 0; q < kc; ++q) {
            r.f(kr + 2 * m + 1, 2 * (kr + q)) = eta.w(m, q);
            r.f(kr + 2 * m + 1, 2 * (kr + q) + 1) = eta.q(m, q);
        }
        r.z.row(kr + 2 * m + 1) = eta.z.row(m);
    }
    return r;
}

OutputMap map_output(const TransformedLTI& t) {
    const auto& ss = t.ss;
    OutputMap out;
    out.psi = ss.d;
    for (std::size_t l = 0; l < t.layout.count(); ++l) {
        const Index o = t.layout.offset(l), s = t.layout.size(l);
        const LayerReconstruction rec = layer_reconstruction(ss.a.block(o, o, s, s), ss.b.middleRows(o, s));
        const Matrix cl = ss.c.middleCols(o, s);
        const Matrix cf = cl * rec.f;
        const BlockInfo& info = t.blocks.at(l);
        std::vector<Matrix> phis;
        for (Index i = 0; i < info.k_r + info.k_c; ++i)
            phis.push_back(i < info.k_r ? Matrix(cf.col(2 * i)) : Matrix(cf.middleCols(2 * i, 2)));
        out.phi.push_back(std::move(phis));
        if (info.k_c > 0) out.psi += cl * rec.z;
    }
    return out;
}

BuildResult build_dynn(const StateSpace& ss, std::size_t num_clusters, const PreprocessOptions& opts) {
    BuildResult r;
    r.lti = preprocess_lti(ss, num_clusters, opts);
    r.params.input_dim = ss.inputs();
    r.params.output_dim = ss.outputs();
    r.params.layers = map_hidden(r.lti.ss.a, r.lti.ss.b, r.lti.layout);
    OutputMap om = map_output(r.lti);
    r.params.phi = std::move(om.phi);
    r.params.psi = std::move(om.psi);
    r.params.validate();
    return r;
}

} // namespace dynn
