#include "dynn/error.hpp"
#include "dynn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynn {

VectorField neuron_dynamics(const NeuronSpec& spec, ScalarDrive drive, std::vector<TailInput> tail) {
    if (spec.order == NeuronOrder::first && spec.c == 0.0)
        throw PreconditionError("neuron_dynamics: first-order neuron with c = 0 is algebraic, not an ODE");
    if (spec.order == NeuronOrder::second && spec.m == 0.0)
        throw PreconditionError("neuron_dynamics: second-order neuron with m = 0");
    // drop couplings that are exactly zero
    tail.erase(std::remove_if(tail.begin(), tail.end(), [](const TailInput& x) { return x.w_xi == 0.0 && x.w_xidot == 0.0; }),
               tail.end());
    const double m = spec.m, c = spec.c, k = spec.k;
    if (spec.order == NeuronOrder::first) {
        return [=](double t, Side side, const double* y, double* dy) {
            double g = drive(t, side);
            double buf[2];
            for (const auto& x : tail) {
                x.traj->evaluate(t, buf);
                g += x.w_xi * buf[0] + (x.traj->dim() > 1 ? x.w_xidot * buf[1] : 0.0);
            }
            dy[0] = (g - k * y[0]) / c;
        };
    }
    return [=](double t, Side side, const double* y, double* dy) {
        double g = drive(t, side);
        double buf[2];
        for (const auto& x : tail) {
            x.traj->evaluate(t, buf);
            g += x.w_xi * buf[0] + (x.traj->dim() > 1 ? x.w_xidot * buf[1] : 0.0);
        }
        dy[0] = y[1];
        dy[1] = (g - c * y[1] - k * y[0]) / m;
    };
}

std::size_t NfeReport::total() const {
    std::size_t s = 0;
    for (std::size_t v : per_layer) s += v;
    return s;
}

std::size_t NfeReport::max_neuron() const {
    std::size_t m = 0;
    for (const auto& l : per_neuron)
        for (std::size_t v : l) m = std::max(m, v);
    return m;
}

std::size_t NfeReport::min_neuron() const {
    std::size_t m = static_cast<std::size_t>(-1);
    for (const auto& l : per_neuron)
        for (std::size_t v : l) m = std::min(m, v);
    return m == static_cast<std::size_t>(-1) ? 0 : m;
}

DynnOutput::DynnOutput(std::shared_ptr<const DynnParams> params, InputSignal u, std::vector<std::vector<DenseTrajectory>> traj)
    : params_(std::move(params)), u_(std::move(u)), traj_(std::move(traj)) {}

Vector DynnOutput::operator()(double t) const {
    Vector y = params_->psi * u_.value(t);
    double buf[2];
    for (std::size_t l = 0; l < traj_.size(); ++l)
        for (std::size_t i = 0; i < traj_[l].size(); ++i) {
            const DenseTrajectory& tr = traj_[l][i];
            tr.evaluate(t, buf);
            const Matrix& phi = params_->phi[l][i];
            y += phi.col(0) * buf[0];
            if (phi.cols() > 1) y += phi.col(1) * buf[1];
        }
    return y;
}

Matrix DynnOutput::sample(const std::vector<double>& times) const {
    Matrix out(static_cast<Index>(times.size()), dim());
    for (std::size_t k = 0; k < times.size(); ++k) out.row(static_cast<Index>(k)) = (*this)(times[k]).transpose();
    return out;
}

namespace {

struct NeuronSetup {
    ScalarDrive drive;
    std::vector<std::size_t> tail_index;
    std::vector<std::pair<double, double>> tail_weights;
};

NeuronSetup setup_neuron(const HorizontalLayer& layer, std::size_t i, const InputSignal& u) {
    const NeuronSpec& n = layer.neurons[i];
    const Index di = layer.input_dim;
    NeuronSetup s;
    s.drive = u.project(n.w.segment(0, di), n.w.segment(di, di));
    Index pos = 2 * di;
    for (std::size_t j = i + 1; j < layer.size(); ++j) {
        const double wk = n.w(pos++);
        const double wc = layer.neurons[j].order == NeuronOrder::second ? n.w(pos++) : 0.0;
        s.tail_index.push_back(j);
        s.tail_weights.emplace_back(wk, wc);
    }
    return s;
}

SolverConfig config_for(const SolverConfig& base, const SolverOverrides& ov, std::size_t l, std::size_t i, const InputSignal& u) {
    auto it = ov.find({l, i});
    SolverConfig c = it == ov.end() ? base : it->second;
    c.breakpoints.insert(c.breakpoints.end(), u.breakpoints().begin(), u.breakpoints().end());
    return c;
}

void check_inputs(const DynnParams& p, const InputSignal& u, double t0, double tf) {
    p.validate();
    if (u.dim() != p.input_dim) {
        std::ostringstream os;
        os << "forward pass: input has dimension " << u.dim() << " but the network expects " << p.input_dim;
        throw PreconditionError(os.str());
    }
    if (!(tf > t0)) throw PreconditionError("forward pass: need t0 < tf");
}

IntegrationError tag(const IntegrationError& e, std::size_t l, std::size_t i) {
    std::ostringstream os;
    os << e.what() << " (layer " << l << ", neuron " << i << ")";
    return IntegrationError(os.str(), e.t(), static_cast<int>(l), static_cast<int>(i));
}

} // namespace

ForwardResult forward_pass_whole(const DynnParams& p, const InputSignal& u, double t0, double tf, const SolverConfig& cfg,
                                 const SolverOverrides& overrides) {
    check_inputs(p, u, t0, tf);
    std::vector<std::vector<DenseTrajectory>> traj(p.layers.size());
    NfeReport rep;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const HorizontalLayer& layer = p.layers[l];
        traj[l].resize(layer.size());
        rep.per_neuron.emplace_back(layer.size(), 0);
        for (std::size_t i = layer.size(); i-- > 0;) {
            const NeuronSpec& n = layer.neurons[i];
            NeuronSetup s = setup_neuron(layer, i, u);
            std::vector<TailInput> tail;
            for (std::size_t q = 0; q < s.tail_index.size(); ++q)
                tail.push_back({&traj[l][s.tail_index[q]], s.tail_weights[q].first, s.tail_weights[q].second});
            const VectorField f = neuron_dynamics(n, s.drive, std::move(tail));
            try {
                traj[l][i] = integrate_dense(f, Vector::Zero(output_width(n.order)), t0, tf, config_for(cfg, overrides, l, i, u));
            } catch (const IntegrationError& e) {
                throw tag(e, l, i);
            }
            rep.per_neuron[l][i] = traj[l][i].nfe();
        }
        std::size_t s = 0;
        for (std::size_t v : rep.per_neuron[l]) s += v;
        rep.per_layer.push_back(s);
    }
    return {DynnOutput(std::make_shared<DynnParams>(p), u, std::move(traj)), std::move(rep)};
}

ForwardResult forward_pass_stepped(const DynnParams& p, const InputSignal& u, double t0, double tf, double dt,
                                   const SolverConfig& cfg, const SolverOverrides& overrides) {
    check_inputs(p, u, t0, tf);
    if (!(dt > 0.0)) throw PreconditionError("forward pass: interval length must be positive");
    std::vector<std::vector<DenseTrajectory>> traj(p.layers.size());
    NfeReport rep;
    std::vector<std::vector<NeuronSetup>> setups(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const HorizontalLayer& layer = p.layers[l];
        rep.per_neuron.emplace_back(layer.size(), 0);
        for (std::size_t i = 0; i < layer.size(); ++i) {
            traj[l].emplace_back(output_width(layer.neurons[i].order));
            setups[l].push_back(setup_neuron(layer, i, u));
        }
    }

    const std::size_t nint = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((tf - t0) / dt - 1e-9)));
    for (std::size_t k = 0; k < nint; ++k) {
        const double a = t0 + static_cast<double>(k) * dt;
        const double b = k + 1 == nint ? tf : t0 + static_cast<double>(k + 1) * dt;
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            const HorizontalLayer& layer = p.layers[l];
            for (std::size_t i = layer.size(); i-- > 0;) {
                const NeuronSpec& n = layer.neurons[i];
                const NeuronSetup& s = setups[l][i];
                std::vector<TailInput> tail;
                for (std::size_t q = 0; q < s.tail_index.size(); ++q)
                    tail.push_back({&traj[l][s.tail_index[q]], s.tail_weights[q].first, s.tail_weights[q].second});
                const VectorField f = neuron_dynamics(n, s.drive, std::move(tail));
                const Vector y0 = k == 0 ? Vector::Zero(output_width(n.order)) : traj[l][i](a);
                try {
                    traj[l][i].append(integrate_dense(f, y0, a, b, config_for(cfg, overrides, l, i, u)));
                } catch (const IntegrationError& e) {
                    throw tag(e, l, i);
                }
            }
        }
    }
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        std::size_t s = 0;
        for (std::size_t i = 0; i < traj[l].size(); ++i) {
            rep.per_neuron[l][i] = traj[l][i].nfe();
            s += rep.per_neuron[l][i];
        }
        rep.per_layer.push_back(s);
    }
    return {DynnOutput(std::make_shared<DynnParams>(p), u, std::move(traj)), std::move(rep)};
}

} // namespace dynn
