#pragma once

#include "dynn/linalg.hpp"
#include "dynn/network.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dynn {

// Which one-sided limit to use when t sits exactly on a breakpoint.
enum class Side { right, left };

enum class Interpolation { linear, constant };
const char* to_string(Interpolation m);

class ScalarDrive;

class InputSignal {
public:
    using Fn = std::function<Vector(double)>;

    InputSignal() = default;

    static InputSignal analytic(Index dim, Fn u, Fn du, std::vector<double> breakpoints = {});
    static InputSignal zero(Index dim);
    // Strictly increasing times, values with one row per time.
    static InputSignal sampled(std::vector<double> times, Matrix values, Interpolation mode);

    Index dim() const { return dim_; }
    bool is_sampled() const { return !times_.empty(); }
    Interpolation interpolation() const { return mode_; }
    const std::vector<double>& knots() const { return times_; }
    const Matrix& samples() const { return values_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    Vector value(double t, Side side = Side::right) const;
    Vector derivative(double t, Side side = Side::right) const;

    // t -> e.u(t) + v.u'(t), cheaper to evaluate than the full vectors.
    ScalarDrive project(const RowVector& e, const RowVector& v) const;

private:
    Index dim_ = 0;
    Fn u_, du_;
    std::vector<double> times_;
    Matrix values_;
    Matrix slopes_; // per interval, linear mode only
    Interpolation mode_ = Interpolation::linear;
    std::vector<double> breakpoints_;
    std::vector<std::string> warnings_;
};

InputSignal derive_input_signal(std::vector<double> times, Matrix values, Interpolation mode);

class ScalarDrive {
public:
    ScalarDrive() = default;
    double operator()(double t, Side side) const;
    bool is_zero() const { return zero_; }

private:
    friend class InputSignal;
    std::shared_ptr<const InputSignal> src_; // analytic inputs are evaluated through this
    RowVector e_, v_;
    std::vector<double> times_;
    std::vector<double> level_; // e.u at knots
    std::vector<double> rate_;  // v.slope per interval
    Interpolation mode_ = Interpolation::linear;
    bool analytic_ = false;
    bool zero_ = false;
};

struct SolverConfig {
    std::string method = "rk45";
    double rtol = 1e-10;
    double atol = 1e-10;
    std::optional<double> max_step;
    std::vector<double> breakpoints;
};

class DenseTrajectory {
public:
    explicit DenseTrajectory(Index dim = 0) : dim_(dim) {}

    Index dim() const { return dim_; }
    double t0() const { return t_.empty() ? 0.0 : t_.front(); }
    double tf() const { return t_.empty() ? 0.0 : t_.back(); }
    std::size_t nfe() const { return nfe_; }
    std::size_t segments() const { return t_.empty() ? 0 : t_.size() - 1; }
    std::size_t rejected() const { return rejected_; }
    // accepted step endpoints, t0 first
    const std::vector<double>& step_times() const { return t_; }
    Vector step_state(std::size_t k) const;

    void evaluate(double t, double* out) const;
    Vector operator()(double t) const;

    void append_segment(double t0, double t1, const double* coef5, const double* y1);
    void append(const DenseTrajectory& other);
    void add_nfe(std::size_t n) { nfe_ += n; }
    void add_rejected(std::size_t n) { rejected_ += n; }

private:
    Index dim_;
    std::vector<double> t_;
    std::vector<double> coef_; // 5*dim per segment
    std::vector<double> yend_; // dim per segment
    std::size_t nfe_ = 0;
    std::size_t rejected_ = 0;
};

using VectorField = std::function<void(double t, Side side, const double* y, double* dydt)>;

DenseTrajectory integrate_dense(const VectorField& rhs, const Vector& y0, double t0, double tf, const SolverConfig& cfg);

// Drive g(t) plus the tail (later neurons' outputs) enter a neuron's equation additively.
struct TailInput {
    const DenseTrajectory* traj = nullptr;
    double w_xi = 0.0;
    double w_xidot = 0.0;
};

VectorField neuron_dynamics(const NeuronSpec& spec, ScalarDrive drive, std::vector<TailInput> tail);

struct NfeReport {
    std::vector<std::vector<std::size_t>> per_neuron;
    std::vector<std::size_t> per_layer;

    std::size_t total() const;
    std::size_t max_neuron() const;
    std::size_t min_neuron() const;
};

class DynnOutput {
public:
    DynnOutput() = default;
    DynnOutput(std::shared_ptr<const DynnParams> params, InputSignal u, std::vector<std::vector<DenseTrajectory>> traj);

    Index dim() const { return params_ ? params_->output_dim : 0; }
    Vector operator()(double t) const;
    Matrix sample(const std::vector<double>& times) const; // one row per time
    const DenseTrajectory& trajectory(std::size_t layer, std::size_t neuron) const { return traj_.at(layer).at(neuron); }

private:
    std::shared_ptr<const DynnParams> params_;
    InputSignal u_;
    std::vector<std::vector<DenseTrajectory>> traj_;
};

struct ForwardResult {
    DynnOutput output;
    NfeReport nfe;
};

// (layer, neuron) -> config replacing the global one for that neuron
using SolverOverrides = std::map<std::pair<std::size_t, std::size_t>, SolverConfig>;

ForwardResult forward_pass_whole(const DynnParams& p, const InputSignal& u, double t0, double tf, const SolverConfig& cfg,
                                 const SolverOverrides& overrides = {});
ForwardResult forward_pass_stepped(const DynnParams& p, const InputSignal& u, double t0, double tf, double dt,
                                   const SolverConfig& cfg, const SolverOverrides& overrides = {});

} // namespace dynn
