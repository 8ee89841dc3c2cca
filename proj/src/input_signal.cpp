#include "dynn/error.hpp"
#include "dynn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynn {

namespace {

// interval k with t_k <= t < t_{k+1} (right limit) or t_k < t <= t_{k+1} (left limit);
// -1 before the first knot, n-1 at or after the last one
Index locate(const std::vector<double>& times, double t, Side side) {
    auto it = side == Side::right ? std::upper_bound(times.begin(), times.end(), t)
                                  : std::lower_bound(times.begin(), times.end(), t);
    return static_cast<Index>(it - times.begin()) - 1;
}

} // namespace

const char* to_string(Interpolation m) { return m == Interpolation::linear ? "linear" : "constant"; }

InputSignal InputSignal::analytic(Index dim, Fn u, Fn du, std::vector<double> breakpoints) {
    if (dim < 1) throw PreconditionError("input signal: dimension must be positive");
    InputSignal s;
    s.dim_ = dim;
    s.u_ = std::move(u);
    s.du_ = std::move(du);
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    s.breakpoints_ = std::move(breakpoints);
    return s;
}

InputSignal InputSignal::zero(Index dim) {
    auto z = [dim](double) { return Vector::Zero(dim).eval(); };
    return analytic(dim, z, z);
}

InputSignal InputSignal::sampled(std::vector<double> times, Matrix values, Interpolation mode) {
    const Index n = static_cast<Index>(times.size());
    if (n < 1) throw PreconditionError("input signal: need at least one sample");
    if (values.rows() != n || values.cols() < 1)
        throw PreconditionError("input signal: sample matrix must have one row per time");
    for (Index k = 0; k + 1 < n; ++k) {
        if (!(times[k + 1] > times[k])) {
            std::ostringstream os;
            os << "input signal: grid times must be strictly increasing (duplicate or decreasing at index " << k + 1 << ", t = "
               << times[k + 1] << ")";
            throw PreconditionError(os.str());
        }
    }
    if (!values.allFinite()) throw PreconditionError("input signal: samples contain non-finite values");

    InputSignal s;
    s.dim_ = values.cols();
    s.mode_ = mode;
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    const Index d = s.dim_;
    if (mode == Interpolation::linear) {
        s.slopes_ = Matrix::Zero(std::max<Index>(n - 1, 0), d);
        for (Index k = 0; k + 1 < n; ++k)
            s.slopes_.row(k) = (s.values_.row(k + 1) - s.values_.row(k)) / (s.times_[k + 1] - s.times_[k]);
        // only knots where the slope actually changes constrain the integrator
        for (Index k = 0; k < n; ++k) {
            bool kink = false;
            for (Index j = 0; j < d && !kink; ++j) {
                const double left = k > 0 ? s.slopes_(k - 1, j) : 0.0;
                const double right = k + 1 < n ? s.slopes_(k, j) : 0.0;
                kink = std::abs(left - right) > 1e-13 * std::max(std::abs(left), std::abs(right));
            }
            if (kink) s.breakpoints_.push_back(s.times_[k]);
        }
    } else {
        s.breakpoints_ = s.times_;
        s.warnings_.push_back("piecewise-constant input: u' is taken as zero between knots and the jump-impulse correction is not applied");
    }
    return s;
}

InputSignal derive_input_signal(std::vector<double> times, Matrix values, Interpolation mode) {
    return InputSignal::sampled(std::move(times), std::move(values), mode);
}

Vector InputSignal::value(double t, Side side) const {
    if (!is_sampled()) return u_(t);
    const Index n = static_cast<Index>(times_.size());
    const Index k = locate(times_, t, side);
    if (k < 0) return values_.row(0).transpose();
    if (k >= n - 1) return values_.row(n - 1).transpose();
    if (mode_ == Interpolation::constant) return values_.row(k).transpose();
    const double th = (t - times_[k]) / (times_[k + 1] - times_[k]);
    return ((1.0 - th) * values_.row(k) + th * values_.row(k + 1)).transpose();
}

Vector InputSignal::derivative(double t, Side side) const {
    if (!is_sampled()) return du_(t);
    const Index n = static_cast<Index>(times_.size());
    const Index k = locate(times_, t, side);
    if (mode_ == Interpolation::constant || k < 0 || k >= n - 1) return Vector::Zero(dim_);
    return slopes_.row(k).transpose();
}

ScalarDrive InputSignal::project(const RowVector& e, const RowVector& v) const {
    if (e.size() != dim_ || v.size() != dim_) throw PreconditionError("input projection: weight width does not match input dimension");
    ScalarDrive d;
    d.e_ = e;
    d.v_ = v;
    d.mode_ = mode_;
    d.zero_ = (e.array() == 0.0).all() && (v.array() == 0.0).all();
    if (!is_sampled()) {
        d.analytic_ = true;
        d.src_ = std::make_shared<InputSignal>(*this);
        return d;
    }
    d.times_ = times_;
    const Vector lv = values_ * e.transpose();
    d.level_.assign(lv.data(), lv.data() + lv.size());
    if (mode_ == Interpolation::linear && slopes_.rows() > 0) {
        const Vector rv = slopes_ * v.transpose();
        d.rate_.assign(rv.data(), rv.data() + rv.size());
    }
    return d;
}

double ScalarDrive::operator()(double t, Side side) const {
    if (zero_) return 0.0;
    if (analytic_) return e_.dot(src_->value(t, side)) + v_.dot(src_->derivative(t, side));
    const Index n = static_cast<Index>(times_.size());
    const Index k = locate(times_, t, side);
    if (k < 0) return level_[0];
    if (k >= n - 1) return level_[n - 1];
    if (mode_ == Interpolation::constant) return level_[k];
    const double th = (t - times_[k]) / (times_[k + 1] - times_[k]);
    return (1.0 - th) * level_[k] + th * level_[k + 1] + rate_[k];
}

} // namespace dynn
