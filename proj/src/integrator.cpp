#include "dynn/error.hpp"
#include "dynn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynn {

namespace {

// Dormand-Prince 5(4)
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// continuous extension (Hairer's contd5)
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799, d4 = -10690763975.0 / 1880347072,
                 d5 = 701980252875.0 / 199316789632, d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

// step controller
constexpr double kSafe = 0.9, kBeta = 0.04, kFacMin = 0.2, kFacMax = 10.0;
constexpr std::size_t kMaxSteps = 5'000'000;

} // namespace

Vector DenseTrajectory::step_state(std::size_t k) const {
    Vector y(dim_);
    if (k + 1 == t_.size() && k > 0) {
        std::copy_n(&yend_[(k - 1) * dim_], dim_, y.data());
    } else {
        std::copy_n(&coef_[k * 5 * dim_], dim_, y.data());
    }
    return y;
}

void DenseTrajectory::evaluate(double t, double* out) const {
    const std::size_t ns = segments();
    if (ns == 0) throw PreconditionError("dense trajectory: evaluation of an empty trajectory");
    if (t >= t_.back()) {
        std::copy_n(&yend_[(ns - 1) * dim_], dim_, out);
        return;
    }
    std::size_t s = 0;
    if (t > t_.front()) s = std::min<std::size_t>(ns - 1, std::upper_bound(t_.begin(), t_.end(), t) - t_.begin() - 1);
    const double* r = &coef_[s * 5 * dim_];
    const double h = t_[s + 1] - t_[s];
    const double th = std::max(0.0, (t - t_[s]) / h);
    const double th1 = 1.0 - th;
    const Index n = dim_;
    for (Index i = 0; i < n; ++i)
        out[i] = r[i] + th * (r[n + i] + th1 * (r[2 * n + i] + th * (r[3 * n + i] + th1 * r[4 * n + i])));
}

Vector DenseTrajectory::operator()(double t) const {
    Vector y(dim_);
    evaluate(t, y.data());
    return y;
}

void DenseTrajectory::append_segment(double t0, double t1, const double* coef5, const double* y1) {
    if (t_.empty()) {
        t_.push_back(t0);
    } else if (t0 != t_.back()) {
        throw PreconditionError("dense trajectory: appended segment does not start where the last one ended");
    }
    t_.push_back(t1);
    coef_.insert(coef_.end(), coef5, coef5 + 5 * dim_);
    yend_.insert(yend_.end(), y1, y1 + dim_);
}

void DenseTrajectory::append(const DenseTrajectory& other) {
    if (other.dim_ != dim_) throw PreconditionError("dense trajectory: dimension mismatch on append");
    for (std::size_t s = 0; s < other.segments(); ++s)
        append_segment(other.t_[s], other.t_[s + 1], &other.coef_[s * 5 * dim_], &other.yend_[s * dim_]);
    nfe_ += other.nfe_;
    rejected_ += other.rejected_;
}

DenseTrajectory integrate_dense(const VectorField& rhs, const Vector& y0, double t0, double tf, const SolverConfig& cfg) {
    if (cfg.method != "rk45") throw PreconditionError("integrate_dense: unsupported method '" + cfg.method + "'");
    if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0)) throw PreconditionError("integrate_dense: tolerances must be positive");
    if (!(tf > t0)) throw PreconditionError("integrate_dense: need t0 < tf");
    if (!y0.allFinite()) throw PreconditionError("integrate_dense: non-finite initial state");

    const Index n = y0.size();
    const double span = tf - t0;
    const double hmax = cfg.max_step ? std::min(*cfg.max_step, span) : span;
    const double hmin = 1e-14 * span;

    std::vector<double> stops;
    for (double b : cfg.breakpoints)
        if (b > t0 && b < tf) stops.push_back(b);
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    stops.push_back(tf);

    DenseTrajectory traj(n);
    std::size_t nfe = 0;
    auto f = [&](double t, Side side, const Vector& y, Vector& dy) {
        rhs(t, side, y.data(), dy.data());
        ++nfe;
    };

    Vector y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ys(n), y1(n), err(n), coef(5 * n);
    double t = t0;
    f(t, Side::right, y, k1);

    auto scale = [&](double a, double b) { return cfg.atol + cfg.rtol * std::max(std::abs(a), std::abs(b)); };
    // componentwise bound |err_i| <= atol + rtol |y_i|, i.e. the max norm
    auto enorm_of = [&](const Vector& v, const Vector& ref) {
        double s = 0.0;
        for (Index i = 0; i < n; ++i) s = std::max(s, std::abs(v(i)) / scale(ref(i), ref(i)));
        return s;
    };

    auto initial_step = [&](double window) {
        const double limit = std::min(hmax, window);
        const double d0 = enorm_of(y, y), d1n = enorm_of(k1, y);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, limit);
        ys = y + h0 * k1;
        f(t + h0, Side::right, ys, k2);
        const double d2 = enorm_of(k2 - k1, y) / h0;
        if (d1n <= 1e-15 && d2 <= 1e-15) return limit; // locally constant: let the error estimate decide
        const double h1 = std::pow(0.01 / std::max(d1n, d2), 1.0 / 5.0);
        return std::min({100.0 * h0, h1, limit});
    };

    std::size_t stop = 0;
    double h = initial_step(stops[0] - t0);
    double facold = 1e-4;
    bool last_rejected = false;
    std::size_t rejected = 0, steps = 0;

    while (true) {
        const double wend = stops[stop];
        bool land = false;
        if (t + 1.01 * h >= wend) {
            h = wend - t;
            land = true;
        }
        const double tn = land ? wend : t + h;
        const Side end_side = land ? Side::left : Side::right;

        ys = y + h * a21 * k1;
        f(t + c2 * h, Side::right, ys, k2);
        ys = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, Side::right, ys, k3);
        ys = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, Side::right, ys, k4);
        ys = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, Side::right, ys, k5);
        ys = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(tn, end_side, ys, k6);
        y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        f(tn, end_side, y1, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double enorm = 0.0;
        for (Index i = 0; i < n; ++i) enorm = std::max(enorm, std::abs(err(i)) / scale(y(i), y1(i)));
        if (!std::isfinite(enorm)) enorm = 1e10;

        const double fac11 = std::pow(enorm, 0.2 - kBeta * 0.75);
        if (enorm <= 1.0) {
            double fac = fac11 / std::pow(facold, kBeta);
            fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafe));
            double hnew = h / fac;
            facold = std::max(enorm, 1e-4);
            if (last_rejected) hnew = std::min(hnew, h);
            last_rejected = false;

            for (Index i = 0; i < n; ++i) {
                const double r2 = y1(i) - y(i);
                const double r3 = h * k1(i) - r2;
                coef(i) = y(i);
                coef(n + i) = r2;
                coef(2 * n + i) = r3;
                coef(3 * n + i) = r2 - h * k7(i) - r3;
                coef(4 * n + i) = h * (d1 * k1(i) + d3 * k3(i) + d4 * k4(i) + d5 * k5(i) + d6 * k6(i) + d7 * k7(i));
            }
            traj.append_segment(t, tn, coef.data(), y1.data());
            if (++steps > kMaxSteps) throw IntegrationError("integrate_dense: step budget exhausted", tn);
            t = tn;
            y = y1;
            k1 = k7;
            h = std::min(hnew, hmax);
            if (land) {
                if (stop + 1 == stops.size()) break;
                ++stop;
                f(t, Side::right, y, k1); // u' may jump here
            }
        } else {
            h = h / std::min(1.0 / kFacMin, fac11 / kSafe);
            last_rejected = true;
            ++rejected;
            if (h < hmin) {
                std::ostringstream os;
                os << "stiffness/accuracy failure: step size " << h << " underflowed at t = " << t;
                throw IntegrationError(os.str(), t);
            }
        }
    }
    traj.add_nfe(nfe);
    traj.add_rejected(rejected);
    return traj;
}

} // namespace dynn
