#include "dynn/systems.hpp"
#include "dynn/error.hpp"
#include "dynn/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dynn::systems {

namespace {

Matrix uniform_matrix(Rng& rng, Index r, Index c, double lo, double hi) {
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

SourceBuilder gaussian_source(const GridSpec& g, Index ny_points, double y0, const SourceSpec& s) {
    Vector profile(g.nx * ny_points);
    for (Index j = 0; j < ny_points; ++j)
        for (Index i = 0; i < g.nx; ++i) {
            const double x = i * g.h, y = y0 + j * g.h;
            profile(i + g.nx * j) = s.amplitude * std::exp(-s.width * ((x - s.cx) * (x - s.cx) + (y - s.cy) * (y - s.cy)));
        }
    const double fire = s.fire_time;
    return [profile, fire](const std::vector<double>& times) {
        Matrix u = Matrix::Zero(static_cast<Index>(times.size()), profile.size());
        for (std::size_t k = 0; k < times.size(); ++k)
            if (std::abs(times[k] - fire) <= 1e-9) u.row(static_cast<Index>(k)) = profile.transpose();
        return u;
    };
}

void check_grid(const GridSpec& g) {
    if (g.nx < 3 || g.ny < 3) throw PreconditionError("grid: need at least 3 points per direction");
    if (!(g.h > 0.0)) throw PreconditionError("grid: mesh size must be positive");
}

// rotation-scaling block plus the real blocks behind it, strictly-upper fill from rng
Matrix assemble_block_triangular(Rng& rng, const std::vector<std::pair<double, double>>& units, double lo, double hi,
                                 const std::vector<double>& skew) {
    Index n = 0;
    for (const auto& u : units) n += u.second > 0.0 ? 2 : 1;
    Matrix a = Matrix::Zero(n, n);
    Index o = 0;
    for (std::size_t k = 0; k < units.size(); ++k) {
        const auto [re, im] = units[k];
        if (im > 0.0) {
            const double s = skew.empty() ? 1.0 : skew[k];
            a(o, o) = re;
            a(o, o + 1) = -im * s;
            a(o + 1, o) = im / s;
            a(o + 1, o + 1) = re;
            for (Index j = o + 2; j < n; ++j) {
                a(o, j) = rng.uniform(lo, hi);
                a(o + 1, j) = rng.uniform(lo, hi);
            }
            o += 2;
        } else {
            a(o, o) = re;
            for (Index j = o + 1; j < n; ++j) a(o, j) = rng.uniform(lo, hi);
            o += 1;
        }
    }
    return a;
}

bool far_enough(const std::vector<std::pair<double, double>>& units, double re, double im, double sep) {
    for (const auto& u : units)
        if (std::hypot(u.first - re, u.second - im) < sep) return false;
    return true;
}

} // namespace

GridSpec default_diffusion_grid() { return {20, 20, 10.0, 10.0, 0.5}; }
GridSpec default_convdiff_grid() { return {20, 20, 10.0, 9.5, 0.5}; }

PdeSystem make_diffusion2d(const GridSpec& g, double diffusivity, const SourceSpec& src) {
    check_grid(g);
    if (!(diffusivity > 0.0)) throw PreconditionError("diffusivity must be positive");
    const Index n = g.nx * g.ny;
    const double s = diffusivity / (g.h * g.h);
    Matrix a = Matrix::Zero(n, n);
    for (Index j = 0; j < g.ny; ++j)
        for (Index i = 0; i < g.nx; ++i) {
            const Index p = i + g.nx * j;
            a(p, p) -= 4.0 * s;
            a(p, (i + 1) % g.nx + g.nx * j) += s;
            a(p, (i + g.nx - 1) % g.nx + g.nx * j) += s;
            a(p, i + g.nx * ((j + 1) % g.ny)) += s;
            a(p, i + g.nx * ((j + g.ny - 1) % g.ny)) += s;
        }
    PdeSystem out;
    out.grid = g;
    out.ss = {a, Matrix::Identity(n, n), Matrix::Identity(n, n), Matrix::Zero(n, n)};
    out.source = gaussian_source(g, g.ny, 0.0, src);
    return out;
}

PdeSystem make_convdiff2d(const GridSpec& g, double diffusivity, double vx, double vy, const SourceSpec& src) {
    check_grid(g);
    if (!(diffusivity > 0.0)) throw PreconditionError("diffusivity must be positive");
    const Index n = g.nx * g.ny;
    const double s = diffusivity / (g.h * g.h);
    const double cx = vx / (2.0 * g.h), cy = vy / (2.0 * g.h);
    Matrix a = Matrix::Zero(n, n);
    for (Index j = 1; j + 1 < g.ny; ++j)
        for (Index i = 0; i < g.nx; ++i) {
            const Index p = i + g.nx * j;
            a(p, p) -= 4.0 * s;
            a(p, (i + 1) % g.nx + g.nx * j) += s - cx;
            a(p, (i + g.nx - 1) % g.nx + g.nx * j) += s + cx;
            a(p, i + g.nx * (j + 1)) += s - cy;
            a(p, i + g.nx * (j - 1)) += s + cy;
        }
    PdeSystem out;
    out.grid = g;
    out.ss = {a, Matrix::Identity(n, n), Matrix::Identity(n, n), Matrix::Zero(n, n)};
    out.source = gaussian_source(g, g.ny, 0.0, src);
    return out;
}

StateSpace make_conditioning_ladder(std::uint64_t seed, int first_index) {
    Rng rng(seed);
    const Index n = 10;
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        a(i, i) = -4.0 + std::pow(2.5, -static_cast<double>(i + first_index));
        for (Index j = i + 1; j < n; ++j) a(i, j) = rng.uniform(0.0, 0.1);
    }
    StateSpace ss;
    ss.a = a;
    ss.b = uniform_matrix(rng, n, n, 0.0, 0.5);
    ss.c = uniform_matrix(rng, n, n, 0.0, 0.5);
    ss.d = uniform_matrix(rng, n, n, -0.5, 0.0);
    return ss;
}

MixedClusterOptions default_mixed_cluster_options() {
    MixedClusterOptions o;
    o.blobs = {
        {-1.0, 0.0, 0.4, 15, 0},
        {-1.5, 4.0, 0.4, 0, 10},
        {-4.5, 0.0, 0.5, 14, 8},
        {-5.0, 5.0, 0.4, 0, 10},
        {-8.5, 0.0, 0.5, 15, 8},
        {-9.0, 6.0, 0.4, 0, 9},
    };
    return o;
}

Matrix haar_rotation(Index n, std::uint64_t seed) {
    if (n < 1) throw PreconditionError("haar_rotation: n must be positive");
    Rng rng(seed);
    Matrix g(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR();
    for (Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

GeneratedSystem make_mixed_cluster_system(std::uint64_t seed, const MixedClusterOptions& opts) {
    Rng rng(seed);
    std::vector<std::pair<double, double>> pairs, reals, all;
    for (const Blob& b : opts.blobs) {
        // reals on a jittered even grid along the axis, so the separation always holds
        const double spacing = b.reals > 0 ? 2.0 * b.radius / b.reals : 0.0;
        if (b.reals > 0 && spacing < opts.min_separation)
            throw PreconditionError("mixed system: blob too narrow for its real eigenvalues");
        for (int k = 0; k < b.reals; ++k) {
            const double slack = 0.5 * (spacing - opts.min_separation);
            const double re = b.re - b.radius + (k + 0.5) * spacing + rng.uniform(-slack, slack);
            reals.emplace_back(re, 0.0);
            all.emplace_back(re, 0.0);
        }
        for (int k = 0; k < b.pairs; ++k) {
            double re, im;
            int tries = 0;
            do {
                const double r = b.radius * std::sqrt(rng.uniform());
                const double th = rng.uniform(0.0, 2.0 * M_PI);
                re = b.re + r * std::cos(th);
                im = std::abs(b.im + r * std::sin(th));
                if (++tries > 100000) throw PreconditionError("mixed system: blob too crowded for the requested separation");
            } while (im < opts.min_imag || !far_enough(all, re, im, opts.min_separation));
            pairs.emplace_back(re, im);
            all.emplace_back(re, im);
        }
    }
    // shuffle within the pair and real groups so blob membership is not visible in the block order
    auto shuffle = [&](std::vector<std::pair<double, double>>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
    };
    shuffle(pairs);
    shuffle(reals);
    std::vector<std::pair<double, double>> units = pairs;
    units.insert(units.end(), reals.begin(), reals.end());

    GeneratedSystem out;
    const Matrix abar = assemble_block_triangular(rng, units, -0.5, 0.0, {});
    const Index n = abar.rows();
    const Matrix bbar = uniform_matrix(rng, n, opts.inputs, 0.0, 1.0);
    const Matrix cbar = uniform_matrix(rng, opts.outputs, n, 0.0, 1.0);
    const Matrix dbar = -uniform_matrix(rng, opts.outputs, opts.inputs, 0.0, 1.0);
    const Matrix r = haar_rotation(n, rng.next());
    out.ss = {r.transpose() * abar * r, r.transpose() * bbar, cbar * r, dbar};
    out.blob_count = opts.blobs.size();
    for (const auto& u : units) {
        out.eig_re.push_back(u.first);
        out.eig_im.push_back(u.second);
    }
    return out;
}

GeneratedSystem make_random_blob_system(std::uint64_t seed, Index states, Index inputs, Index outputs) {
    if (states < 1 || inputs < 1 || outputs < 1) throw PreconditionError("random system: dimensions must be positive");
    Rng rng(seed);
    // unit types first: 2 = conjugate pair, 1 = real
    std::vector<int> kinds;
    for (Index left = states; left > 0;) {
        const int k = (left >= 2 && rng.uniform() < 0.5) ? 2 : 1;
        kinds.push_back(k);
        left -= k;
    }
    const std::size_t nb = std::min<std::size_t>(1 + rng.below(3), kinds.size());
    std::vector<double> centre(nb);
    for (std::size_t b = 0; b < nb; ++b) centre[b] = -0.5 - 3.0 * static_cast<double>(b) + rng.uniform(-0.3, 0.3);

    std::vector<std::pair<double, double>> units;
    for (std::size_t u = 0; u < kinds.size(); ++u) {
        const std::size_t b = u < nb ? u : rng.below(nb);
        double re, im;
        int tries = 0;
        do {
            re = centre[b] + rng.uniform(-0.7, 0.7);
            im = kinds[u] == 2 ? rng.uniform(0.2, 1.0) : 0.0;
            if (++tries > 100000) throw PreconditionError("random system: could not place separated eigenvalues");
        } while (!far_enough(units, re, im, 0.1));
        units.emplace_back(re, im);
    }
    for (std::size_t i = units.size(); i > 1; --i) std::swap(units[i - 1], units[rng.below(i)]);
    std::vector<double> skew;
    for (std::size_t i = 0; i < units.size(); ++i) skew.push_back(rng.uniform(0.5, 2.0));

    GeneratedSystem out;
    const Matrix abar = assemble_block_triangular(rng, units, -0.5, 0.5, skew);
    const Matrix r = haar_rotation(states, rng.next());
    out.ss = {r.transpose() * abar * r, r.transpose() * uniform_matrix(rng, states, inputs, -1.0, 1.0),
              uniform_matrix(rng, outputs, states, -1.0, 1.0) * r, uniform_matrix(rng, outputs, inputs, -1.0, 1.0)};
    out.blob_count = nb;
    for (const auto& u : units) {
        out.eig_re.push_back(u.first);
        out.eig_im.push_back(u.second);
    }
    return out;
}

Matrix sine_input(const std::vector<double>& times, Index dim) {
    Matrix u(static_cast<Index>(times.size()), dim);
    for (std::size_t k = 0; k < times.size(); ++k)
        for (Index i = 0; i < dim; ++i) u(static_cast<Index>(k), i) = std::sin(static_cast<double>(i + 1) * times[k] / 2.0);
    return u;
}

std::vector<double> uniform_grid(double t0, double tf, double dt) {
    if (!(dt > 0.0) || !(tf > t0)) throw PreconditionError("uniform grid: need dt > 0 and t0 < tf");
    const auto n = static_cast<std::size_t>(std::llround((tf - t0) / dt));
    std::vector<double> t(n + 1);
    for (std::size_t k = 0; k <= n; ++k) t[k] = t0 + static_cast<double>(k) * dt;
    t.back() = tf;
    return t;
}

std::vector<std::string> system_names() { return {"diffusion2d", "convdiff2d", "ladder", "mixed", "random"}; }

} // namespace dynn::systems
