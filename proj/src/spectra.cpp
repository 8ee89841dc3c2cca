#include "dynn/spectra.hpp"
#include "dynn/error.hpp"
#include "dynn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

namespace dynn::spectra {

namespace {

std::map<std::string, ClusteringFn>& registry() {
    static std::map<std::string, ClusteringFn> r{{"kmeans", weighted_kmeans}};
    return r;
}
std::mutex registry_mutex;

double sqdist(double ax, double ay, double bx, double by) {
    const double dx = ax - bx, dy = ay - by;
    return dx * dx + dy * dy;
}

struct KmeansRun {
    std::vector<std::size_t> labels;
    double inertia = std::numeric_limits<double>::infinity();
};

KmeansRun kmeans_once(const WeightedPoints& pts, std::size_t k, const ClusterOptions& opts, Rng& rng) {
    const std::size_t n = pts.size();
    std::vector<double> cx, cy;
    cx.reserve(k);
    cy.reserve(k);

    // k-means++ seeding, weights multiply the D^2 sampling mass
    auto pick = [&](const std::vector<double>& mass) {
        const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
        if (total <= 0.0) return static_cast<std::size_t>(rng.below(n));
        double u = rng.uniform() * total;
        for (std::size_t i = 0; i < n; ++i) {
            u -= mass[i];
            if (u < 0.0) return i;
        }
        return n - 1;
    };
    std::size_t first = pick(pts.w);
    cx.push_back(pts.x[first]);
    cy.push_back(pts.y[first]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sqdist(pts.x[i], pts.y[i], cx[0], cy[0]);
    while (cx.size() < k) {
        std::vector<double> mass(n);
        for (std::size_t i = 0; i < n; ++i) mass[i] = pts.w[i] * d2[i];
        const std::size_t c = pick(mass);
        cx.push_back(pts.x[c]);
        cy.push_back(pts.y[c]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sqdist(pts.x[i], pts.y[i], pts.x[c], pts.y[c]));
    }

    double scale = 1.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max({scale, std::abs(pts.x[i]), std::abs(pts.y[i])});

    std::vector<std::size_t> labels(n, 0);
    for (int it = 0; it < opts.max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sqdist(pts.x[i], pts.y[i], cx[c], cy[c]);
                if (d < best) {
                    best = d;
                    labels[i] = c;
                }
            }
        }
        // empty clusters take the point that currently costs the most
        std::vector<double> wsum(k, 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) ++count[labels[i]];
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            std::size_t worst = n;
            double worst_cost = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[labels[i]] < 2) continue;
                const double cost = pts.w[i] * sqdist(pts.x[i], pts.y[i], cx[labels[i]], cy[labels[i]]);
                if (cost > worst_cost) {
                    worst_cost = cost;
                    worst = i;
                }
            }
            --count[labels[worst]];
            labels[worst] = c;
            count[c] = 1;
        }

        std::vector<double> nx(k, 0.0), ny(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            nx[labels[i]] += pts.w[i] * pts.x[i];
            ny[labels[i]] += pts.w[i] * pts.y[i];
            wsum[labels[i]] += pts.w[i];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            nx[c] /= wsum[c];
            ny[c] /= wsum[c];
            shift = std::max(shift, std::sqrt(sqdist(nx[c], ny[c], cx[c], cy[c])));
        }
        cx.swap(nx);
        cy.swap(ny);
        if (shift <= opts.tol * scale) break;
    }

    // final assignment against the converged centroids, keeping clusters non-empty
    KmeansRun run;
    run.labels = labels;
    run.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        run.inertia += pts.w[i] * sqdist(pts.x[i], pts.y[i], cx[labels[i]], cy[labels[i]]);
    return run;
}

} // namespace

std::vector<std::size_t> weighted_kmeans(const WeightedPoints& pts, std::size_t k, const ClusterOptions& opts) {
    if (k == 0 || k > pts.size()) throw PreconditionError("kmeans: cluster count must be within [1, number of points]");
    Rng rng(opts.seed);
    KmeansRun best;
    for (int r = 0; r < std::max(1, opts.n_init); ++r) {
        KmeansRun run = kmeans_once(pts, k, opts, rng);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best.labels;
}

void register_clustering(const std::string& name, ClusteringFn fn) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    registry()[name] = std::move(fn);
}

std::vector<std::string> clustering_algorithms() {
    std::lock_guard<std::mutex> lock(registry_mutex);
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

std::vector<Eigenvalue> extract_eigenvalues(const Matrix& r, const linalg::BlockLayout& layout) {
    if (r.rows() != r.cols() || layout.total() != r.rows())
        throw PreconditionError("extract_eigenvalues: layout does not match the matrix");
    std::vector<Eigenvalue> out;
    out.reserve(layout.count());
    for (std::size_t b = 0; b < layout.count(); ++b) {
        const Index o = layout.offset(b);
        if (layout.size(b) == 1) {
            out.push_back({r(o, o), 0.0, b, false});
        } else if (layout.size(b) == 2) {
            const double tr = r(o, o) + r(o + 1, o + 1);
            const double det = r(o, o) * r(o + 1, o + 1) - r(o, o + 1) * r(o + 1, o);
            const double disc = tr * tr - 4.0 * det;
            if (disc >= 0.0) {
                std::ostringstream os;
                os << "unreduced block: 2x2 block " << b << " has real eigenvalues (discriminant " << disc << ")";
                throw PreconditionError(os.str());
            }
            out.push_back({0.5 * tr, 0.5 * std::sqrt(-disc), b, true});
        } else {
            throw PreconditionError("extract_eigenvalues: Schur blocks must be 1x1 or 2x2");
        }
    }
    return out;
}

bool same_eigenvalue(const Eigenvalue& a, const Eigenvalue& b) {
    const double d = std::hypot(a.re - b.re, std::abs(a.im) - std::abs(b.im));
    const double mag = std::max(std::hypot(a.re, a.im), std::hypot(b.re, b.im));
    return d <= 1e-9 * (1.0 + mag);
}

std::vector<std::size_t> group_identical(const std::vector<Eigenvalue>& evs) {
    const std::size_t n = evs.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (same_eigenvalue(evs[i], evs[j])) {
                const std::size_t a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
    std::vector<std::size_t> id(n, n), out(n);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (id[root] == n) id[root] = next++;
        out[i] = id[root];
    }
    return out;
}

ClusterPlan plan_clusters(const std::vector<Eigenvalue>& evs, std::size_t num_clusters, const ClusterOptions& opts) {
    const std::size_t n = evs.size();
    if (n == 0) throw PreconditionError("plan_clusters: no eigenvalues");
    if (num_clusters < 1) throw PreconditionError("plan_clusters: need at least one cluster");
    {
        std::vector<bool> seen(n, false);
        for (const auto& e : evs) {
            if (e.block_index >= n || seen[e.block_index])
                throw PreconditionError("plan_clusters: block indices must be a permutation of 0..n-1");
            seen[e.block_index] = true;
        }
    }

    ClusteringFn fn;
    {
        std::lock_guard<std::mutex> lock(registry_mutex);
        auto it = registry().find(opts.algorithm);
        if (it == registry().end()) throw PreconditionError("plan_clusters: unknown clustering algorithm '" + opts.algorithm + "'");
        fn = it->second;
    }

    const auto group = group_identical(evs);
    const std::size_t ngroups = *std::max_element(group.begin(), group.end()) + 1;
    if (num_clusters > ngroups) {
        std::ostringstream os;
        os << "forced split of repeated eigenvalues: " << num_clusters << " clusters requested but only " << ngroups
           << " distinct eigenvalues";
        throw ForcedSplitError(os.str(), num_clusters, ngroups);
    }

    // one weighted point per distinct eigenvalue, represented by its first member
    WeightedPoints pts;
    std::vector<std::size_t> rep(ngroups, n);
    pts.x.assign(ngroups, 0.0);
    pts.y.assign(ngroups, 0.0);
    pts.w.assign(ngroups, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t g = group[i];
        if (rep[g] == n) {
            rep[g] = i;
            pts.x[g] = evs[i].re;
            pts.y[g] = std::abs(evs[i].im);
        }
        pts.w[g] += 1.0;
    }
    const auto labels = fn(pts, num_clusters, opts);
    if (labels.size() != ngroups) throw PreconditionError("plan_clusters: clustering backend returned wrong label count");

    // order clusters by descending maximum real part, ties by smallest block index
    std::vector<double> max_re(num_clusters, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> min_block(num_clusters, std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = labels[group[i]];
        if (c >= num_clusters) throw PreconditionError("plan_clusters: clustering backend returned an invalid label");
        raw[i] = c;
        max_re[c] = std::max(max_re[c], evs[i].re);
        min_block[c] = std::min(min_block[c], evs[i].block_index);
    }
    for (std::size_t c = 0; c < num_clusters; ++c)
        if (min_block[c] == std::numeric_limits<std::size_t>::max())
            throw PreconditionError("plan_clusters: clustering produced an empty cluster");
    std::vector<std::size_t> order(num_clusters);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (max_re[a] != max_re[b]) return max_re[a] > max_re[b];
        return min_block[a] < min_block[b];
    });
    std::vector<std::size_t> relabel(num_clusters);
    for (std::size_t k = 0; k < num_clusters; ++k) relabel[order[k]] = k;

    ClusterPlan plan;
    plan.num_clusters = num_clusters;
    plan.assignment.assign(n, 0);
    plan.cluster_order.resize(num_clusters);
    std::iota(plan.cluster_order.begin(), plan.cluster_order.end(), 0);
    plan.within_order.assign(num_clusters, {});

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    // reals first, then |re|, then |im|, then block index; members of one group share the key
    auto key = [&](std::size_t i) {
        const Eigenvalue& r = evs[rep[group[i]]];
        return std::make_tuple(evs[i].pair, std::abs(r.re), std::abs(r.im), evs[i].block_index);
    };
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    for (std::size_t i : idx) {
        const std::size_t c = relabel[raw[i]];
        plan.assignment[evs[i].block_index] = c;
        plan.within_order[c].push_back(evs[i].block_index);
    }
    return plan;
}

std::vector<std::size_t> sequence_blocks(const ClusterPlan& plan) {
    std::vector<std::size_t> seq;
    for (std::size_t c : plan.cluster_order)
        seq.insert(seq.end(), plan.within_order.at(c).begin(), plan.within_order.at(c).end());
    return seq;
}

} // namespace dynn::spectra
