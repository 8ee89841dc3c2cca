#pragma once

#include "dynn/linalg.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dynn::spectra {

// One eigenvalue unit: a real eigenvalue or a conjugate pair stored once (im > 0).
struct Eigenvalue {
    double re = 0.0;
    double im = 0.0;
    std::size_t block_index = 0;
    bool pair = false;
};

std::vector<Eigenvalue> extract_eigenvalues(const Matrix& r, const linalg::BlockLayout& layout);

// |a - b| <= 1e-9 (1 + |a|) measured in the (re, |im|) plane.
bool same_eigenvalue(const Eigenvalue& a, const Eigenvalue& b);

// Group id per unit; identical eigenvalues share a group. Ids are dense, ordered by first occurrence.
std::vector<std::size_t> group_identical(const std::vector<Eigenvalue>& evs);

struct ClusterOptions {
    std::string algorithm = "kmeans";
    std::uint64_t seed = 0;
    int n_init = 10;
    int max_iter = 300;
    double tol = 1e-10;
};

struct ClusterPlan {
    std::size_t num_clusters = 0;
    std::vector<std::size_t> assignment;                 // block index -> cluster id
    std::vector<std::size_t> cluster_order;              // cluster ids, first sequenced first
    std::vector<std::vector<std::size_t>> within_order;  // per cluster id, ordered block indices
};

ClusterPlan plan_clusters(const std::vector<Eigenvalue>& evs, std::size_t num_clusters,
                          const ClusterOptions& opts = {});

std::vector<std::size_t> sequence_blocks(const ClusterPlan& plan);

// Clustering backends. A backend receives weighted 2-D points and must return a
// label in [0, k) for every point with no empty label.
struct WeightedPoints {
    std::vector<double> x, y, w;
    std::size_t size() const { return x.size(); }
};
using ClusteringFn = std::function<std::vector<std::size_t>(const WeightedPoints&, std::size_t k, const ClusterOptions&)>;

void register_clustering(const std::string& name, ClusteringFn fn);
std::vector<std::string> clustering_algorithms();

std::vector<std::size_t> weighted_kmeans(const WeightedPoints& pts, std::size_t k, const ClusterOptions& opts);

} // namespace dynn::spectra
