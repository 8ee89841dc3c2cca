#pragma once

#include "dynn/preprocess.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dynn::systems {

struct GridSpec {
    Index nx = 20;
    Index ny = 20;
    double lx = 10.0;
    double ly = 10.0;
    double h = 0.5;
};

// Samples of a source: one row per time, one column per grid point.
using SourceBuilder = std::function<Matrix(const std::vector<double>& times)>;

struct PdeSystem {
    StateSpace ss;
    GridSpec grid;
    SourceBuilder source;
};

struct SourceSpec {
    double amplitude = 100.0;
    double width = 0.8;
    double cx = 5.0;
    double cy = 5.0;
    double fire_time = 0.2;
};

// Periodic in both directions, h = lx/nx.
PdeSystem make_diffusion2d(const GridSpec& grid, double diffusivity, const SourceSpec& src = {});

// Periodic in x (h = lx/nx), Dirichlet in y: grid rows 0 and ny-1 have zero rows in A.
PdeSystem make_convdiff2d(const GridSpec& grid, double diffusivity, double vx, double vy, const SourceSpec& src = {});

GridSpec default_diffusion_grid();
GridSpec default_convdiff_grid();

// lambda_n = -4 + 2.5^-n for n = first_index .. first_index+9
StateSpace make_conditioning_ladder(std::uint64_t seed, int first_index = 1);

struct Blob {
    double re = 0.0;
    double im = 0.0;   // centre height; 0 for blobs sitting on the real axis
    double radius = 0.5;
    int reals = 0;
    int pairs = 0;
};

struct MixedClusterOptions {
    std::vector<Blob> blobs;
    double min_separation = 0.02;
    double min_imag = 0.15;
    Index inputs = 10;
    Index outputs = 4;
};

MixedClusterOptions default_mixed_cluster_options();

struct GeneratedSystem {
    StateSpace ss;
    std::size_t blob_count = 0;
    std::vector<double> eig_re, eig_im; // generated eigenvalue units (im >= 0)
};

GeneratedSystem make_mixed_cluster_system(std::uint64_t seed, const MixedClusterOptions& opts = default_mixed_cluster_options());

// Small random systems with 1-3 separated eigenvalue blobs, used by the equivalence suite.
GeneratedSystem make_random_blob_system(std::uint64_t seed, Index states, Index inputs, Index outputs);

Matrix haar_rotation(Index n, std::uint64_t seed);

// u_i(t) = sin(i t / 2), i = 1..dim, one row per time
Matrix sine_input(const std::vector<double>& times, Index dim);

std::vector<double> uniform_grid(double t0, double tf, double dt);

std::vector<std::string> system_names();

} // namespace dynn::systems
