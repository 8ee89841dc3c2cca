#pragma once

#include "dynn/linalg.hpp"
#include "dynn/preprocess.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dynn {

using RowVector = Eigen::RowVectorXd;

enum class NeuronOrder { first, second };

// Width of a neuron's output as seen by earlier neurons in the same layer:
// first-order neurons only expose xi, second-order ones expose (xi, xi_dot).
inline Index output_width(NeuronOrder o) { return o == NeuronOrder::first ? 1 : 2; }

struct NeuronSpec {
    NeuronOrder order = NeuronOrder::first;
    double m = 0.0;
    double c = 1.0;
    double k = 0.0;
    RowVector w; // [e | v | tail of later neurons, ascending]
};

struct HorizontalLayer {
    std::vector<NeuronSpec> neurons;
    Index k_r = 0;
    Index k_c = 0;
    Index input_dim = 0;

    std::size_t size() const { return neurons.size(); }
};

// M xi'' + C xi' + K xi = E u + V u'
struct SecondOrderSystem {
    Matrix m, c, k, e, v;
};

struct EtaMap {
    Matrix w, q, z;
};

struct ComplexPermutation {
    Matrix t;
    Matrix a, b, c, d;
};

struct DynnParams {
    Index input_dim = 0;
    Index output_dim = 0;
    std::vector<HorizontalLayer> layers;
    std::vector<std::vector<Matrix>> phi; // phi[l][i]: d_o x 1 (first order) or d_o x 2
    Matrix psi;

    Index state_count() const; // sum over neurons of 1 or 2
    void validate() const;
};

struct ArchitectureSummary {
    std::vector<Index> layer_sizes;
    std::vector<Index> first_order_per_layer;
    std::vector<Index> second_order_per_layer;
    Index first_order = 0;
    Index second_order = 0;
};

ArchitectureSummary summarize(const DynnParams& p);

ComplexPermutation permute_complex_block(const Matrix& m_c);
EtaMap map_eta(const Matrix& a_l, const Matrix& b_l);
SecondOrderSystem map_lti_second_order(const Matrix& a_l, const Matrix& b_l);
SecondOrderSystem n_dynn_forward(const HorizontalLayer& layer);
HorizontalLayer n_dynn_inverse(const SecondOrderSystem& sys);
std::vector<HorizontalLayer> map_hidden(const Matrix& a, const Matrix& b, const linalg::BlockLayout& layout);

struct OutputMap {
    std::vector<std::vector<Matrix>> phi;
    Matrix psi;
};

// Reconstruction of one layer's state from interleaved (xi_1, xi_1', xi_2, ...) and u:
// x = f * Y + z * u.
struct LayerReconstruction {
    Matrix f;
    Matrix z;
};
LayerReconstruction layer_reconstruction(const Matrix& a_l, const Matrix& b_l);

OutputMap map_output(const TransformedLTI& t);

struct BuildResult {
    DynnParams params;
    TransformedLTI lti;
};

BuildResult build_dynn(const StateSpace& ss, std::size_t num_clusters, const PreprocessOptions& opts = {});

} // namespace dynn
