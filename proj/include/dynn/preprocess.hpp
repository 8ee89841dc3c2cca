#pragma once

#include "dynn/linalg.hpp"
#include "dynn/spectra.hpp"

#include <limits>
#include <string>
#include <vector>

namespace dynn {

struct StateSpace {
    Matrix a, b, c, d;

    Index states() const { return a.rows(); }
    Index inputs() const { return b.cols(); }
    Index outputs() const { return c.rows(); }

    // throws PreconditionError on inconsistent shapes or non-finite entries
    void validate() const;
};

enum class BlockClass { real, complex, mixed };
const char* to_string(BlockClass c);

struct BlockInfo {
    Index k_r = 0;
    Index k_c = 0;
    Index dim = 0;
    BlockClass cls = BlockClass::real;
};

struct TransformedLTI {
    StateSpace ss;
    Matrix t;
    Matrix t_inv;
    double cond_t = 1.0;
    bool cond_singular = false;
    std::vector<BlockInfo> blocks;
    linalg::BlockLayout layout;
    bool unitary_path = false;
    std::vector<std::string> warnings;
};

struct PreprocessOptions {
    spectra::ClusterOptions clustering;
    double max_cond = std::numeric_limits<double>::infinity();
};

TransformedLTI preprocess_lti(const StateSpace& ss, std::size_t num_clusters, const PreprocessOptions& opts = {});

std::vector<BlockInfo> classify_diagonal_blocks(const Matrix& a, const linalg::BlockLayout& layout);

// Classify one diagonal block on its own.
BlockInfo classify_block(const Matrix& block);

} // namespace dynn
