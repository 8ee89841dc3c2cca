#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace dynn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

// Partition of 0..n-1 into consecutive diagonal blocks.
class BlockLayout {
public:
    BlockLayout() = default;
    explicit BlockLayout(std::vector<Index> sizes);

    std::size_t count() const { return sizes_.size(); }
    Index size(std::size_t b) const { return sizes_[b]; }
    Index offset(std::size_t b) const { return offsets_[b]; }
    Index total() const { return offsets_.empty() ? 0 : offsets_.back(); }
    const std::vector<Index>& sizes() const { return sizes_; }

private:
    std::vector<Index> sizes_;
    std::vector<Index> offsets_; // count()+1 prefix sums
};

struct SchurForm {
    Matrix q;
    Matrix r;
    std::vector<Index> block_sizes; // 1s and 2s along the diagonal of r

    BlockLayout layout() const { return BlockLayout(block_sizes); }
};

SchurForm real_schur(const Matrix& a);

// target[k] is the index (into s.block_sizes) of the block wanted at position k.
SchurForm reorder_schur(const SchurForm& s, std::span<const std::size_t> target);

// Solves a11*X - X*a22 = f.
Matrix solve_sylvester(const Matrix& a11, const Matrix& a22, const Matrix& f);

struct BlockDiagonalization {
    Matrix t3;
    Matrix a;
};

BlockDiagonalization block_diagonalize(const Matrix& r, const BlockLayout& layout);

// exp(scale*m)
Matrix matrix_exponential(const Matrix& m, double scale = 1.0);

struct ConditionNumber {
    double value = 1.0;
    bool numerically_singular = false;
};

ConditionNumber condition_number_2norm(const Matrix& m);

// Helpers shared by the modules above.

// 1x1/2x2 structure of a quasi-triangular matrix, read from its subdiagonal.
std::vector<Index> detect_quasi_blocks(const Matrix& r);

// Rotates the 2x2 block at (k,k) of t into standard form [[a,b],[c,a]] with b*c<0,
// or into upper-triangular form when its eigenvalues are real. q accumulates the
// rotation (pass nullptr to skip). Returns true if the block stays 2x2.
bool standardize_2x2(Matrix& t, Matrix* q, Index k);

double max_abs(const Matrix& m);

} // namespace linalg
} // namespace dynn
