// matrix.hpp - dense single-precision matrices, block-partition views and the
// reference product every simulator result is checked against.
#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <vector>

#include "sa3d/core_model.hpp"

namespace sa3d {

enum class Layout { RowMajor, ColMajor };

const char* to_string(Layout layout);

class Matrix {
public:
    Matrix() = default;
    Matrix(Count rows, Count cols, Layout layout = Layout::RowMajor);

    // Row-major literal, e.g. Matrix::from_rows({{1, 2}, {3, 4}}).
    static Matrix from_rows(std::initializer_list<std::initializer_list<float>> rows,
                            Layout layout = Layout::RowMajor);
    static Matrix identity(Count n, Layout layout = Layout::RowMajor);

    Count rows() const { return rows_; }
    Count cols() const { return cols_; }
    Layout layout() const { return layout_; }

    float operator()(Count i, Count j) const { return data_[offset(i, j)]; }
    float& operator()(Count i, Count j) { return data_[offset(i, j)]; }

    // Raw storage in the matrix's own layout.
    std::span<const float> storage() const { return data_; }
    std::span<float> storage() { return data_; }

private:
    std::size_t offset(Count i, Count j) const {
        return static_cast<std::size_t>(layout_ == Layout::RowMajor ? i * cols_ + j
                                                                    : j * rows_ + i);
    }

    Count rows_ = 0;
    Count cols_ = 0;
    Layout layout_ = Layout::RowMajor;
    std::vector<float> data_;
};

// Same dimensions and identical bit patterns at every logical (i,j).
bool bitwise_equal(const Matrix& a, const Matrix& b);

// Norm-wise: max_ij |a - b| / max_ij |b| (b is the reference). Element-wise
// ratios are meaningless where a sum of signed terms nearly cancels.
double max_relative_error(const Matrix& a, const Matrix& b);

// C(i,j) = sum_k A(i,k) B(k,j), one float product at a time, k ascending.
// The result is row-major.
Matrix oracle_matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);
Matrix relayout(const Matrix& m, Layout layout);

class BlockView {
public:
    BlockView(const Matrix& base, Count block_rows, Count block_cols);

    Count block_rows() const { return block_rows_; }
    Count block_cols() const { return block_cols_; }
    Count blocks_down() const { return base_->rows() / block_rows_; }
    Count blocks_across() const { return base_->cols() / block_cols_; }

    float operator()(Count I, Count J, Count i, Count j) const {
        return (*base_)(block_rows_ * I + i, block_cols_ * J + j);
    }

    // Copy of block (I, J) in the requested layout.
    Matrix block(Count I, Count J, Layout layout = Layout::RowMajor) const;

private:
    const Matrix* base_;
    Count block_rows_;
    Count block_cols_;
};

BlockView block_view(const Matrix& m, Count block_rows, Count block_cols);

enum class Fill { SmallInt, Uniform };

// Deterministic per seed. SmallInt draws integers in [-8, 8] so every partial
// sum of a desk-scale product is exact in single precision.
Matrix random_matrix(Count rows, Count cols, std::uint64_t seed, Fill fill,
                     Layout layout = Layout::RowMajor);

// FNV-1a over the bit patterns of the logical elements in row-major order.
std::uint64_t content_hash(const Matrix& m);

// Binary: u64 rows, u64 cols (little-endian), then rows*cols little-endian
// IEEE-754 floats in row-major order.
void save_binary(const Matrix& m, const std::filesystem::path& path);
Matrix load_binary(const std::filesystem::path& path);

// One row per line, comma separated. Intended for small debug matrices.
void save_csv(const Matrix& m, const std::filesystem::path& path);
Matrix load_csv(const std::filesystem::path& path);

}  // namespace sa3d
