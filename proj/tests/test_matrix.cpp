#include "catch_amalgamated.hpp"

#include <cmath>
#include <filesystem>

#include "sa3d/matrix.hpp"

using namespace sa3d;

namespace {

// Second reference with the loops in (k, i, j) order, in double precision.
Matrix kij_product(const Matrix& a, const Matrix& b) {
    std::vector<double> acc(static_cast<std::size_t>(a.rows() * b.cols()), 0.0);
    for (Count k = 0; k < a.cols(); ++k)
        for (Count i = 0; i < a.rows(); ++i)
            for (Count j = 0; j < b.cols(); ++j)
                acc[i * b.cols() + j] += static_cast<double>(a(i, k)) * b(k, j);
    Matrix c(a.rows(), b.cols());
    for (Count i = 0; i < c.rows(); ++i)
        for (Count j = 0; j < c.cols(); ++j) c(i, j) = static_cast<float>(acc[i * c.cols() + j]);
    return c;
}

std::filesystem::path tmp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("oracle small cases") {
    const auto i2 = Matrix::identity(2);
    CHECK(bitwise_equal(oracle_matmul(i2, i2), i2));

    const auto a = Matrix::from_rows({{1, 2}, {3, 4}});
    const auto b = Matrix::from_rows({{5, 6}, {7, 8}});
    CHECK(bitwise_equal(oracle_matmul(a, b), Matrix::from_rows({{19, 22}, {43, 50}})));

    CHECK_THROWS_AS(oracle_matmul(Matrix(2, 3), Matrix(2, 3)), Error);
}

TEST_CASE("oracle agrees with a (k,i,j) triple loop") {
    const auto a = random_matrix(64, 48, 11, Fill::Uniform);
    const auto b = random_matrix(48, 32, 12, Fill::Uniform);
    CHECK(max_relative_error(oracle_matmul(a, b), kij_product(a, b)) <= 1e-5);

    const auto ai = random_matrix(64, 48, 13, Fill::SmallInt);
    const auto bi = random_matrix(48, 32, 14, Fill::SmallInt);
    CHECK(bitwise_equal(oracle_matmul(ai, bi), kij_product(ai, bi)));
}

TEST_CASE("layouts are storage only") {
    const auto m = random_matrix(5, 7, 3, Fill::Uniform);
    const auto cm = relayout(m, Layout::ColMajor);
    CHECK(cm.layout() == Layout::ColMajor);
    for (Count i = 0; i < 5; ++i)
        for (Count j = 0; j < 7; ++j) CHECK(cm(i, j) == m(i, j));
    CHECK(bitwise_equal(m, cm));
    CHECK(cm.storage()[1] == m(1, 0));  // column-major neighbour

    // the generator fills the same logical matrix in either layout
    CHECK(bitwise_equal(random_matrix(5, 7, 3, Fill::Uniform, Layout::ColMajor), m));
    CHECK(content_hash(cm) == content_hash(m));

    const auto a = random_matrix(6, 4, 9, Fill::SmallInt, Layout::ColMajor);
    const auto b = random_matrix(4, 3, 10, Fill::SmallInt, Layout::RowMajor);
    CHECK(bitwise_equal(oracle_matmul(a, b), oracle_matmul(relayout(a, Layout::RowMajor), b)));
}

TEST_CASE("transpose") {
    const auto m = random_matrix(3, 5, 1, Fill::Uniform);
    CHECK(bitwise_equal(transpose(transpose(m)), m));
    const auto t = transpose(m);
    CHECK(t.rows() == 5);
    CHECK(t(4, 2) == m(2, 4));
}

TEST_CASE("block views") {
    Matrix m(4, 4);
    for (Count i = 0; i < 4; ++i)
        for (Count j = 0; j < 4; ++j) m(i, j) = static_cast<float>(10 * i + j);
    const auto v = block_view(m, 2, 2);
    CHECK(v(1, 1, 0, 0) == m(2, 2));
    CHECK(v(0, 1, 1, 0) == m(1, 2));
    CHECK(v.blocks_down() == 2);
    CHECK(v.blocks_across() == 2);
    const auto blk = v.block(1, 0, Layout::ColMajor);
    CHECK(blk.rows() == 2);
    CHECK(blk(1, 1) == m(3, 1));

    try {
        block_view(m, 3, 2);
        FAIL("expected IndivisiblePartition");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IndivisiblePartition);
    }
}

TEST_CASE("random matrices") {
    const auto a = random_matrix(16, 16, 5, Fill::SmallInt);
    const auto b = random_matrix(16, 16, 5, Fill::SmallInt);
    CHECK(bitwise_equal(a, b));
    CHECK_FALSE(bitwise_equal(a, random_matrix(16, 16, 6, Fill::SmallInt)));
    for (float v : a.storage()) {
        CHECK(v == std::round(v));
        CHECK(std::abs(v) <= 8.0f);
    }
}

TEST_CASE("relative error") {
    const auto a = Matrix::from_rows({{1, 2}, {4, 8}});
    auto b = a;
    CHECK(max_relative_error(a, b) == 0.0);
    b(1, 1) = 8.8f;
    CHECK(max_relative_error(b, a) == Catch::Approx(0.1).epsilon(1e-6));
    CHECK_THROWS_AS(max_relative_error(a, Matrix(2, 3)), Error);
}

TEST_CASE("binary and csv round trips") {
    const auto m = random_matrix(7, 3, 21, Fill::Uniform, Layout::ColMajor);
    const auto bin = tmp_file("sa3d_matrix_test.bin");
    save_binary(m, bin);
    CHECK(std::filesystem::file_size(bin) == 16 + 7 * 3 * 4);
    CHECK(bitwise_equal(load_binary(bin), m));

    const auto csv = tmp_file("sa3d_matrix_test.csv");
    const auto small = random_matrix(3, 4, 2, Fill::SmallInt);
    save_csv(small, csv);
    CHECK(bitwise_equal(load_csv(csv), small));

    std::filesystem::remove(bin);
    std::filesystem::remove(csv);
    CHECK_THROWS_AS(load_binary(bin), Error);
}
