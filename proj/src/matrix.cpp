#include "sa3d/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace sa3d {

const char* to_string(Layout layout) {
    return layout == Layout::RowMajor ? "row-major" : "column-major";
}

Matrix::Matrix(Count rows, Count cols, Layout layout)
    : rows_(rows), cols_(cols), layout_(layout) {
    if (rows < 0 || cols < 0) {
        throw Error(ErrorKind::DimensionMismatch, "matrix dimensions must be non-negative");
    }
    data_.assign(static_cast<std::size_t>(rows * cols), 0.0f);
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<float>> rows, Layout layout) {
    const auto r = static_cast<Count>(rows.size());
    const Count c = r ? static_cast<Count>(rows.begin()->size()) : 0;
    Matrix m(r, c, layout);
    Count i = 0;
    for (const auto& row : rows) {
        if (static_cast<Count>(row.size()) != c) {
            throw Error(ErrorKind::DimensionMismatch, "ragged matrix literal");
        }
        Count j = 0;
        for (float v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

Matrix Matrix::identity(Count n, Layout layout) {
    Matrix m(n, n, layout);
    for (Count i = 0; i < n; ++i) m(i, i) = 1.0f;
    return m;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (Count i = 0; i < a.rows(); ++i) {
        for (Count j = 0; j < a.cols(); ++j) {
            if (std::bit_cast<std::uint32_t>(a(i, j)) != std::bit_cast<std::uint32_t>(b(i, j))) {
                return false;
            }
        }
    }
    return true;
}

double max_relative_error(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "relative error of differently sized matrices");
    }
    double diff = 0.0;
    double scale = 0.0;
    for (Count i = 0; i < a.rows(); ++i) {
        for (Count j = 0; j < a.cols(); ++j) {
            diff = std::max(diff, std::abs(static_cast<double>(a(i, j)) - b(i, j)));
            scale = std::max(scale, std::abs(static_cast<double>(b(i, j))));
        }
    }
    if (diff == 0.0) return 0.0;
    return diff / std::max(scale, 1e-30);
}

Matrix oracle_matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        std::ostringstream os;
        os << "cannot multiply " << a.rows() << "x" << a.cols() << " by " << b.rows() << "x"
           << b.cols();
        throw Error(ErrorKind::DimensionMismatch, os.str());
    }
    Matrix c(a.rows(), b.cols());
    for (Count i = 0; i < a.rows(); ++i) {
        for (Count j = 0; j < b.cols(); ++j) {
            float acc = 0.0f;
            for (Count k = 0; k < a.cols(); ++k) {
                const float prod = a(i, k) * b(k, j);
                acc += prod;
            }
            c(i, j) = acc;
        }
    }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows(), m.layout());
    for (Count i = 0; i < m.rows(); ++i) {
        for (Count j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    }
    return t;
}

Matrix relayout(const Matrix& m, Layout layout) {
    if (m.layout() == layout) return m;
    Matrix out(m.rows(), m.cols(), layout);
    for (Count i = 0; i < m.rows(); ++i) {
        for (Count j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
    }
    return out;
}

BlockView::BlockView(const Matrix& base, Count block_rows, Count block_cols)
    : base_(&base), block_rows_(block_rows), block_cols_(block_cols) {
    if (block_rows < 1 || block_cols < 1 || base.rows() % block_rows != 0 ||
        base.cols() % block_cols != 0) {
        std::ostringstream os;
        os << "cannot partition " << base.rows() << "x" << base.cols() << " into " << block_rows
           << "x" << block_cols << " blocks";
        throw Error(ErrorKind::IndivisiblePartition, os.str());
    }
}

Matrix BlockView::block(Count I, Count J, Layout layout) const {
    Matrix out(block_rows_, block_cols_, layout);
    for (Count i = 0; i < block_rows_; ++i) {
        for (Count j = 0; j < block_cols_; ++j) out(i, j) = (*this)(I, J, i, j);
    }
    return out;
}

BlockView block_view(const Matrix& m, Count block_rows, Count block_cols) {
    return BlockView(m, block_rows, block_cols);
}

Matrix random_matrix(Count rows, Count cols, std::uint64_t seed, Fill fill, Layout layout) {
    std::mt19937_64 rng(seed);
    Matrix m(rows, cols, layout);
    // Fill in row-major order so the logical content does not depend on layout.
    if (fill == Fill::SmallInt) {
        std::uniform_int_distribution<int> dist(-8, 8);
        for (Count i = 0; i < rows; ++i)
            for (Count j = 0; j < cols; ++j) m(i, j) = static_cast<float>(dist(rng));
    } else {
        std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
        for (Count i = 0; i < rows; ++i)
            for (Count j = 0; j < cols; ++j) m(i, j) = dist(rng);
    }
    return m;
}

std::uint64_t content_hash(const Matrix& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t word, int bytes) {
        for (int b = 0; b < bytes; ++b) {
            h ^= (word >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(m.rows()), 8);
    mix(static_cast<std::uint64_t>(m.cols()), 8);
    for (Count i = 0; i < m.rows(); ++i)
        for (Count j = 0; j < m.cols(); ++j) mix(std::bit_cast<std::uint32_t>(m(i, j)), 4);
    return h;
}

namespace {

void put_le(std::ostream& os, std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xffU));
}

std::uint64_t get_le(std::istream& is, int bytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) {
            throw Error(ErrorKind::Io, "truncated matrix file");
        }
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
    }
    return v;
}

}  // namespace

void save_binary(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    put_le(os, static_cast<std::uint64_t>(m.rows()), 8);
    put_le(os, static_cast<std::uint64_t>(m.cols()), 8);
    for (Count i = 0; i < m.rows(); ++i)
        for (Count j = 0; j < m.cols(); ++j) put_le(os, std::bit_cast<std::uint32_t>(m(i, j)), 4);
    if (!os) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Matrix load_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
    const auto rows = get_le(is, 8);
    const auto cols = get_le(is, 8);
    constexpr std::uint64_t limit = std::uint64_t{1} << 31;
    if (rows > limit || cols > limit) throw Error(ErrorKind::Io, "implausible matrix header");
    Matrix m(static_cast<Count>(rows), static_cast<Count>(cols));
    for (Count i = 0; i < m.rows(); ++i)
        for (Count j = 0; j < m.cols(); ++j)
            m(i, j) = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(is, 4)));
    return m;
}

void save_csv(const Matrix& m, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    os << std::setprecision(std::numeric_limits<float>::max_digits10);
    for (Count i = 0; i < m.rows(); ++i) {
        for (Count j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j);
        }
        os << '\n';
    }
}

Matrix load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::vector<std::vector<float>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<float> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stof(cell));
            } catch (const std::exception&) {
                throw Error(ErrorKind::Io, "bad CSV cell '" + cell + "' in " + path.string());
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw Error(ErrorKind::Io, "ragged CSV matrix in " + path.string());
        }
        rows.push_back(std::move(row));
    }
    const auto r = static_cast<Count>(rows.size());
    const Count c = r ? static_cast<Count>(rows.front().size()) : 0;
    Matrix m(r, c);
    for (Count i = 0; i < r; ++i)
        for (Count j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

}  // namespace sa3d
