#include "pipeflow/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <regex>
#include <string>

namespace pipeflow {

SparseMatrix assemble_from_triplets(Index rows, Index cols, const std::vector<Triplet>& triplets)
{
    if (rows < 0 || cols < 0) throw IndexError("negative matrix dimensions");
    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (const Triplet& t : triplets)
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw IndexError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                             ") outside " + std::to_string(rows) + " x " + std::to_string(cols));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Triplet& x = triplets[a];
        const Triplet& y = triplets[b];
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });

    SparseMatrix m(rows, cols);
    std::vector<int> counts(static_cast<std::size_t>(rows), 0);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Triplet& t = triplets[order[k]];
        if (k == 0 || t.row != triplets[order[k - 1]].row || t.col != triplets[order[k - 1]].col)
            ++counts[static_cast<std::size_t>(t.row)];
    }
    m.reserve(counts);
    for (std::size_t k = 0; k < order.size();) {
        const Triplet& first = triplets[order[k]];
        double sum = 0.0;
        std::size_t j = k;
        while (j < order.size() && triplets[order[j]].row == first.row && triplets[order[j]].col == first.col)
            sum += triplets[order[j++]].value;
        m.insert(first.row, first.col) = sum;
        k = j;
    }
    m.makeCompressed();
    return m;
}

VectorX Factorization::solve(const VectorX& b) const
{
    if (b.size() != rows_) throw ArgumentError("right-hand side size does not match the factorization");
    VectorX x = lu_->solve(b);
    return x;
}

MatrixX Factorization::solve(const MatrixX& b) const
{
    if (b.rows() != rows_) throw ArgumentError("right-hand side size does not match the factorization");
    MatrixX x = lu_->solve(b);
    return x;
}

Factorization lu_factorize(const SparseMatrix& a)
{
    if (a.rows() != a.cols()) throw ArgumentError("LU factorization needs a square matrix");
    Factorization f;
    f.rows_ = a.rows();
    f.lu_ = std::make_shared<Factorization::Solver>();
    SparseColMatrix col = a;
    col.makeCompressed();
    f.lu_->analyzePattern(col);
    f.lu_->factorize(col);
    if (f.lu_->info() != Eigen::Success) {
        const std::string msg = f.lu_->lastErrorMessage();
        Index pivot = -1;
        std::smatch m;
        if (std::regex_search(msg, m, std::regex("(\\d+)"))) pivot = std::stol(m[1].str());
        throw SingularMatrix(pivot, "sparse LU failed: " + msg);
    }
    return f;
}

SparseMatrix sparse_identity(Index n)
{
    SparseMatrix m(n, n);
    m.setIdentity();
    return m;
}

SparseMatrix saddle_matrix(const SparseMatrix& a, const SparseMatrix& b)
{
    const Index n = a.rows();
    const Index m = b.rows();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * b.nonZeros()));
    for (Index i = 0; i < n; ++i)
        for (SparseMatrix::InnerIterator it(a, i); it; ++it) t.push_back({i, it.col(), it.value()});
    for (Index i = 0; i < m; ++i)
        for (SparseMatrix::InnerIterator it(b, i); it; ++it) {
            t.push_back({n + i, it.col(), -it.value()});
            t.push_back({it.col(), n + i, -it.value()});
        }
    return assemble_from_triplets(n + m, n + m, t);
}

DofPartition::DofPartition(const std::vector<char>& fixed)
{
    free_of_full_.assign(fixed.size(), -1);
    for (std::size_t i = 0; i < fixed.size(); ++i)
        if (!fixed[i]) {
            free_of_full_[i] = static_cast<Index>(full_of_free_.size());
            full_of_free_.push_back(static_cast<Index>(i));
        }
}

SparseMatrix DofPartition::restrict_matrix(const SparseMatrix& a) const
{
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (Index r : full_of_free_) {
        const Index fr = free_index(r);
        for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
            const Index fc = free_index(it.col());
            if (fc >= 0) t.push_back({fr, fc, it.value()});
        }
    }
    return assemble_from_triplets(free_size(), free_size(), t);
}

VectorX DofPartition::reduce_rhs(const SparseMatrix& a, const VectorX& b, const VectorX& x) const
{
    VectorX out(free_size());
    for (Index k = 0; k < free_size(); ++k) {
        const Index r = full_of_free_[static_cast<std::size_t>(k)];
        double v = b[r];
        for (SparseMatrix::InnerIterator it(a, r); it; ++it)
            if (is_fixed(it.col())) v -= it.value() * x[it.col()];
        out[k] = v;
    }
    return out;
}

VectorX DofPartition::restrict_vector(const VectorX& x) const
{
    VectorX out(free_size());
    for (Index k = 0; k < free_size(); ++k) out[k] = x[full_of_free_[static_cast<std::size_t>(k)]];
    return out;
}

VectorX DofPartition::expand(const VectorX& x_free, const VectorX& fixed_values) const
{
    VectorX out = fixed_values;
    for (Index k = 0; k < free_size(); ++k) out[full_of_free_[static_cast<std::size_t>(k)]] = x_free[k];
    return out;
}

}  // namespace pipeflow
