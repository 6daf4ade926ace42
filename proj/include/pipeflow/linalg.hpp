#pragma once

#include "pipeflow/core.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace pipeflow {

/// Compressed row storage. Eigen keeps indices sorted and unique after
/// makeCompressed(), which is what assemble_from_triplets guarantees.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Sums duplicates in (row, col, insertion) order so the result does not
/// depend on the container the triplets came from. Throws IndexError.
SparseMatrix assemble_from_triplets(Index rows, Index cols, const std::vector<Triplet>& triplets);

/// Sparse LU with COLAMD column ordering and partial pivoting.
class Factorization {
public:
    Index rows() const { return rows_; }
    VectorX solve(const VectorX& b) const;
    MatrixX solve(const MatrixX& b) const;

private:
    friend Factorization lu_factorize(const SparseMatrix& a);
    using Solver = Eigen::SparseLU<SparseColMatrix, Eigen::COLAMDOrdering<int>>;
    std::shared_ptr<Solver> lu_;
    Index rows_ = 0;
};

/// Throws SingularMatrix (with the failing pivot column) or ArgumentError.
Factorization lu_factorize(const SparseMatrix& a);
inline VectorX lu_solve(const Factorization& f, const VectorX& b) { return f.solve(b); }

/// Dense copy, for oracles and small problems.
inline MatrixX to_dense(const SparseMatrix& a) { return MatrixX(a); }

/// Identity of the given size.
SparseMatrix sparse_identity(Index n);

/// [A  -B^T; -B  0] from velocity block A (n x n) and coupling B (m x n).
SparseMatrix saddle_matrix(const SparseMatrix& a, const SparseMatrix& b);

/// Splits unknowns into free and fixed ones and eliminates the fixed values
/// symmetrically: A_ff x_f = b_f - A_fc x_c.
class DofPartition {
public:
    DofPartition() = default;
    explicit DofPartition(const std::vector<char>& fixed);

    Index full_size() const { return static_cast<Index>(free_of_full_.size()); }
    Index free_size() const { return static_cast<Index>(full_of_free_.size()); }
    bool is_fixed(Index i) const { return free_of_full_[static_cast<std::size_t>(i)] < 0; }
    Index free_index(Index i) const { return free_of_full_[static_cast<std::size_t>(i)]; }
    const std::vector<Index>& free_dofs() const { return full_of_free_; }

    SparseMatrix restrict_matrix(const SparseMatrix& a) const;
    /// b_f - A_fc x_c, where x holds the fixed values (other entries ignored).
    VectorX reduce_rhs(const SparseMatrix& a, const VectorX& b, const VectorX& x) const;
    VectorX restrict_vector(const VectorX& x) const;
    /// Full vector with free entries from x_free and fixed entries from fixed_values.
    VectorX expand(const VectorX& x_free, const VectorX& fixed_values) const;

private:
    std::vector<Index> free_of_full_;
    std::vector<Index> full_of_free_;
};

/// Smallest singular value by inverse power iteration on A^T A. Throws
/// NoConvergence after max_iterations.
double smallest_singular_value(const SparseMatrix& a, double tol, int max_iterations = 1000);

/// Largest eigenvalue mu of the symmetric pencil x^T A x = mu x^T B x (B SPD)
/// by block subspace iteration with Rayleigh-Ritz. apply_inverse maps x to
/// B^{-1} A x; apply_a and apply_b are the two operators.
struct PencilOperators {
    Index size = 0;
    std::function<MatrixX(const MatrixX&)> apply_inverse;
    std::function<MatrixX(const MatrixX&)> apply_a;
    std::function<MatrixX(const MatrixX&)> apply_b;
};
struct PencilResult {
    double value = 0.0;
    VectorX vector;
    int iterations = 0;
};
PencilResult largest_pencil_eigenvalue(const PencilOperators& ops, int block, double tol, int max_iterations,
                                       std::uint64_t seed = 7);

/// Functional N(v) with the gradient of N(v)^4, for Rayleigh maximization of
/// N(v)^2 / (v^T G v).
struct QuarticNorm {
    std::function<double(const VectorX&)> value;
    std::function<VectorX(const VectorX&)> quartic_gradient;
};

struct RayleighOptions {
    int iterations = 200;
    int restarts = 20;
    std::uint64_t seed = 1;
    double tol = 1e-10;
};

struct RayleighResult {
    double value = 0.0;
    VectorX argvec;
    std::vector<double> history;  // best restart, one entry per iteration
    int restart = 0;
};

/// Maximizes N(v)^2 / (v^T G v) over the constraint space. `projector` maps a
/// dual vector r to the G-Riesz representative of r restricted to the
/// constraint space (the solution of the constrained problem G w = r).
/// Each sweep is v <- projector(grad N^4(v)), normalized in the G norm,
/// which never decreases the objective because N^4 is convex. Throws
/// NoConvergence if no restart produces a finite objective.
RayleighResult rayleigh_maximize(const SparseMatrix& gram, const QuarticNorm& norm,
                                 const std::function<VectorX(const VectorX&)>& projector,
                                 const RayleighOptions& options);

}  // namespace pipeflow
