#include "pipeflow/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <random>

namespace pipeflow {

namespace {

VectorX random_vector(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorX v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

}  // namespace

double smallest_singular_value(const SparseMatrix& a, double tol, int max_iterations)
{
    if (a.nonZeros() == 0) throw ArgumentError("smallest_singular_value of a zero matrix");
    const SparseMatrix at = a.transpose();
    const SparseMatrix normal = at * a;
    const Factorization lu = lu_factorize(normal);
    std::mt19937_64 rng(12345);
    VectorX x = random_vector(a.cols(), rng);
    x.normalize();
    double mu = (a * x).squaredNorm();
    for (int it = 0; it < max_iterations; ++it) {
        x = lu.solve(x);
        x.normalize();
        const double next = (a * x).squaredNorm();
        if (std::abs(next - mu) <= tol * next) return std::sqrt(next);
        mu = next;
    }
    throw NoConvergence(static_cast<std::size_t>(max_iterations), "inverse iteration for the smallest singular value");
}

PencilResult largest_pencil_eigenvalue(const PencilOperators& ops, int block, double tol, int max_iterations,
                                       std::uint64_t seed)
{
    const Index n = ops.size;
    if (n <= 0) throw ArgumentError("empty pencil");
    const Index p = std::min<Index>(block, n);
    std::mt19937_64 rng(seed);
    MatrixX x(n, p);
    for (Index j = 0; j < p; ++j) x.col(j) = random_vector(n, rng);

    double previous = std::numeric_limits<double>::quiet_NaN();
    int stable = 0;
    for (int it = 1; it <= max_iterations; ++it) {
        MatrixX y = ops.apply_inverse(x);
        Eigen::HouseholderQR<MatrixX> qr(y);
        y = qr.householderQ() * MatrixX::Identity(n, p);
        const MatrixX ar = y.transpose() * ops.apply_a(y);
        const MatrixX br = y.transpose() * ops.apply_b(y);
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX> ritz(0.5 * (ar + ar.transpose()),
                                                               0.5 * (br + br.transpose()));
        if (ritz.info() != Eigen::Success) throw NoConvergence(static_cast<std::size_t>(it), "Rayleigh-Ritz step failed");
        x = y * ritz.eigenvectors();
        const double top = ritz.eigenvalues()[p - 1];
        if (std::isfinite(previous) && std::abs(top - previous) <= tol * std::abs(top)) {
            if (++stable >= 2) return {top, x.col(p - 1), it};
        } else {
            stable = 0;
        }
        previous = top;
    }
    throw NoConvergence(static_cast<std::size_t>(max_iterations), "subspace iteration did not settle");
}

RayleighResult rayleigh_maximize(const SparseMatrix& gram, const QuarticNorm& norm,
                                 const std::function<VectorX(const VectorX&)>& projector,
                                 const RayleighOptions& options)
{
    const Index n = gram.rows();
    std::mt19937_64 rng(options.seed);
    RayleighResult best;
    best.value = -1.0;
    for (int r = 0; r < options.restarts; ++r) {
        VectorX v = projector(random_vector(n, rng));
        const double g0 = v.dot(gram * v);
        if (!(g0 > 0.0)) continue;
        v /= std::sqrt(g0);
        double value = std::pow(norm.value(v), 2);
        std::vector<double> history{value};
        for (int it = 0; it < options.iterations; ++it) {
            VectorX w = projector(norm.quartic_gradient(v));
            const double gw = w.dot(gram * w);
            if (!(gw > 0.0)) break;
            w /= std::sqrt(gw);
            const double next = std::pow(norm.value(w), 2);
            // Guard against roundoff-level decreases so the history stays monotone.
            if (next < value) break;
            v = std::move(w);
            const bool done = next - value <= options.tol * next;
            value = next;
            history.push_back(value);
            if (done) break;
        }
        if (value > best.value) {
            best.value = value;
            best.argvec = v;
            best.history = std::move(history);
            best.restart = r;
        }
    }
    if (!(best.value >= 0.0)) throw NoConvergence(0, "no restart of the Rayleigh maximization produced a value");
    return best;
}

}  // namespace pipeflow
