#include "pipeflow/fem.hpp"

namespace pipeflow {

SaddleSolution solve_saddle(const SparseMatrix& a, const SparseMatrix& b, const VectorX& load, const VectorX& div_rhs,
                            const std::vector<char>& fixed_velocity, const VectorX& velocity_values,
                            Index pinned_pressure)
{
    const Index nu = a.rows();
    const Index np = b.rows();
    const SparseMatrix full = saddle_matrix(a, b);
    std::vector<char> fixed(static_cast<std::size_t>(nu + np), 0);
    std::copy(fixed_velocity.begin(), fixed_velocity.end(), fixed.begin());
    if (pinned_pressure >= 0) fixed[static_cast<std::size_t>(nu + pinned_pressure)] = 1;
    VectorX rhs(nu + np);
    rhs << load, -div_rhs;
    VectorX values = VectorX::Zero(nu + np);
    values.head(nu) = velocity_values;

    const ReducedSystem sys = apply_dirichlet(full, rhs, fixed, values);
    const Factorization lu = lu_factorize(sys.matrix);
    const VectorX x = lu.solve(sys.rhs);
    const VectorX sol = sys.expand(x);

    SaddleSolution out;
    out.velocity = sol.head(nu);
    out.pressure = sol.tail(np);
    const double scale = std::max(sys.rhs.norm(), 1e-300);
    out.relative_residual = (sys.matrix * x - sys.rhs).norm() / scale;
    return out;
}

}  // namespace pipeflow
