#pragma once

#include "pipeflow/reference_flow.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pipeflow {

enum class Linearization : std::uint8_t { Picard, Newton, PicardThenNewton };
enum class OutletCondition : std::uint8_t { Ddn, DoNothing };

struct SolverConfig {
    Linearization linearization = Linearization::PicardThenNewton;
    OutletCondition outlet = OutletCondition::Ddn;
    ConvectionForm convection = ConvectionForm::Skew;
    double relative_tolerance = 1e-10;
    double absolute_tolerance = 1e-13;
    int max_iterations = 100;
    // PICARD_THEN_NEWTON switches once the relative residual drops below
    // picard_switch or after picard_iterations sweeps.
    int picard_iterations = 8;
    double picard_switch = 1e-3;
    // Picard reports divergence after this many consecutive residual
    // increases; 0 disables the check.
    int divergence_window = 5;
    int max_backtracks = 8;
    bool continuation = false;
    double lambda_initial_step = 0.25;
    double lambda_min_step = 1e-4;
    double lambda_growth = 1.5;

    void validate() const;
    bool operator==(const SolverConfig&) const = default;
};

const char* linearization_name(Linearization l);
const char* outlet_name(OutletCondition o);
const char* convection_name(ConvectionForm c);

/// Thrown when a nonlinear iteration fails; carries the residual history.
class Diverged : public Error {
public:
    Diverged(const std::string& what, std::vector<double> trace) : Error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const { return trace_; }

private:
    std::vector<double> trace_;
};

struct SolutionFields {
    VectorX velocity;  // u = v + W*
    VectorX pressure;  // native mixed-formulation pressure
    VectorX shifted;   // v = u - W*
    std::vector<double> residual_history;  // relative residuals, one per iterate
    int iterations = 0;
    int picard_iterations = 0;
    int newton_iterations = 0;
    bool converged = false;
    double relative_residual = 0.0;
    double absolute_residual = 0.0;
    double divergence_residual = 0.0;  // max_k |(r_k, div u)|
};

/// Discrete lambda-family in the shifted unknown X = [v; q]:
///   eta K v + lambda (C(u) u + D(u) v) - B^T q = lambda (F + S - eta K W*),
///   -B v = 0,   u = v + W*,
/// with C the convection matrix, D the outlet backflow term (absent for
/// DO_NOTHING), F the body force load and S the traction load. At lambda = 1
/// this is the weak problem; at lambda = 0 the unique solution is X = 0.
class NavierStokesSystem {
public:
    NavierStokesSystem(const FESpace& space, const ProblemData& data, const ReferenceFlow& ref,
                       const SolverConfig& config);

    const FESpace& space() const { return space_; }
    const SolverConfig& config() const { return config_; }
    Index size() const { return space_.total_size(); }
    const std::vector<char>& fixed() const { return fixed_; }

    /// Full-size residual; rows of fixed DOFs are zero.
    VectorX residual(const VectorX& x, double lambda) const;
    /// Exact Jacobian of residual(), full size (fixed rows included unreduced).
    SparseMatrix jacobian(const VectorX& x, double lambda) const;
    /// Oseen matrix and right-hand side with the transport frozen at x.
    SparseMatrix picard_matrix(const VectorX& x, double lambda) const;
    VectorX picard_rhs(const VectorX& x, double lambda) const;
    /// Solves the reduced system; fixed entries of the result are zero.
    VectorX solve_reduced(const SparseMatrix& full, const VectorX& rhs) const;

    /// |R(0)| on free rows at lambda; lambda times its value at 1.
    double reference_norm(double lambda) const;
    /// norm / reference_norm(lambda), or norm when the reference vanishes.
    double relative(double norm, double lambda) const;
    /// Relative test, or the absolute tolerance times the magnitude of the
    /// terms that cancel in the residual (at least 1).
    bool converged(double norm, double lambda) const;

    VectorX velocity(const VectorX& x) const { return x.head(space_.velocity_size()) + w_star_; }
    const VectorX& w_star() const { return w_star_; }

    /// Iterations from x0 at a fixed lambda. Throw Diverged, LineSearchFailure, SingularMatrix.
    SolutionFields picard(const VectorX& x0, double lambda) const;
    SolutionFields newton(const VectorX& x0, double lambda) const;
    SolutionFields run(const VectorX& x0, double lambda) const;

    SolutionFields package(const VectorX& x, double lambda) const;

private:
    const FESpace& space_;
    ProblemData data_;
    SolverConfig config_;
    VectorX w_star_;
    SparseMatrix k_;
    SparseMatrix b_;
    VectorX data_load_;  // F + S - eta K W*
    std::vector<char> fixed_;
    DofPartition partition_;
    double scale_ = 1.0;
    double reference_ = 0.0;
};

/// Linear Stokes problem with Dirichlet inflow, no-slip walls and the natural
/// traction condition on the outlet (no gauge). Throws SingularMatrix.
SolutionFields stokes_solve(const FESpace& space, const ProblemData& data);

struct ContinuationState {
    std::vector<double> lambdas;
    std::vector<double> gradient_norms;  // J(lambda) = |grad v^lambda|
    std::vector<int> iterations;
    std::vector<double> steps;
    std::vector<VectorX> solutions;  // X = [v; q] per accepted lambda
    std::vector<std::string> log;    // step acceptance log
};

struct SolveResult {
    ReferenceFlow reference;
    SolutionFields fields;
    ContinuationState continuation;  // empty unless continuation was used
};

/// Builds the reference flow and solves at lambda = 1, directly or by
/// continuation. Throws Diverged, ContinuationStalled, SingularMatrix.
SolveResult solve(const FESpace& space, const DomainSpec& spec, const ProblemData& data, const SolverConfig& config);

/// Adaptive lambda sweep from 0 to 1 with Newton at each lambda. Throws
/// ContinuationStalled.
ContinuationState continuation_solve(const NavierStokesSystem& system);

struct UniquenessReport {
    int starts = 0;
    int converged = 0;
    std::vector<double> start_amplitudes;
    std::vector<bool> start_converged;
    std::vector<int> start_iterations;
    std::vector<std::string> failures;
    double max_pairwise_h1 = 0.0;
    double data_magnitude = 0.0;  // |f| + |g*| surrogate + |sigma*| surrogate
};

/// Solves from n_starts random initial iterates W* + v0 and compares the
/// converged velocities in H1.
UniquenessReport uniqueness_probe(const FESpace& space, const DomainSpec& spec, const ProblemData& data,
                                  const SolverConfig& config, int n_starts, std::uint64_t seed);

/// |f|_L2 + |lift g*|_H1 + |sigma*|_L2(outlet) + |lift sigma*|_H1, each a
/// computable stand-in for the norm it replaces.
struct DataNorms {
    double force = 0.0;
    double inflow = 0.0;
    double traction = 0.0;
    double sum() const { return force + inflow + traction; }
};
DataNorms data_norms(const FESpace& space, const ProblemData& data);

}  // namespace pipeflow
