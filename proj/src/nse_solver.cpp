#include "pipeflow/nse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace pipeflow {

void SolverConfig::validate() const
{
    if (!(relative_tolerance > 0.0) || !(absolute_tolerance > 0.0))
        throw ArgumentError("solver tolerances must be positive");
    if (max_iterations < 1) throw ArgumentError("max_iterations must be at least 1");
    if (picard_iterations < 0 || divergence_window < 0 || max_backtracks < 0)
        throw ArgumentError("iteration counts must be non-negative");
    if (!(lambda_initial_step > 0.0) || lambda_initial_step > 1.0)
        throw ArgumentError("lambda_initial_step must lie in (0, 1]");
    if (!(lambda_min_step > 0.0) || lambda_min_step > lambda_initial_step)
        throw ArgumentError("lambda_min_step must lie in (0, lambda_initial_step]");
    if (!(lambda_growth >= 1.0)) throw ArgumentError("lambda_growth must be at least 1");
}

const char* linearization_name(Linearization l)
{
    switch (l) {
    case Linearization::Picard: return "PICARD";
    case Linearization::Newton: return "NEWTON";
    case Linearization::PicardThenNewton: return "PICARD_THEN_NEWTON";
    }
    return "?";
}

const char* outlet_name(OutletCondition o) { return o == OutletCondition::Ddn ? "DDN" : "DO_NOTHING"; }
const char* convection_name(ConvectionForm c) { return c == ConvectionForm::Skew ? "SKEW" : "CONVECTIVE"; }

NavierStokesSystem::NavierStokesSystem(const FESpace& space, const ProblemData& data, const ReferenceFlow& ref,
                                       const SolverConfig& config)
    : space_(space), data_(data), config_(config), w_star_(ref.w_star)
{
    config_.validate();
    k_ = assemble_stiffness(space_);
    b_ = assemble_divergence(space_);
    data_load_ = -data_.eta * (k_ * w_star_);
    if (data_.force) data_load_ += assemble_body_force(space_, data_.force);
    if (data_.traction) data_load_ += assemble_outlet_traction(space_, data_.traction);

    fixed_ = space_.dirichlet_mask();
    fixed_.resize(static_cast<std::size_t>(space_.total_size()), 0);
    partition_ = DofPartition(fixed_);

    // Roundoff floor for the absolute test: the size of the terms that cancel
    // in the residual at lambda = 1.
    const VectorX cw = assemble_convection(space_, w_star_, config_.convection) * w_star_;
    scale_ = std::max({1.0, data_load_.norm(), cw.norm(), data_.eta * (k_ * w_star_).norm()});
    reference_ = residual(VectorX::Zero(size()), 1.0).norm();
}

VectorX NavierStokesSystem::residual(const VectorX& x, double lambda) const
{
    const Index nu = space_.velocity_size();
    const VectorX v = x.head(nu);
    const VectorX q = x.tail(space_.pressure_size());
    const VectorX u = v + w_star_;

    VectorX r(size());
    VectorX mom = data_.eta * (k_ * v) - b_.transpose() * q - lambda * data_load_;
    if (lambda != 0.0) {
        mom += lambda * (assemble_convection(space_, u, config_.convection) * u);
        if (config_.outlet == OutletCondition::Ddn) mom += lambda * (assemble_ddn_boundary(space_, u, w_star_).matrix * v);
    }
    r.head(nu) = mom;
    r.tail(space_.pressure_size()) = -(b_ * v);
    for (Index i = 0; i < size(); ++i)
        if (fixed_[static_cast<std::size_t>(i)]) r[i] = 0.0;
    return r;
}

SparseMatrix NavierStokesSystem::jacobian(const VectorX& x, double lambda) const
{
    const VectorX v = x.head(space_.velocity_size());
    const VectorX u = v + w_star_;
    SparseMatrix a = data_.eta * k_;
    if (lambda != 0.0) {
        a += lambda * (assemble_convection(space_, u, config_.convection) +
                       assemble_convection_derivative(space_, u, config_.convection));
        if (config_.outlet == OutletCondition::Ddn)
            a += lambda * (assemble_ddn_boundary(space_, u, w_star_).matrix + assemble_ddn_derivative(space_, u, v));
    }
    return saddle_matrix(a, b_);
}

SparseMatrix NavierStokesSystem::picard_matrix(const VectorX& x, double lambda) const
{
    const VectorX a = velocity(x);
    SparseMatrix m = data_.eta * k_;
    if (lambda != 0.0) {
        m += lambda * assemble_convection(space_, a, config_.convection);
        if (config_.outlet == OutletCondition::Ddn) m += lambda * assemble_ddn_boundary(space_, a, w_star_).matrix;
    }
    return saddle_matrix(m, b_);
}

VectorX NavierStokesSystem::picard_rhs(const VectorX& x, double lambda) const
{
    VectorX rhs = VectorX::Zero(size());
    VectorX mom = lambda * data_load_;
    if (lambda != 0.0) mom -= lambda * (assemble_convection(space_, velocity(x), config_.convection) * w_star_);
    rhs.head(space_.velocity_size()) = mom;
    return rhs;
}

VectorX NavierStokesSystem::solve_reduced(const SparseMatrix& full, const VectorX& rhs) const
{
    const SparseMatrix a = partition_.restrict_matrix(full);
    const VectorX y = lu_factorize(a).solve(partition_.restrict_vector(rhs));
    return partition_.expand(y, VectorX::Zero(size()));
}

double NavierStokesSystem::reference_norm(double lambda) const { return lambda * reference_; }

double NavierStokesSystem::relative(double norm, double lambda) const
{
    const double ref = reference_norm(lambda);
    return ref > 0.0 ? norm / ref : norm;
}

bool NavierStokesSystem::converged(double norm, double lambda) const
{
    return norm <= config_.relative_tolerance * reference_norm(lambda) ||
           norm <= config_.absolute_tolerance * scale_;
}

SolutionFields NavierStokesSystem::package(const VectorX& x, double lambda) const
{
    SolutionFields s;
    s.shifted = x.head(space_.velocity_size());
    s.velocity = s.shifted + w_star_;
    s.pressure = x.tail(space_.pressure_size());
    const double norm = residual(x, lambda).norm();
    s.absolute_residual = norm;
    s.relative_residual = relative(norm, lambda);
    s.converged = converged(norm, lambda);
    const VectorX div = b_ * s.velocity;
    s.divergence_residual = div.size() ? div.cwiseAbs().maxCoeff() : 0.0;
    return s;
}

namespace {

std::string describe(const std::string& what, int iterations, double rel)
{
    std::ostringstream msg;
    msg.precision(6);
    msg << what << " after " << iterations << " iterations (relative residual " << rel << ")";
    return msg.str();
}

struct Phase {
    VectorX x;
    std::vector<double> history;
    int iterations = 0;
    bool converged = false;
};

// Picard sweeps until convergence, `stop_relative`, or max_it. Throws
// Diverged on `window` consecutive increases when strict.
Phase picard_phase(const NavierStokesSystem& sys, VectorX x, double lambda, int max_it, double stop_relative,
                   bool strict)
{
    const SolverConfig& cfg = sys.config();
    Phase ph;
    double previous = 0.0;
    int increases = 0;
    for (int k = 0;; ++k) {
        const double norm = sys.residual(x, lambda).norm();
        const double rel = sys.relative(norm, lambda);
        ph.history.push_back(rel);
        if (sys.converged(norm, lambda)) {
            ph.converged = true;
            break;
        }
        if (k > 0) {
            increases = rel > previous ? increases + 1 : 0;
            if (cfg.divergence_window > 0 && increases >= cfg.divergence_window) {
                if (strict) throw Diverged(describe("Picard residual increased repeatedly", k, rel), ph.history);
                break;
            }
        }
        if (rel <= stop_relative || k >= max_it) break;
        previous = rel;
        x = sys.solve_reduced(sys.picard_matrix(x, lambda), sys.picard_rhs(x, lambda));
        ++ph.iterations;
    }
    ph.x = std::move(x);
    return ph;
}

Phase newton_phase(const NavierStokesSystem& sys, VectorX x, double lambda, int max_it, std::vector<double> history)
{
    const SolverConfig& cfg = sys.config();
    Phase ph;
    ph.history = std::move(history);
    VectorX r = sys.residual(x, lambda);
    double norm = r.norm();
    for (int k = 0;; ++k) {
        if (k > 0 || ph.history.empty()) ph.history.push_back(sys.relative(norm, lambda));
        if (sys.converged(norm, lambda)) {
            ph.converged = true;
            break;
        }
        if (k >= max_it) break;
        const VectorX delta = sys.solve_reduced(sys.jacobian(x, lambda), -r);
        double alpha = 1.0;
        bool accepted = false;
        for (int b = 0; b <= cfg.max_backtracks; ++b, alpha *= 0.5) {
            const VectorX trial = x + alpha * delta;
            const VectorX rt = sys.residual(trial, lambda);
            const double nt = rt.norm();
            if (std::isfinite(nt) && (nt <= (1.0 - 1e-4 * alpha) * norm || sys.converged(nt, lambda))) {
                x = trial;
                r = rt;
                norm = nt;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw LineSearchFailure(describe("Newton line search failed", k, sys.relative(norm, lambda)));
        ++ph.iterations;
    }
    ph.x = std::move(x);
    return ph;
}

SolutionFields finish(const NavierStokesSystem& sys, const Phase& ph, double lambda, int picard_its, int newton_its)
{
    SolutionFields s = sys.package(ph.x, lambda);
    s.residual_history = ph.history;
    s.picard_iterations = picard_its;
    s.newton_iterations = newton_its;
    s.iterations = picard_its + newton_its;
    return s;
}

}  // namespace

SolutionFields NavierStokesSystem::picard(const VectorX& x0, double lambda) const
{
    const Phase ph = picard_phase(*this, x0, lambda, config_.max_iterations, 0.0, true);
    if (!ph.converged)
        throw Diverged(describe("Picard did not converge", ph.iterations, ph.history.back()), ph.history);
    return finish(*this, ph, lambda, ph.iterations, 0);
}

SolutionFields NavierStokesSystem::newton(const VectorX& x0, double lambda) const
{
    const Phase ph = newton_phase(*this, x0, lambda, config_.max_iterations, {});
    if (!ph.converged)
        throw Diverged(describe("Newton did not converge", ph.iterations, ph.history.back()), ph.history);
    return finish(*this, ph, lambda, 0, ph.iterations);
}

SolutionFields NavierStokesSystem::run(const VectorX& x0, double lambda) const
{
    switch (config_.linearization) {
    case Linearization::Picard: return picard(x0, lambda);
    case Linearization::Newton: return newton(x0, lambda);
    case Linearization::PicardThenNewton: break;
    }
    const Phase p = picard_phase(*this, x0, lambda, config_.picard_iterations, config_.picard_switch, false);
    if (p.converged) return finish(*this, p, lambda, p.iterations, 0);
    const Phase n = newton_phase(*this, p.x, lambda, std::max(1, config_.max_iterations - p.iterations), p.history);
    if (!n.converged)
        throw Diverged(describe("Newton did not converge", p.iterations + n.iterations, n.history.back()), n.history);
    return finish(*this, n, lambda, p.iterations, n.iterations);
}

SolutionFields stokes_solve(const FESpace& space, const ProblemData& data)
{
    VectorX load = VectorX::Zero(space.velocity_size());
    if (data.force) load += assemble_body_force(space, data.force);
    if (data.traction) load += assemble_outlet_traction(space, data.traction);
    const SaddleSolution s =
        solve_saddle(data.eta * assemble_stiffness(space), assemble_divergence(space), load,
                     VectorX::Zero(space.pressure_size()), space.dirichlet_mask(), inflow_trace(space, data));
    SolutionFields f;
    f.velocity = s.velocity;
    f.pressure = s.pressure;
    f.shifted = s.velocity;
    f.converged = true;
    f.relative_residual = s.relative_residual;
    const VectorX div = assemble_divergence(space) * s.velocity;
    f.divergence_residual = div.size() ? div.cwiseAbs().maxCoeff() : 0.0;
    return f;
}

ContinuationState continuation_solve(const NavierStokesSystem& system)
{
    const SolverConfig& cfg = system.config();
    const SparseMatrix k = assemble_stiffness(system.space());
    const Index nu = system.space().velocity_size();
    const auto grad_norm = [&](const VectorX& x) {
        const VectorX v = x.head(nu);
        return std::sqrt(std::max(0.0, v.dot(k * v)));
    };

    ContinuationState st;
    VectorX x = VectorX::Zero(system.size());
    double lambda = 0.0;
    double step = cfg.lambda_initial_step;
    st.lambdas.push_back(0.0);
    st.gradient_norms.push_back(0.0);
    st.iterations.push_back(0);
    st.steps.push_back(0.0);
    st.solutions.push_back(x);

    while (lambda < 1.0) {
        double trial = lambda + step;
        if (trial > 1.0 - 1e-12) trial = 1.0;
        std::ostringstream msg;
        msg.precision(17);
        msg << "lambda " << trial << " step " << trial - lambda;
        try {
            const SolutionFields s = system.newton(x, trial);
            x.head(nu) = s.shifted;
            x.tail(system.space().pressure_size()) = s.pressure;
            st.steps.push_back(trial - lambda);
            lambda = trial;
            st.lambdas.push_back(lambda);
            st.gradient_norms.push_back(grad_norm(x));
            st.iterations.push_back(s.iterations);
            st.solutions.push_back(x);
            msg << " accepted after " << s.iterations << " Newton iterations";
            st.log.push_back(msg.str());
            step *= cfg.lambda_growth;
        } catch (const Error& e) {
            msg << " rejected: " << e.what();
            st.log.push_back(msg.str());
            step *= 0.5;
            if (step < cfg.lambda_min_step) {
                std::ostringstream err;
                err.precision(17);
                err << "continuation stalled at lambda " << lambda << " (step " << step << ")";
                throw ContinuationStalled(err.str());
            }
        }
    }
    return st;
}

SolveResult solve(const FESpace& space, const DomainSpec& spec, const ProblemData& data, const SolverConfig& config)
{
    SolveResult out;
    out.reference = build_reference_flow(space, spec, data);
    const NavierStokesSystem system(space, data, out.reference, config);
    if (!config.continuation) {
        out.fields = system.run(VectorX::Zero(system.size()), 1.0);
        return out;
    }
    out.continuation = continuation_solve(system);
    out.fields = system.package(out.continuation.solutions.back(), 1.0);
    int total = 0;
    for (int it : out.continuation.iterations) total += it;
    out.fields.newton_iterations = total;
    out.fields.iterations = total;
    return out;
}

DataNorms data_norms(const FESpace& space, const ProblemData& data)
{
    DataNorms n;
    if (data.force) n.force = l2_norm_velocity(space, interpolate_velocity(space, data.force));
    if (data.inflow) {
        const VectorX g = inflow_trace(space, data);
        if (g.cwiseAbs().maxCoeff() > 0.0) n.inflow = h1_norm_velocity(space, harmonic_lift(space, g));
    }
    if (data.traction) {
        n.traction = boundary_l2_norm(space, data.traction, BoundaryTag::Outlet);
        std::vector<char> outlet_vertex(static_cast<std::size_t>(space.pressure_size()), 0);
        VectorX values = VectorX::Zero(space.pressure_size());
        for (const BoundaryFace& f : space.boundary_faces())
            if (f.tag == BoundaryTag::Outlet)
                for (int v : {f.nodes[0], f.nodes[2]}) {
                    outlet_vertex[static_cast<std::size_t>(v)] = 1;
                    values[v] = data.traction(space.node_point(v));
                }
        const SparseMatrix kp = assemble_pressure_stiffness(space);
        const ReducedSystem sys = apply_dirichlet(kp, VectorX::Zero(space.pressure_size()), outlet_vertex, values);
        const VectorX lift = sys.matrix.rows() ? sys.expand(lu_factorize(sys.matrix).solve(sys.rhs)) : sys.fixed_values;
        n.traction += std::sqrt(std::max(0.0, lift.dot(kp * lift)));
    }
    return n;
}

UniquenessReport uniqueness_probe(const FESpace& space, const DomainSpec& spec, const ProblemData& data,
                                  const SolverConfig& config, int n_starts, std::uint64_t seed)
{
    if (n_starts < 1) throw ArgumentError("uniqueness probe needs at least one start");
    const ReferenceFlow ref = build_reference_flow(space, spec, data);
    const NavierStokesSystem system(space, data, ref, config);
    const std::vector<char>& fixed = system.fixed();
    const double base = 1.0 + (ref.w_star.size() ? ref.w_star.cwiseAbs().maxCoeff() : 0.0);

    UniquenessReport rep;
    rep.starts = n_starts;
    rep.data_magnitude = data_norms(space, data).sum();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> amplitude(0.1, 2.0);
    std::vector<VectorX> solutions;
    for (int s = 0; s < n_starts; ++s) {
        const double amp = amplitude(rng) * base;
        VectorX x0 = VectorX::Zero(system.size());
        for (Index i = 0; i < space.velocity_size(); ++i)
            if (!fixed[static_cast<std::size_t>(i)]) x0[i] = amp * unit(rng);
        rep.start_amplitudes.push_back(amp);
        try {
            const SolutionFields f = system.run(x0, 1.0);
            solutions.push_back(f.velocity);
            rep.start_converged.push_back(true);
            rep.start_iterations.push_back(f.iterations);
            ++rep.converged;
        } catch (const Error& e) {
            rep.start_converged.push_back(false);
            rep.start_iterations.push_back(-1);
            rep.failures.push_back("start " + std::to_string(s) + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i < solutions.size(); ++i)
        for (std::size_t j = i + 1; j < solutions.size(); ++j)
            rep.max_pairwise_h1 = std::max(rep.max_pairwise_h1, h1_norm_velocity(space, solutions[i] - solutions[j]));
    return rep;
}

}  // namespace pipeflow
