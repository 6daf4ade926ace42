#include "pipeflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pipeflow {

namespace {

Vec2 trace_value(const FESpace& space, const VectorX& u, const BoundaryFace& f, double t)
{
    const auto psi = p2_edge_values(t);
    Vec2 v = Vec2::Zero();
    for (int k = 0; k < 3; ++k)
        for (int c = 0; c < 2; ++c) v[c] += psi[k] * u[space.velocity_dof(c, f.nodes[k])];
    return v;
}

Vec2 trace_point(const FESpace& space, const BoundaryFace& f, double t)
{
    return space.node_point(f.nodes[0]) + t * (space.node_point(f.nodes[2]) - space.node_point(f.nodes[0]));
}

template <typename Kernel>
double outlet_integral(const FESpace& space, Kernel&& kernel)
{
    const LineRule& rule = gauss4();
    double total = 0.0;
    for (const BoundaryFace& f : space.boundary_faces()) {
        if (f.tag != BoundaryTag::Outlet) continue;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
            total += f.length * rule.weights[q] * kernel(f, rule.points[q]);
    }
    return total;
}

double gradient_inner(const FESpace& space, const VectorX& a, const VectorX& b)
{
    const TriangleRule& rule = dunavant6();
    double total = 0.0;
    for (Index t = 0; t < space.num_triangles(); ++t) {
        const double area = space.geometry(t).area;
        for (std::size_t q = 0; q < rule.bary.size(); ++q)
            total += area * rule.weights[q] *
                     (velocity_gradient_at(space, a, t, rule.bary[q]).cwiseProduct(
                          velocity_gradient_at(space, b, t, rule.bary[q])))
                         .sum();
    }
    return total;
}

// (q, div v) with q the P1 pressure.
double pressure_work(const FESpace& space, const VectorX& q, const VectorX& v)
{
    const TriangleRule& rule = dunavant6();
    const Mesh& mesh = space.mesh();
    double total = 0.0;
    for (Index t = 0; t < space.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const double area = space.geometry(t).area;
        for (std::size_t q_ = 0; q_ < rule.bary.size(); ++q_) {
            const Eigen::Vector3d& l = rule.bary[q_];
            const double qv = l[0] * q[tri[0]] + l[1] * q[tri[1]] + l[2] * q[tri[2]];
            total += area * rule.weights[q_] * qv * velocity_gradient_at(space, v, t, l).trace();
        }
    }
    return total;
}

double force_work(const FESpace& space, const VectorField& f, const VectorX& v)
{
    const TriangleRule& rule = dunavant6();
    const Mesh& mesh = space.mesh();
    double total = 0.0;
    for (Index t = 0; t < space.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const double area = space.geometry(t).area;
        for (std::size_t q = 0; q < rule.bary.size(); ++q) {
            const Eigen::Vector3d& l = rule.bary[q];
            const Vec2 x = l[0] * mesh.vertices[tri[0]] + l[1] * mesh.vertices[tri[1]] + l[2] * mesh.vertices[tri[2]];
            total += area * rule.weights[q] * f(x).dot(velocity_at(space, v, t, l));
        }
    }
    return total;
}

}  // namespace

double outlet_cubic_flux(const FESpace& space, const VectorX& v)
{
    return outlet_integral(space, [&](const BoundaryFace& f, double t) {
        const Vec2 w = trace_value(space, v, f, t);
        return 0.5 * w.squaredNorm() * w.dot(f.normal);
    });
}

EnergyReport energy_report(const FESpace& space, const ProblemData& data, const ReferenceFlow& ref,
                           const SolutionFields& fields, const SolverConfig& config)
{
    EnergyReport r;
    const VectorX& u = fields.velocity;
    const VectorX v = u - ref.w_star;
    const bool ddn = config.outlet == OutletCondition::Ddn;

    r.lhs = data.eta * gradient_inner(space, v, v);
    if (data.force) r.force_work = force_work(space, data.force, v);
    if (data.traction)
        r.traction_work = outlet_integral(space, [&](const BoundaryFace& f, double t) {
            return data.traction(trace_point(space, f, t)) * trace_value(space, v, f, t).dot(f.normal);
        });
    r.viscous_coupling = -data.eta * gradient_inner(space, ref.w_star, v);
    r.reference_convection = -convection_form(space, ref.w_star, ref.w_star, v, config.convection);
    r.perturbation_convection = -convection_form(space, v, ref.w_star, v, config.convection);
    r.ddn_dissipation = outlet_integral(space, [&](const BoundaryFace& f, double t) {
        const double z = trace_value(space, u, f, t).dot(f.normal);
        return 0.5 * (ddn ? z + negative_part(z) : z) * trace_value(space, v, f, t).squaredNorm();
    });
    r.pressure_work = pressure_work(space, fields.pressure, v);
    r.retained = r.force_work + r.traction_work + r.viscous_coupling + r.reference_convection + r.perturbation_convection;

    // When v is at roundoff every term is too; the coupling sizes
    // |grad v| (eta |grad W*| + |grad W*|^2 + |f|) keep the ratio meaningful.
    const double gv = std::sqrt(std::max(0.0, gradient_inner(space, v, v)));
    const double gw = std::sqrt(std::max(0.0, gradient_inner(space, ref.w_star, ref.w_star)));
    const double fl2 = data.force ? l2_norm_velocity(space, interpolate_velocity(space, data.force)) : 0.0;
    const double scale = std::max({std::abs(r.lhs), std::abs(r.force_work), std::abs(r.traction_work),
                                   std::abs(r.viscous_coupling), std::abs(r.reference_convection),
                                   std::abs(r.perturbation_convection), std::abs(r.ddn_dissipation),
                                   std::abs(r.pressure_work), gv * (data.eta * gw + gw * gw + fl2)});
    const double gap = std::abs(r.lhs - (r.retained - r.ddn_dissipation + r.pressure_work));
    r.identity_residual = scale > 0.0 ? gap / scale : gap;
    r.inequality_holds = r.lhs <= r.retained + r.pressure_work + 1e-10 * std::max(scale, 1e-300);

    r.min_outlet_normal_velocity = std::numeric_limits<double>::infinity();
    const LineRule& rule = gauss4();
    for (const BoundaryFace& f : space.boundary_faces()) {
        if (f.tag != BoundaryTag::Outlet) continue;
        for (double t : rule.points)
            r.min_outlet_normal_velocity = std::min(r.min_outlet_normal_velocity, trace_value(space, u, f, t).dot(f.normal));
    }
    if (!std::isfinite(r.min_outlet_normal_velocity)) r.min_outlet_normal_velocity = 0.0;
    r.backflow_energy = outlet_integral(space, [&](const BoundaryFace& f, double t) {
        const Vec2 w = trace_value(space, u, f, t);
        return negative_part(w.dot(f.normal)) * w.squaredNorm();
    });
    return r;
}

KernelCheck kernel_properties(int samples, std::uint64_t seed)
{
    KernelCheck k;
    k.samples = samples;
    k.min_shifted = std::numeric_limits<double>::infinity();
    k.min_quadratic = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 10.0);
    for (int i = 0; i < samples; ++i) {
        const double z = normal(rng);
        k.min_shifted = std::min(k.min_shifted, z + negative_part(z));
        k.min_quadratic = std::min(k.min_quadratic, 2.0 * z * z + negative_part(z) * z);
    }
    return k;
}

DivergenceFreeProjector::DivergenceFreeProjector(const FESpace& space) : space_(space)
{
    k_ = assemble_stiffness(space);
    std::vector<char> fixed = space.dirichlet_mask();
    fixed.resize(static_cast<std::size_t>(space.total_size()), 0);
    partition_ = DofPartition(fixed);
    lu_ = lu_factorize(partition_.restrict_matrix(saddle_matrix(k_, assemble_divergence(space))));
}

VectorX DivergenceFreeProjector::operator()(const VectorX& r) const
{
    VectorX rhs = VectorX::Zero(space_.total_size());
    rhs.head(space_.velocity_size()) = r;
    const VectorX y = lu_.solve(partition_.restrict_vector(rhs));
    return partition_.expand(y, VectorX::Zero(space_.total_size())).head(space_.velocity_size());
}

double sobolev_constant(const FESpace& space, const RayleighOptions& options, RayleighResult* detail)
{
    const DivergenceFreeProjector project(space);
    QuarticNorm norm;
    norm.value = [&](const VectorX& v) { return l4_norm_velocity(space, v); };
    norm.quartic_gradient = [&](const VectorX& v) { return l4_quartic_gradient(space, v); };
    RayleighResult res = rayleigh_maximize(project.stiffness(), norm, project, options);
    const double s = 1.0 / res.value;
    if (detail) *detail = std::move(res);
    return s;
}

double trace_eigenvalue(const FESpace& space, double tol)
{
    const Index nn = space.num_nodes();
    const SparseMatrix k = assemble_scalar_stiffness(space);
    const SparseMatrix mb_vec =
        assemble_boundary_mass(space, BoundaryTag::Outlet, [](const Vec2&, const Vec2&, double, std::size_t) { return 1.0; });
    const SparseMatrix mb = mb_vec.block(0, 0, nn, nn);
    std::vector<char> fixed(static_cast<std::size_t>(nn), 0);
    for (Index n = 0; n < nn; ++n) {
        const NodeClass c = space.node_class(n);
        fixed[static_cast<std::size_t>(n)] = c == NodeClass::Inlet || c == NodeClass::Wall;
    }
    const DofPartition part(fixed);
    const SparseMatrix kf = part.restrict_matrix(k);
    const SparseMatrix mf = part.restrict_matrix(mb);
    const Factorization lu = lu_factorize(kf);
    PencilOperators ops;
    ops.size = kf.rows();
    ops.apply_inverse = [&](const MatrixX& x) { return lu.solve(MatrixX(mf * x)); };
    ops.apply_a = [&](const MatrixX& x) { return MatrixX(mf * x); };
    ops.apply_b = [&](const MatrixX& x) { return MatrixX(kf * x); };
    return largest_pencil_eigenvalue(ops, 4, tol, 2000).value;
}

double infsup_constant(const FESpace& space, double tol)
{
    const Index nu = space.velocity_size();
    const Index np = space.pressure_size();
    const SparseMatrix k = assemble_stiffness(space);
    const SparseMatrix b = assemble_divergence(space);
    const SparseMatrix mp = assemble_pressure_mass(space);

    std::vector<char> fixed = space.dirichlet_mask();
    fixed.resize(static_cast<std::size_t>(nu + np), 0);
    const DofPartition part(fixed);
    const Factorization saddle = lu_factorize(part.restrict_matrix(saddle_matrix(k, b)));
    const Index nf = part.free_size() - np;

    const DofPartition vpart(space.dirichlet_mask());
    const SparseMatrix kf = vpart.restrict_matrix(k);
    const Factorization klu = lu_factorize(kf);
    SparseMatrix bf(np, nf);
    {
        std::vector<Triplet> trip;
        for (Index r = 0; r < np; ++r)
            for (SparseMatrix::InnerIterator it(b, r); it; ++it)
                if (!vpart.is_fixed(it.col())) trip.push_back({r, vpart.free_index(it.col()), it.value()});
        bf = assemble_from_triplets(np, nf, trip);
    }

    PencilOperators ops;
    ops.size = np;
    // S^{-1} y is the pressure of  K w - B^T p = 0,  B w = y.
    ops.apply_inverse = [&](const MatrixX& x) {
        const MatrixX y = mp * x;
        MatrixX rhs = MatrixX::Zero(part.free_size(), x.cols());
        rhs.bottomRows(np) = -y;
        return MatrixX(saddle.solve(rhs).bottomRows(np));
    };
    ops.apply_a = [&](const MatrixX& x) { return MatrixX(mp * x); };
    ops.apply_b = [&](const MatrixX& x) {
        const MatrixX w = klu.solve(MatrixX(bf.transpose() * x));
        return MatrixX(bf * w);
    };
    const double nu_max = largest_pencil_eigenvalue(ops, 6, tol, 5000).value;
    return 1.0 / std::sqrt(nu_max);
}

VectorField random_inflow(const DomainSpec& spec, std::uint64_t seed, int modes)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k) a[static_cast<std::size_t>(k)] = unit(rng) / (k + 1);
    const double h = spec.inlet.half_height;
    double flux = 0.0;
    for (int k = 1; k <= modes; ++k) flux += a[static_cast<std::size_t>(k - 1)] * 2.0 * h * (1.0 - std::cos(k * M_PI)) / (k * M_PI);
    if (flux < 0.0)
        for (double& c : a) c = -c;
    const StraightSection inlet = spec.inlet;
    return [a, inlet, h](const Vec2& x) {
        const double s = (inlet.to_local(x)[1] + h) / (2.0 * h);
        double val = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) val += a[k] * std::sin(static_cast<double>(k + 1) * M_PI * s);
        return Vec2(val * inlet.axis());
    };
}

ConstantsEstimate estimate_constants(const FESpace& space, const DomainSpec& spec, double eta,
                                     const ConstantsOptions& options)
{
    if (options.inflow_samples < 1) throw ArgumentError("constants need at least one inflow sample");
    ConstantsEstimate c;
    c.eta = eta;
    RayleighOptions ro;
    ro.restarts = options.restarts;
    ro.iterations = options.iterations;
    ro.seed = options.seed;
    RayleighResult detail;
    c.s_star = sobolev_constant(space, ro, &detail);
    c.s_star_restart = detail.restart;
    c.s_star_history = detail.history;
    c.trace_eigenvalue = trace_eigenvalue(space, options.eigen_tolerance);
    c.trace_constant = std::sqrt(c.trace_eigenvalue);
    c.infsup_constant = infsup_constant(space, options.eigen_tolerance);
    for (int s = 0; s < options.inflow_samples; ++s) {
        ProblemData data;
        data.eta = eta;
        data.inflow = random_inflow(spec, options.seed * 1000003ULL + static_cast<std::uint64_t>(s));
        const ReferenceFlow ref = build_reference_flow(space, spec, data);
        c.m_samples.push_back(ref.report.bound_ratio);
        c.m_star = std::max(c.m_star, ref.report.bound_ratio);
    }
    c.omega_star = c.omega();
    return c;
}

double apriori_data_term(const FESpace& space, const ProblemData& data)
{
    const DataNorms n = data_norms(space, data);
    return n.force + n.traction + n.inflow + n.inflow * n.inflow;
}

AprioriMargin apriori_bound_check(const FESpace& space, const ProblemData& data, const SolutionFields& fields,
                                  const ConstantsEstimate& constants)
{
    if (!std::isfinite(constants.c_star)) throw ConstantsMissing("a-priori constant has not been calibrated");
    AprioriMargin m;
    m.lhs = h1_seminorm_velocity(space, fields.shifted);
    m.data_term = apriori_data_term(space, data);
    m.rhs = constants.c_star * m.data_term;
    m.margin = m.rhs - m.lhs;
    return m;
}

std::vector<ProblemData> apriori_calibration_set(const DomainSpec& spec, double eta, double amplitude)
{
    std::vector<ProblemData> runs;
    for (double sign : {1.0, -1.0}) {
        ProblemData d;
        d.eta = eta;
        const double a = sign * amplitude;
        d.force = [a](const Vec2& x) { return Vec2(a * (1.0 + 0.5 * std::sin(2.0 * x[0] + x[1])), 0.5 * a * std::cos(x[0] - x[1])); };
        runs.push_back(d);
    }
    for (double scale : {1.0, 0.01}) {
        ProblemData d;
        d.eta = eta;
        const PoiseuilleFlow p = inlet_poiseuille(spec, scale * amplitude, eta);
        d.inflow = [p](const Vec2& x) { return p.velocity(x); };
        runs.push_back(d);
    }
    for (double sign : {1.0, -1.0}) {
        ProblemData d;
        d.eta = eta;
        const double a = sign * amplitude;
        d.traction = [a](const Vec2& x) { return a * (1.0 + 0.3 * x[1]); };
        runs.push_back(d);
    }
    return runs;
}

double calibrate_apriori(const FESpace& space, const DomainSpec& spec, const std::vector<ProblemData>& runs,
                         const SolverConfig& config)
{
    double c = 0.0;
    for (const ProblemData& d : runs) {
        const double term = apriori_data_term(space, d);
        if (!(term > 0.0)) continue;
        const SolveResult r = solve(space, spec, d, config);
        c = std::max(c, h1_seminorm_velocity(space, r.fields.shifted) / term);
    }
    return c;
}

IdentityReport identity_tests(const FESpace& space, std::uint64_t seed, int samples)
{
    IdentityReport rep;
    rep.samples = samples;
    const DivergenceFreeProjector project(space);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int s = 0; s < samples; ++s) {
        VectorX r(space.velocity_size());
        for (Index i = 0; i < r.size(); ++i) r[i] = normal(rng);
        VectorX v = project(r);
        const double g = std::sqrt(v.dot(project.stiffness() * v));
        if (!(g > 0.0)) continue;
        v /= g;
        const double boundary = outlet_cubic_flux(space, v);
        rep.skew_max = std::max(rep.skew_max, std::abs(convection_form(space, v, v, v, ConvectionForm::Skew) - boundary));
        rep.convective_max =
            std::max(rep.convective_max, std::abs(convection_form(space, v, v, v, ConvectionForm::Convective) - boundary));
    }
    rep.pass = rep.skew_max <= 1e-12;
    return rep;
}

GapStudy convective_gap_study(int levels, double target_h)
{
    // Stream function x^2 (y^2 - 1/4)^2 (1 + x): vanishes with its gradient
    // on the inlet and the walls.
    const VectorField field = [](const Vec2& p) {
        const double x = p[0], y = p[1], w = y * y - 0.25;
        return Vec2(4.0 * x * x * (1.0 + x) * y * w, -(2.0 * x + 3.0 * x * x) * w * w);
    };
    GapStudy study;
    const DomainSpec spec = straight_channel(1.0, 0.5);
    for (int level = 0; level < levels; ++level) {
        MeshOptions opt;
        opt.target_h = target_h;
        opt.refinement = level;
        const FESpace space(generate_mesh(spec, opt));
        const DivergenceFreeProjector project(space);
        const VectorX w = project(project.stiffness() * interpolate_velocity(space, field));
        study.h.push_back(space.mesh().max_edge_length());
        study.gaps.push_back(
            std::abs(convection_form(space, w, w, w, ConvectionForm::Convective) - outlet_cubic_flux(space, w)));
        if (level > 0) study.ratios.push_back(study.gaps[level - 1] / study.gaps[level]);
    }
    return study;
}

}  // namespace pipeflow
