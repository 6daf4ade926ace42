#pragma once

#include "pipeflow/nse_solver.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace pipeflow {

/// Terms of the energy identity obtained by testing the momentum equation
/// with v = u - W*:
///   eta |grad v|^2 = force_work + traction_work + viscous_coupling
///                    + reference_convection + perturbation_convection
///                    - ddn_dissipation + pressure_work,
/// where pressure_work = (q, div v) vanishes for discretely divergence-free v
/// and is kept so the identity closes at roundoff.
struct EnergyReport {
    double lhs = 0.0;                      // eta |grad v|^2
    double force_work = 0.0;               // (f, v)
    double traction_work = 0.0;            // int_O sigma* (v . nu)
    double viscous_coupling = 0.0;         // -eta (grad W*, grad v)
    double reference_convection = 0.0;     // -c(W*, W*, v)
    double perturbation_convection = 0.0;  // -c(v, W*, v)
    // (1/2) int_O (z + [z]^-) |v|^2 with z = u . nu for DDN; (1/2) int_O z |v|^2
    // for DO_NOTHING, where it has no sign.
    double ddn_dissipation = 0.0;
    double pressure_work = 0.0;      // (q, div v)
    double retained = 0.0;           // sum of the terms kept by the inequality
    double identity_residual = 0.0;  // relative to the largest term or coupling size
    bool inequality_holds = true;    // lhs <= retained (up to roundoff)
    double backflow_energy = 0.0;    // int_O [u . nu]^- |u|^2
    double min_outlet_normal_velocity = 0.0;
};

EnergyReport energy_report(const FESpace& space, const ProblemData& data, const ReferenceFlow& ref,
                           const SolutionFields& fields, const SolverConfig& config);

/// min over random z of z + [z]^- and of 2 z^2 + [z]^- z.
struct KernelCheck {
    double min_shifted = 0.0;
    double min_quadratic = 0.0;
    int samples = 0;
};
KernelCheck kernel_properties(int samples, std::uint64_t seed);

struct ConstantsOptions {
    int inflow_samples = 6;
    std::uint64_t seed = 1;
    int restarts = 20;
    int iterations = 200;
    double eigen_tolerance = 1e-12;
};

struct ConstantsEstimate {
    double eta = 1.0;
    double s_star = 0.0;            // 1 / max |v|_L4^2 / |grad v|^2 over discrete V*
    double trace_eigenvalue = 0.0;  // max |v|^2_L2(outlet) / |grad v|^2, scalar P2
    double trace_constant = 0.0;    // sqrt(trace_eigenvalue)
    double infsup_constant = 0.0;   // sqrt of the smallest eigenvalue of B K^-1 B^T vs M_p
    double m_star = 0.0;            // max |W*|_H1 / |lift g*|_H1 over sampled inflows
    double omega_star = 0.0;        // eta s_star / (2 m_star)
    int s_star_restart = 0;
    std::vector<double> s_star_history;
    std::vector<double> m_samples;
    double c_star = std::numeric_limits<double>::quiet_NaN();  // a-priori constant, set by calibration

    double omega() const { return eta * s_star / (2.0 * m_star); }
};

/// Divergence-free projector on velocities vanishing on inlet and walls:
/// maps a dual vector r to the K-Riesz representative of r restricted to
/// {B w = 0}. Factorizes once.
class DivergenceFreeProjector {
public:
    explicit DivergenceFreeProjector(const FESpace& space);
    VectorX operator()(const VectorX& r) const;
    const SparseMatrix& stiffness() const { return k_; }

private:
    const FESpace& space_;
    SparseMatrix k_;
    DofPartition partition_;
    Factorization lu_;
};

double sobolev_constant(const FESpace& space, const RayleighOptions& options, RayleighResult* detail = nullptr);
double trace_eigenvalue(const FESpace& space, double tol = 1e-12);
double infsup_constant(const FESpace& space, double tol = 1e-12);

/// Smooth random inflow on the inlet: a seeded sine series across the inlet
/// section along its axis, with non-negative flux.
VectorField random_inflow(const DomainSpec& spec, std::uint64_t seed, int modes = 4);

ConstantsEstimate estimate_constants(const FESpace& space, const DomainSpec& spec, double eta,
                                     const ConstantsOptions& options = {});

/// Data term |f| + |sigma*| surrogate + G + G^2, G the inflow surrogate.
double apriori_data_term(const FESpace& space, const ProblemData& data);

struct AprioriMargin {
    double lhs = 0.0;  // |grad(u - W*)|
    double rhs = 0.0;  // c_star * data term
    double margin = 0.0;
    double data_term = 0.0;
};
/// Throws ConstantsMissing when c_star has not been calibrated.
AprioriMargin apriori_bound_check(const FESpace& space, const ProblemData& data, const SolutionFields& fields,
                                  const ConstantsEstimate& constants);

/// Calibration problems: one component at a time (force, inflow, traction)
/// at the given amplitudes.
std::vector<ProblemData> apriori_calibration_set(const DomainSpec& spec, double eta, double amplitude);
/// Largest lhs / data term over the calibration set; stored as c_star.
double calibrate_apriori(const FESpace& space, const DomainSpec& spec, const std::vector<ProblemData>& runs,
                         const SolverConfig& config);

struct IdentityReport {
    int samples = 0;
    double skew_max = 0.0;        // max |c(v,v,v) - (1/2) int_O |v|^2 v.nu| for |grad v| = 1
    double convective_max = 0.0;  // same with the convective form
    bool pass = false;            // skew_max <= 1e-12
};
IdentityReport identity_tests(const FESpace& space, std::uint64_t seed, int samples = 100);

/// Convective-form consistency gap for the discrete Stokes projection of a
/// fixed smooth field on the unit straight channel at successive refinements.
struct GapStudy {
    std::vector<double> h;
    std::vector<double> gaps;
    std::vector<double> ratios;  // gaps[i-1] / gaps[i]
};
GapStudy convective_gap_study(int levels, double target_h = 0.25);

/// (1/2) int_O |v|^2 (v . nu) by Gauss quadrature.
double outlet_cubic_flux(const FESpace& space, const VectorX& v);

}  // namespace pipeflow
