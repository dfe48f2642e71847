#pragma once

#include "eds/vessiot.hpp"

namespace eds {

// Named pass/fail line with a witness on failure.
struct Certificate {
    std::string name;
    bool pass = true;
    std::string witness;
};

bool all_pass(const std::vector<Certificate>& cs);

// Complex Lie group in holomorphic coordinates. Forms and matrices live on
// `chart`, which may be a product with other coordinates.
struct LieGroupModel {
    ChartPtr chart;
    std::vector<std::string> coords;  // group coordinates
    StructureConstants c;
    std::vector<Form> mu_l, mu_r;  // g^-1 dg, dg g^-1 in the basis
    ExprMatrix lambda, omega;      // mu_l = lambda mu_r, omega = lambda^-1
    // Matrix realisation, used for the cocycle check; empty when not a matrix group.
    ExprMatrix matrix;
    std::vector<ExprMatrix> basis;
};

// Builds the model of a matrix group g(c) with Lie algebra basis X_i
// ([X_j, X_k] = C^i_jk X_i). Basis matrices are rational.
LieGroupModel matrix_group(const ChartPtr& chart, const std::vector<std::string>& coords, const ExprMatrix& g,
                           const std::vector<ExprMatrix>& basis, const Settings& s);

// Maurer-Cartan, mu_l = lambda mu_r, omega lambda = 1, dOmega = Omega C mu_l,
// and lambda(ab) = lambda(b) lambda(a) at sample pairs for matrix groups.
std::vector<Certificate> verify_group_model(const LieGroupModel& g, const Settings& s);

// Left-invariant holomorphic fields dual to mu_l; they generate right
// multiplication.
std::vector<VectorField> left_invariant_fields(const LieGroupModel& g, const Settings& s);

// [Z_i, Z_j] = C^k_ij Z_k and [Z_i, conj Z_j] = 0.
std::vector<Certificate> verify_action(const std::vector<VectorField>& gens, const StructureConstants& c,
                                       const Settings& s);

// C^k_ij from [Z_i, Z_j] at one sample point, rationalized; NonGeneric when
// the fit is not a real rational table. Certify with verify_action.
StructureConstants extract_constants(const std::vector<VectorField>& gens, const Settings& s);

// L_Z of every generator of h lies in h.
Certificate verify_symmetry(const std::vector<VectorField>& gens, const SubBundle& h, const Settings& s);
// theta_a(Z_i) has rank #gens.
Certificate check_transversality(const std::vector<VectorField>& gens, const SubBundle& h, const Settings& s);

enum class InvarianceMode { Real, Holomorphic };
// Real: (Z_i + conj Z_i) f = 0; Holomorphic: Z_i f = 0.
bool verify_invariant(const Expr& f, const std::vector<VectorField>& gens, InvarianceMode mode, const Settings& s);

// Jet coordinates along one independent variable: chains w0 -> w1 -> ...
// and the total derivative D on the chart.
struct JetSpec {
    std::string independent;
    std::vector<std::vector<std::string>> chains;
    VectorField total;
};

// Recomputes the components along each chain from its first entry:
// phi_(k+1) = D phi_k - w_(k+1) D xi, xi the independent component.
VectorField prolong_contact_vf(const VectorField& z, const JetSpec& jet);

struct ExtensionReport {
    SubBundle h;
    std::vector<Certificate> checks;
    bool pass() const { return all_pass(checks); }
};

// H = span{mu_r^j - psi^j, eta^r} on the product chart, certified holomorphic,
// invariant under right multiplication, transverse to it, with H^(inf) = 0.
ExtensionReport build_extension(const LieGroupModel& g, const std::vector<Form>& psi, const std::vector<Form>& eta,
                                const Settings& s);

// Phi_inv o pi_g = q_g o psi as coordinate maps, psi^* H = source system,
// pi_g^* quotient system inside the real system e.
struct QuotientDiagram {
    CoordinateMap pi_g, psi, phi_inv, q_g;
    std::vector<Form> extension;  // on psi's target
    std::vector<Form> source;     // on psi's source
    std::vector<Form> quotient;   // on pi_g's target
    SubBundle real_system;        // E (x) C on pi_g's source
};
std::vector<Certificate> verify_quotient_diagram(const QuotientDiagram& q, const Settings& s);

// A closed-form solution: fields in z, conj z and holomorphic data symbols
// (f, f1, f2, ... for f and its z-derivatives; conj leaves allowed).
struct SolutionFormula {
    std::vector<std::string> data;             // "f", "g", ...
    std::map<std::string, Expr> fields;        // "u" -> expression
    std::vector<Expr> guards;                  // must be non-zero, in the same symbols
    std::vector<Expr> residuals;               // jet symbols u, u_z, u_b, u_zb, ...
};

// Binds the data to concrete holomorphic functions of z.
using DataSample = std::map<std::string, Expr>;

struct ResidualReport {
    bool pass = true;
    int points = 0;
    int skipped_samples = 0;
    double max_residual = 0;
    std::vector<std::string> notes;
};

// Substitutes each sample, differentiates, evaluates the residuals at
// `points` admissible points of the z-plane.
ResidualReport verify_solution_formula(const SolutionFormula& f, const std::vector<DataSample>& samples, double tol,
                                       const Settings& s, int points = 20);

// Composition of a jet expression with the formula for one sample; complex z.
Expr compose_solution(const Expr& jet_expr, const SolutionFormula& f, const DataSample& sample);

// d/d conj z of xi along every sampled solution is zero.
bool verify_restricted_holomorphy(const Expr& xi, const SolutionFormula& f, const std::vector<DataSample>& samples,
                                  const Settings& s);

// u_zz - u_z^2/2 on the u- formula equals the Schwarzian of f.
bool verify_schwarzian(const std::vector<DataSample>& samples, const Settings& s);
// f''' / f' - 3/2 (f''/f')^2 with f given in z.
Expr schwarzian(const Expr& f);

// Chart with a single complex coordinate z and the given guards.
ChartPtr plane_chart(const std::vector<Expr>& guards = {});

}  // namespace eds
