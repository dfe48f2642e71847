#pragma once

#include "eds/elliptic.hpp"

namespace eds {

// Coframe (θ, η, σ, conj η, conj σ) based at a point. π = (η, σ).
struct CoframeSet {
    ChartPtr chart;
    std::map<std::string, Expr> base;  // exact coordinate values at m
    std::vector<Form> theta, eta, sigma;

    std::size_t n() const { return theta.size(); }
    std::size_t p() const { return eta.size() + sigma.size(); }
    std::vector<Form> pi() const;
    std::vector<Form> all() const;  // θ, π, conj π
    std::string label(std::size_t k) const;
    PointAssignment base_point() const;
};

// Parse "z=0, xi=0, W=i".
std::map<std::string, Expr> parse_basepoint(const ChartPtr& c, const std::string& text);

// Vector fields dual to a coframe, in the coframe's order.
std::vector<VectorField> dual_frame(const ChartPtr& c, const std::vector<Form>& coframe, const Settings& s);

struct StructureConstants {
    int n = 0;
    std::vector<Rational> c;  // C^i_jk at (i * n + j) * n + k

    StructureConstants() = default;
    explicit StructureConstants(int dim) : n(dim), c(static_cast<std::size_t>(dim * dim * dim)) {}
    Rational& operator()(int i, int j, int k) { return c[static_cast<std::size_t>((i * n + j) * n + k)]; }
    const Rational& operator()(int i, int j, int k) const { return c[static_cast<std::size_t>((i * n + j) * n + k)]; }
    // Sets C^i_jk = v and C^i_kj = -v.
    void set(int i, int j, int k, const Rational& v);

    bool antisymmetric() const;
    bool jacobi() const;
    bool zero() const;
    // "C^2_12 = -1" lines, 1-based, j < k, non-zero entries only.
    std::vector<std::string> table() const;
};

struct AlgebraInvariants {
    int positive = 0, negative = 0, null = 0;  // Killing form signature
    std::vector<int> derived;                  // dims of g, [g,g], ...
    int center = 0;
    bool abelian = false, solvable = false, semisimple = false;
    bool nilpotent_derived = false;  // [g,g] inside the center
};

AlgebraInvariants algebra_invariants(const StructureConstants& c);
enum class Verdict { Yes, No, Undecided };
std::string to_string(Verdict v);
Verdict algebras_isomorphic_lowdim(const StructureConstants& a, const StructureConstants& b);

// Coefficient tables; pairs (a, b) are stored with a < b, the rest stay zero.
using Table3 = std::vector<ExprMatrix>;

struct AdaptedReport {
    bool pass = true;
    std::vector<std::string> failures;
    ExprMatrix p;  // θ ≡ P conj θ mod η, conj η
    Table3 a;      // a[i][a][b]: coefficient of π^a ∧ π^b in dθ^i
    Table3 e, f;   // dη^r: e[r][u][v] on σ^u ∧ σ^v, f[r][u][s] on σ^u ∧ η^s
    Table3 c;      // c[i][j][k]: coefficient of θ^j ∧ θ^k
    Table3 m;      // m[i][a][j]: coefficient of π^a ∧ θ^j
    std::vector<VectorField> dual;
};

// Structure equations of a 1-adapted coframe. With es given, also checks
// span{η, σ} = V^(inf) and span{θ, η, conj η} = I.
AdaptedReport verify_one_adapted(const CoframeSet& cf, const Settings& s, const EllipticStructure* es = nullptr);

struct VessiotReport : AdaptedReport {
    StructureConstants constants;
};

// The full Vessiot conditions: θ∧conj π terms absent, C real and constant,
// θ imaginary at m, P(m) = -1, and the C-P identity.
VessiotReport verify_vessiot(const CoframeSet& cf, const Settings& s, const EllipticStructure* es = nullptr);

struct Adjusted {
    CoframeSet coframe;
    ExprMatrix k;      // θ_new = k θ
    ExprMatrix k_inv;  // θ = k_inv θ_new
};

// Constant K with K θ imaginary on real vectors at m.
Adjusted adapt_imaginary_at_point(const CoframeSet& cf, const Settings& s);

// K = -P with every symbol frozen at m except the holomorphic leaves of the
// listed invariant coordinates; returns K^-1 θ.
Adjusted polarize_normalize(const CoframeSet& cf, const std::vector<std::string>& invariants, const Settings& s);

struct OmegaReport {
    bool pass = true;
    std::vector<std::string> failures;
    std::vector<Form> omega;
};

OmegaReport build_omega(const CoframeSet& cf, const StructureConstants& c, const ExprMatrix& p, const ExprMatrix& r,
                        const ExprMatrix& s_mat, const Settings& s);

// Solves M^i_aj = S^l_a C^i_lj for S (n x p); needs a nondegenerate Killing form.
ExprMatrix solve_s_semisimple(const VessiotReport& v, const ChartPtr& c, const Settings& s);

// Exact row echelon (reduced, in place); returns the pivot columns.
std::vector<int> rational_echelon(std::vector<std::vector<Rational>>& a);

ExprMatrix identity_matrix(std::size_t n);
ExprMatrix multiply(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix conj(const ExprMatrix& a);
std::vector<Form> apply(const ExprMatrix& a, const std::vector<Form>& forms);
// Entrywise difference is zero.
bool same_matrix(const ChartPtr& c, const ExprMatrix& a, const ExprMatrix& b, const Settings& s);
bool same_forms(const std::vector<Form>& a, const std::vector<Form>& b, const Settings& s);

}  // namespace eds
