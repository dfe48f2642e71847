#pragma once

#include "eds/flags.hpp"

namespace eds {

struct Clause {
    std::string name;
    bool pass = false;
    std::string witness;  // empty on pass
};

// A candidate elliptic decomposition of D = ann(I): D⊗C = D+ ⊕ D-, D- = conj(D+).
struct EllipticStructure {
    ChartPtr chart;
    SubBundle forms;   // I
    SubBundle dist;    // D = ann(I)
    SubBundle dplus, dminus;
    SubBundle v;       // ann(D-)
    FlagReport dist_flag;
    std::vector<Clause> clauses;

    bool elliptic() const;
};

// With forms == nullptr, I is taken as ann(D+ + D-).
EllipticStructure check_elliptic(const SubBundle& dplus, const Settings& s, const SubBundle* forms = nullptr);

// The ideal generated by I and two_forms is spanned mod I by sections of
// Λ²V and Λ²conj(V). Two-forms default to dθ, θ in I.
bool check_decomposable(const EllipticStructure& es, const std::vector<Form>& two_forms, const Settings& s);
bool check_decomposable(const EllipticStructure& es, const Settings& s);

enum class DIClass { None, Minimal, Maximal, Neither };
std::string to_string(DIClass c);

struct DIReport {
    bool integrable = false;
    int m = 0;     // dim M
    int d = 0;     // rank D+
    int q = 0;     // rank V^(inf)
    int n = 0;     // m - 2q
    int numeta = 0;
    DIClass classification = DIClass::None;
    bool form_test = false, field_test = false;
    FlagReport v_flag;      // V, V', ...
    FlagReport dplus_flag;  // D+ bracket flag
};

// Both the form test (V^(inf) + conj V = T*M⊗C) and the field test
// (terminal bracket flag of D+ meets D- trivially) are run; they must agree.
DIReport check_darboux(const EllipticStructure& es, const Settings& s);

// X f = 0 for every X in D-.
bool verify_darboux_invariant(const Expr& f, const EllipticStructure& es, const Settings& s);

enum class SymbolType { Elliptic, Hyperbolic, Degenerate };
std::string to_string(SymbolType t);

struct SymbolReport {
    SymbolType type = SymbolType::Degenerate;
    std::vector<std::vector<double>> eigenvalues;  // per certificate point
};

// Quadratic form on a rank-3 Pfaffian system over a 7-manifold with a rank-2
// derived system: G_jk = dθ_j ∧ dθ_k ∧ θ_0 ∧ θ_1 ∧ θ_2 / vol over a real basis
// θ of I.
SymbolReport conformal_symbol(const SubBundle& forms, const Settings& s);

struct SingularSystem {
    SubBundle one_forms;  // V
    std::vector<Form> two_forms;
};

SingularSystem singular_system(const EllipticStructure& es, const std::vector<Form>& two_forms);
// The two-forms of I restricted to D- lie in span{dα|D- : α in V}.
bool is_normal(const EllipticStructure& es, const std::vector<Form>& two_forms, const Settings& s);
bool is_normal(const EllipticStructure& es, const Settings& s);

}  // namespace eds
