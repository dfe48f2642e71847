#include "eds/elliptic.hpp"

#include <Eigen/Eigenvalues>

namespace eds {

namespace {

constexpr std::uint64_t kEllipticStream = 0x311;

std::vector<VectorField> joined(const SubBundle& a, const SubBundle& b) {
    std::vector<VectorField> out = a.fields;
    out.insert(out.end(), b.fields.begin(), b.fields.end());
    return out;
}

// Ω(x_a, x_b), a < b, one column per pair.
std::vector<Expr> pair_values(const Form& omega, const std::vector<VectorField>& frame) {
    std::vector<Expr> out;
    for (std::size_t a = 0; a < frame.size(); ++a)
        for (std::size_t b = a + 1; b < frame.size(); ++b) out.push_back(evaluate_on(omega, {frame[a], frame[b]}));
    return out;
}

std::vector<Form> exterior_derivatives(const SubBundle& forms) {
    std::vector<Form> out;
    for (const Form& f : forms.forms) out.push_back(d(f));
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
    return s;
}

}  // namespace

bool EllipticStructure::elliptic() const {
    for (const Clause& c : clauses)
        if (!c.pass) return false;
    return !clauses.empty();
}

EllipticStructure check_elliptic(const SubBundle& dplus, const Settings& s, const SubBundle* forms) {
    EllipticStructure es;
    es.chart = dplus.chart;
    es.dplus = dplus;
    es.dminus = conj(dplus);
    const int m = static_cast<int>(es.chart->dim());
    const int dp = static_cast<int>(dplus.rank());
    if (forms) {
        es.forms = *forms;
        es.dist = annihilator(*forms, s);
    } else {
        es.dist = make_bundle(es.chart, joined(es.dplus, es.dminus), s);
        es.forms = annihilator(es.dist, s);
    }

    Clause c1{"complementary", false, ""};
    int meet = intersection_rank(es.dplus, es.dminus, s);
    c1.pass = meet == 0;
    if (!c1.pass) c1.witness = "D+ meets its conjugate in rank " + std::to_string(meet);
    es.clauses.push_back(c1);

    Clause c2{"bracket generating", false, ""};
    es.dist_flag = bracket_flag(es.dist, s);
    c2.pass = es.dist_flag.terminal().rank() == static_cast<std::size_t>(m);
    if (!c2.pass) c2.witness = "bracket flag of D stops at ranks " + join_ints(es.dist_flag.ranks);
    es.clauses.push_back(c2);

    Clause c3{"spans D", false, ""};
    int sum = sum_rank(es.dplus, es.dminus, s);
    bool inside = contains(es.dist, es.dplus, s);
    c3.pass = inside && sum == static_cast<int>(es.dist.rank()) && 2 * dp == sum;
    if (!inside)
        c3.witness = "D+ is not contained in ann(I)";
    else if (!c3.pass)
        c3.witness = "D+ + D- has rank " + std::to_string(sum) + ", D has rank " + std::to_string(es.dist.rank());
    es.clauses.push_back(c3);

    Clause c4{"mixed brackets in D", false, ""};
    c4.pass = true;
    for (std::size_t a = 0; a < es.dplus.rank() && c4.pass; ++a)
        for (std::size_t b = 0; b < es.dminus.rank() && c4.pass; ++b)
            if (!contains_field(es.dist, bracket(es.dplus.fields[a], es.dminus.fields[b]), s)) {
                c4.pass = false;
                c4.witness = "[X+" + std::to_string(a) + ", X-" + std::to_string(b) + "] leaves D";
            }
    es.clauses.push_back(c4);

    es.v = annihilator(es.dminus, s);
    return es;
}

bool check_decomposable(const EllipticStructure& es, const std::vector<Form>& two_forms, const Settings& s) {
    std::vector<VectorField> frame = joined(es.dplus, es.dminus);
    const std::size_t dp = es.dplus.rank();
    ExprMatrix rows, all;
    std::vector<int> kind;  // 0 both in D+, 1 mixed, 2 both in D-
    for (std::size_t a = 0; a < frame.size(); ++a)
        for (std::size_t b = a + 1; b < frame.size(); ++b) kind.push_back(b < dp ? 0 : a >= dp ? 2 : 1);
    for (const Form& f : two_forms) {
        for (const Form& g : {f, conj(f)}) {
            std::vector<Expr> r = pair_values(g, frame);
            bool nonzero = false;
            for (const Expr& e : r) nonzero = nonzero || !e.is_zero();
            if (!nonzero) continue;
            rows.push_back(r);
            all.push_back(r);
            for (int part : {0, 2}) {
                std::vector<Expr> p = r;
                for (std::size_t k = 0; k < p.size(); ++k)
                    if (kind[k] != part) p[k] = Expr(0);
                all.push_back(p);
            }
        }
    }
    if (rows.empty()) return true;
    return certified_rank(es.chart, rows, s, kEllipticStream).rank ==
           certified_rank(es.chart, all, s, kEllipticStream + 1).rank;
}

bool check_decomposable(const EllipticStructure& es, const Settings& s) {
    return check_decomposable(es, exterior_derivatives(es.forms), s);
}

std::string to_string(DIClass c) {
    switch (c) {
        case DIClass::None: return "none";
        case DIClass::Minimal: return "minimal";
        case DIClass::Maximal: return "maximal";
        case DIClass::Neither: return "neither";
    }
    return "?";
}

DIReport check_darboux(const EllipticStructure& es, const Settings& s) {
    DIReport r;
    r.m = static_cast<int>(es.chart->dim());
    r.d = static_cast<int>(es.dplus.rank());
    r.v_flag = terminal_derived(es.v, s, &es.dminus);
    const SubBundle& vinf = r.v_flag.terminal();
    r.q = static_cast<int>(vinf.rank());
    r.n = r.m - 2 * r.q;
    SubBundle vbar = conj(es.v);
    int span = span_rank({&vinf, &vbar}, s);
    r.form_test = span == r.m;
    r.dplus_flag = bracket_flag(es.dplus, s);
    r.field_test = intersection_rank(r.dplus_flag.terminal(), es.dminus, s) == 0;
    if (r.form_test != r.field_test) throw Error("form and field Darboux tests disagree");
    r.integrable = r.form_test;
    r.numeta = r.q + static_cast<int>(vbar.rank()) - span;
    if (!r.integrable) return r;
    if (r.q == r.d)
        r.classification = DIClass::Minimal;
    else if (r.m % 2 == 0 && 2 * r.q == r.m)
        r.classification = DIClass::Maximal;
    else
        r.classification = DIClass::Neither;
    return r;
}

bool verify_darboux_invariant(const Expr& f, const EllipticStructure& es, const Settings& s) {
    std::vector<Expr> vals;
    for (const VectorField& x : es.dminus.fields) vals.push_back(x.apply(f));
    return is_zero(vals, es.chart->domain(), s).zero;
}

std::string to_string(SymbolType t) {
    switch (t) {
        case SymbolType::Elliptic: return "elliptic";
        case SymbolType::Hyperbolic: return "hyperbolic";
        case SymbolType::Degenerate: return "degenerate";
    }
    return "?";
}

SymbolReport conformal_symbol(const SubBundle& forms, const Settings& s) {
    const ChartPtr& c = forms.chart;
    const Expr half(Coef(Rational(1, 2)));
    const Expr mhalf_i(Coef(Rational(0), Rational(-1, 2)));
    std::vector<Form> real_parts;
    for (const Form& f : forms.forms) {
        real_parts.push_back(half * (f + conj(f)));
        real_parts.push_back(mhalf_i * (f - conj(f)));
    }
    std::vector<Form> nonzero;
    for (const Form& f : real_parts)
        if (!is_zero(coefficients(f), c->domain(), s).zero) nonzero.push_back(f);
    SubBundle basis = make_bundle(c, nonzero, s);
    const std::size_t r = basis.rank();
    if (r != forms.rank()) throw Error("system is not closed under conjugation");
    if (c->dim() != r + 4) throw Error("conformal symbol needs dim M = rank I + 4");

    Form top = basis.forms[0];
    for (std::size_t k = 1; k < r; ++k) top = wedge(top, basis.forms[k]);
    // dz ∧ dz~ = -2i dx ∧ dy for every complex pair
    int pairs = 0;
    for (const Coordinate& x : c->coordinates()) pairs += x.real ? 0 : 1;
    Expr phase(1);
    for (int k = 0; k < pairs; ++k) phase = phase * Expr(Coef(Rational(0), Rational(-2)));
    Form::Index all(c->dim());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);

    std::vector<Form> dth;
    for (const Form& f : basis.forms) dth.push_back(d(f));
    ExprMatrix g(r, std::vector<Expr>(r, Expr(0)));
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = j; k < r; ++k) {
            Form w = wedge(wedge(dth[j], dth[k]), top);
            g[j][k] = g[k][j] = phase * w.coef(all);
        }

    SymbolReport rep;
    MatrixFn fn(c, g);
    bool first = true;
    for (const Point& p : certificate_points(c, g, s, kEllipticStream + 2)) {
        Matrix v;
        fn(p, v);
        double big = std::max(1e-300, v.cwiseAbs().maxCoeff());
        if (v.imag().cwiseAbs().maxCoeff() > 1e-8 * big) throw NonGeneric("symbol matrix is not real");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v.real());
        std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + r);
        int pos = 0, neg = 0;
        for (double x : ev) {
            if (x > 1e-8 * big) ++pos;
            if (x < -1e-8 * big) ++neg;
        }
        SymbolType t = pos + neg != 2 ? SymbolType::Degenerate : pos == neg ? SymbolType::Hyperbolic : SymbolType::Elliptic;
        if (!first && t != rep.type) throw NonGeneric("symbol type differs between sample points");
        rep.type = t;
        first = false;
        rep.eigenvalues.push_back(ev);
    }
    return rep;
}

SingularSystem singular_system(const EllipticStructure& es, const std::vector<Form>& two_forms) {
    return {es.v, two_forms};
}

bool is_normal(const EllipticStructure& es, const std::vector<Form>& two_forms, const Settings& s) {
    if (es.dminus.rank() < 2) return true;
    ExprMatrix base, all;
    for (const Form& a : es.v.forms) {
        std::vector<Expr> r = pair_values(d(a), es.dminus.fields);
        base.push_back(r);
        all.push_back(r);
    }
    for (const Form& f : two_forms)
        for (const Form& g : {f, conj(f)}) all.push_back(pair_values(g, es.dminus.fields));
    return certified_rank(es.chart, base, s, kEllipticStream + 3).rank ==
           certified_rank(es.chart, all, s, kEllipticStream + 4).rank;
}

bool is_normal(const EllipticStructure& es, const Settings& s) {
    return is_normal(es, exterior_derivatives(es.forms), s);
}

}  // namespace eds
