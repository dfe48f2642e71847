#include "eds/vessiot.hpp"

#include <sstream>

namespace eds {

namespace {

constexpr std::uint64_t kVessiotStream = 0x7e5;

using RMat = std::vector<std::vector<Rational>>;

std::vector<int> echelon(RMat& a) { return rational_echelon(a); }

}  // namespace

std::vector<int> rational_echelon(std::vector<std::vector<Rational>>& a) {
    std::vector<int> piv;
    std::size_t row = 0;
    const std::size_t cols = a.empty() ? 0 : a[0].size();
    for (std::size_t col = 0; col < cols && row < a.size(); ++col) {
        std::size_t r = row;
        while (r < a.size() && a[r][col] == 0) ++r;
        if (r == a.size()) continue;
        std::swap(a[r], a[row]);
        Rational inv = 1 / a[row][col];
        for (Rational& x : a[row]) x *= inv;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (k == row || a[k][col] == 0) continue;
            Rational f = a[k][col];
            for (std::size_t j = 0; j < cols; ++j) a[k][j] -= f * a[row][j];
        }
        piv.push_back(static_cast<int>(col));
        ++row;
    }
    return piv;
}

namespace {

int rank_of(RMat a) { return static_cast<int>(echelon(a).size()); }

std::vector<Rational> bracket_vec(const StructureConstants& c, const std::vector<Rational>& u, const std::vector<Rational>& v) {
    std::vector<Rational> w(c.n, 0);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j) {
            if (u[j] == 0) continue;
            for (int k = 0; k < c.n; ++k)
                if (v[k] != 0) w[i] += c(i, j, k) * u[j] * v[k];
        }
    return w;
}

// Signature of a symmetric rational matrix by congruence.
void signature(RMat a, int& pos, int& neg, int& zero) {
    pos = neg = zero = 0;
    std::size_t n = a.size();
    std::vector<bool> done(n, false);
    for (std::size_t step = 0; step < n; ++step) {
        int p = -1;
        for (std::size_t i = 0; i < n; ++i)
            if (!done[i] && a[i][i] != 0) {
                p = static_cast<int>(i);
                break;
            }
        if (p < 0) {
            // all remaining diagonal entries vanish: pair up an off-diagonal
            for (std::size_t i = 0; i < n && p < 0; ++i)
                for (std::size_t j = 0; j < n && p < 0; ++j)
                    if (!done[i] && !done[j] && i != j && a[i][j] != 0) {
                        for (std::size_t k = 0; k < n; ++k) a[i][k] += a[j][k];
                        for (std::size_t k = 0; k < n; ++k) a[k][i] += a[k][j];
                        p = static_cast<int>(i);
                    }
            if (p < 0) break;
        }
        Rational piv = a[p][p];
        (piv > 0 ? pos : neg)++;
        done[p] = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i] || a[i][p] == 0) continue;
            Rational f = a[i][p] / piv;
            for (std::size_t k = 0; k < n; ++k) a[i][k] -= f * a[p][k];
            for (std::size_t k = 0; k < n; ++k) a[k][i] -= f * a[k][p];
        }
    }
    zero = static_cast<int>(n) - pos - neg;
}

Expr rational_expr(const Rational& re, const Rational& im = 0) { return Expr(Coef(re, im)); }

bool rationalize_value(cd v, Coef& out) {
    Rational re, im;
    if (!rationalize(v.real(), 64, 1e-6, re) || !rationalize(v.imag(), 64, 1e-6, im)) return false;
    out = Coef(re, im);
    return true;
}

Expr coefficient(const Form& two, const std::vector<VectorField>& dual, std::size_t x, std::size_t y) {
    return evaluate_on(two, {dual[x], dual[y]});
}

Table3 table(std::size_t a, std::size_t b, std::size_t c) {
    return Table3(a, ExprMatrix(b, std::vector<Expr>(c, Expr(0))));
}

// Batch zero test; on failure lists the offending labels one by one.
bool check_zero(const ChartPtr& c, const std::vector<Expr>& exprs, const std::vector<std::string>& labels,
                const Settings& s, std::vector<std::string>& failures) {
    std::vector<Expr> live;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < exprs.size(); ++k)
        if (!exprs[k].is_zero()) {
            live.push_back(exprs[k]);
            names.push_back(labels[k]);
        }
    if (live.empty() || is_zero(live, c->domain(), s).zero) return true;
    for (std::size_t k = 0; k < live.size(); ++k) {
        ZeroCertificate z = is_zero(live[k], c->domain(), s);
        if (!z.zero) {
            std::ostringstream msg;
            double worst = 0;
            for (double r : z.residuals) worst = std::max(worst, r);
            msg << names[k] << " is not zero (max residual " << worst << ")";
            failures.push_back(msg.str());
        }
    }
    return false;
}

std::string idx(std::size_t a) { return std::to_string(a + 1); }

cd evaluate_at(const Expr& e, const PointAssignment& p) {
    cd v = evaluate(e, p);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw SingularPoint("expression is singular at the base point");
    return v;
}

// dω^i - ½ C^i_jk ω^j ∧ ω^k at sample points, with dω from Cauchy-integral
// derivatives of the compiled coefficients. Symbolic d swells badly on the
// long coefficients a dual frame produces.
bool maurer_cartan_numeric(const ChartPtr& c, const std::vector<Form>& omega, const StructureConstants& cc,
                           const Settings& s, std::vector<std::string>& failures) {
    const std::size_t n = omega.size(), m = c->dim();
    std::vector<Expr> flat;
    for (const Form& f : omega)
        for (const Expr& e : f.row()) flat.push_back(e);
    Tape tape = c->domain().compile(flat);
    auto fn = [&](std::span<const cd> slots, std::vector<cd>& out) {
        double scale;
        return tape.run(slots, out, scale);
    };
    Sampler smp(c->domain(), s.seed, kVessiotStream + 7);
    double worst = 0;
    for (int taken = 0; taken < std::min(s.samples, 4);) {
        Point pt = smp.next();
        std::vector<cd> slots = c->domain().slots(pt), w;
        std::vector<std::vector<cd>> grad(m);
        bool ok = fn(slots, w);
        for (std::size_t j = 0; j < m && ok; ++j) {
            std::vector<cd> dir(slots.size(), 0);
            const Direction& dr = c->directions()[j];
            dir[2 * dr.coord + (dr.bar ? 1 : 0)] = 1;
            ok = directional_derivative(fn, slots, dir, grad[j]);
        }
        if (!ok) {
            smp.reject();
            continue;
        }
        smp.accept();
        ++taken;
        double big = 1;
        for (const cd& v : w) big = std::max(big, std::norm(v));
        for (const auto& g : grad)
            for (const cd& v : g) big = std::max(big, std::abs(v));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = j + 1; k < m; ++k) {
                    cd r = grad[j][i * m + k] - grad[k][i * m + j];
                    for (std::size_t a = 0; a < n; ++a)
                        for (std::size_t b = a + 1; b < n; ++b) {
                            const Rational& v = cc(static_cast<int>(i), static_cast<int>(a), static_cast<int>(b));
                            if (v == 0) continue;
                            r -= static_cast<double>(v) * (w[a * m + j] * w[b * m + k] - w[a * m + k] * w[b * m + j]);
                        }
                    worst = std::max(worst, std::abs(r) / big);
                }
    }
    if (worst <= 1e-7) return true;
    std::ostringstream os;
    os << "d omega - C omega^omega is not zero (relative residual " << worst << ")";
    failures.push_back(os.str());
    return false;
}

}  // namespace

std::vector<Form> CoframeSet::pi() const {
    std::vector<Form> out = eta;
    out.insert(out.end(), sigma.begin(), sigma.end());
    return out;
}

std::vector<Form> CoframeSet::all() const {
    std::vector<Form> out = theta;
    for (const Form& f : pi()) out.push_back(f);
    for (const Form& f : pi()) out.push_back(conj(f));
    return out;
}

std::string CoframeSet::label(std::size_t k) const {
    if (k < n()) return "theta" + idx(k);
    k -= n();
    bool bar = k >= p();
    if (bar) k -= p();
    std::string s = k < eta.size() ? "eta" + idx(k) : "sigma" + idx(k - eta.size());
    return bar ? s + "~" : s;
}

PointAssignment CoframeSet::base_point() const {
    PointAssignment out;
    for (const auto& [name, e] : base) out[name] = evaluate(e, {});
    for (const Coordinate& x : chart->coordinates())
        if (!out.count(x.name)) throw Error("base point misses coordinate '" + x.name + "'");
    return out;
}

std::map<std::string, Expr> parse_basepoint(const ChartPtr& c, const std::string& text) {
    std::map<std::string, Expr> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw SyntaxError("expected name=value in base point", 0);
        std::string name = item.substr(0, eq), val = item.substr(eq + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
        };
        trim(name);
        trim(val);
        if (c->coordinate(name) < 0) throw UnknownSymbol("base point names unknown coordinate '" + name + "'");
        Expr v = parse(val);
        std::map<std::string, bool> syms;
        collect_symbols(v, syms);
        if (!syms.empty()) throw SyntaxError("base point value must be a constant: " + val, 0);
        out[name] = v;
    }
    return out;
}

std::vector<VectorField> dual_frame(const ChartPtr& c, const std::vector<Form>& coframe, const Settings& s) {
    ExprMatrix f;
    for (const Form& th : coframe) f.push_back(th.row());
    if (f.size() != c->dim()) throw Error("coframe size differs from the chart dimension");
    ExprMatrix inv = inverse(c, f, s, kVessiotStream);
    std::vector<VectorField> out;
    for (std::size_t k = 0; k < f.size(); ++k) {
        std::vector<Expr> col;
        for (std::size_t j = 0; j < f.size(); ++j) col.push_back(inv[j][k]);
        out.emplace_back(c, col);
    }
    return out;
}

void StructureConstants::set(int i, int j, int k, const Rational& v) {
    (*this)(i, j, k) = v;
    (*this)(i, k, j) = -v;
}

bool StructureConstants::antisymmetric() const {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if ((*this)(i, j, k) != -(*this)(i, k, j)) return false;
    return true;
}

bool StructureConstants::jacobi() const {
    const StructureConstants& c = *this;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int m = 0; m < n; ++m) {
                    Rational t = 0;
                    for (int l = 0; l < n; ++l)
                        t += c(i, j, l) * c(l, k, m) + c(i, k, l) * c(l, m, j) + c(i, m, l) * c(l, j, k);
                    if (t != 0) return false;
                }
    return true;
}

bool StructureConstants::zero() const {
    for (const Rational& r : c)
        if (r != 0) return false;
    return true;
}

std::vector<std::string> StructureConstants::table() const {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                if ((*this)(i, j, k) != 0)
                    out.push_back("C^" + idx(i) + "_" + idx(j) + idx(k) + " = " + rational_str((*this)(i, j, k)));
    return out;
}

AlgebraInvariants algebra_invariants(const StructureConstants& c) {
    AlgebraInvariants a;
    const int n = c.n;
    RMat kill(n, std::vector<Rational>(n, 0));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            for (int x = 0; x < n; ++x)
                for (int b = 0; b < n; ++b) kill[j][k] += c(x, j, b) * c(b, k, x);
    signature(kill, a.positive, a.negative, a.null);

    RMat basis(n, std::vector<Rational>(n, 0));
    for (int k = 0; k < n; ++k) basis[k][k] = 1;
    a.derived.push_back(n);
    while (!basis.empty()) {
        RMat next;
        for (std::size_t u = 0; u < basis.size(); ++u)
            for (std::size_t v = u + 1; v < basis.size(); ++v) next.push_back(bracket_vec(c, basis[u], basis[v]));
        std::vector<int> piv = echelon(next);
        next.resize(piv.size());
        if (next.size() == basis.size()) break;
        basis = next;
        a.derived.push_back(static_cast<int>(basis.size()));
    }

    RMat ad;  // rows (i, k), columns j: x with C^i_jk x^j = 0
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            std::vector<Rational> row(n);
            for (int j = 0; j < n; ++j) row[j] = c(i, j, k);
            ad.push_back(row);
        }
    a.center = n - (n ? rank_of(ad) : 0);
    a.abelian = c.zero();
    a.solvable = a.derived.back() == 0;
    a.semisimple = n > 0 && a.null == 0;

    // [g,g] inside the center
    a.nilpotent_derived = true;
    RMat der;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            std::vector<Rational> e1(n, 0), e2(n, 0);
            e1[j] = 1;
            e2[k] = 1;
            der.push_back(bracket_vec(c, e1, e2));
        }
    for (const auto& w : der)
        for (int k = 0; k < n; ++k) {
            std::vector<Rational> e(n, 0);
            e[k] = 1;
            for (const Rational& x : bracket_vec(c, w, e))
                if (x != 0) a.nilpotent_derived = false;
        }
    return a;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Yes: return "yes";
        case Verdict::No: return "no";
        case Verdict::Undecided: return "undecided";
    }
    return "?";
}

Verdict algebras_isomorphic_lowdim(const StructureConstants& a, const StructureConstants& b) {
    if (a.n != b.n) return Verdict::No;
    AlgebraInvariants x = algebra_invariants(a), y = algebra_invariants(b);
    if (x.positive != y.positive || x.negative != y.negative || x.null != y.null || x.derived != y.derived ||
        x.center != y.center || x.abelian != y.abelian || x.nilpotent_derived != y.nilpotent_derived)
        return Verdict::No;
    if (x.abelian || a.n <= 2) return Verdict::Yes;
    if (a.n == 3) {
        // simple: the signature separates the compact and split forms;
        // derived dimension one: Heisenberg or r2 + R, told apart above
        if (x.semisimple || x.derived[1] == 1) return Verdict::Yes;
    }
    return Verdict::Undecided;
}

AdaptedReport verify_one_adapted(const CoframeSet& cf, const Settings& s, const EllipticStructure* es) {
    AdaptedReport rep;
    const ChartPtr& c = cf.chart;
    std::vector<Form> all = cf.all();
    const std::size_t m = c->dim(), n = cf.n(), p = cf.p(), ne = cf.eta.size(), ns = cf.sigma.size();
    if (all.size() != m) {
        rep.pass = false;
        rep.failures.push_back("coframe has " + std::to_string(all.size()) + " forms on a chart of dimension " +
                               std::to_string(m));
        return rep;
    }
    ExprMatrix rows;
    for (const Form& f : all) rows.push_back(f.row());
    if (certified_rank(c, rows, s, kVessiotStream + 1).rank != static_cast<int>(m)) {
        rep.pass = false;
        rep.failures.push_back("coframe is not of full rank");
        return rep;
    }
    std::vector<VectorField> dual = dual_frame(c, all, s);
    rep.dual = dual;
    auto pi_slot = [&](std::size_t a) { return n + a; };
    auto pibar_slot = [&](std::size_t a) { return n + p + a; };

    if (es) {
        SubBundle vinf = terminal_derived(es->v, s, &es->dminus).terminal();
        if (!same_span(make_bundle(c, cf.pi(), s), vinf, s)) rep.failures.push_back("span{eta, sigma} differs from V^(inf)");
        std::vector<Form> ti = cf.theta;
        for (const Form& e : cf.eta) {
            ti.push_back(e);
            ti.push_back(conj(e));
        }
        if (!same_span(make_bundle(c, ti, s), es->forms, s)) rep.failures.push_back("span{theta, eta, eta~} differs from I");
    }

    // P, and closure of span{θ, η, conj η} under conjugation
    rep.p.assign(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) rep.p[i][j] = pairing(cf.theta[i], conj(dual[j]));
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t u = 0; u < ns; ++u)
                for (std::size_t slot : {pi_slot(ne + u), pibar_slot(ne + u)}) {
                    ex.push_back(pairing(conj(cf.theta[j]), dual[slot]));
                    lab.push_back("theta" + idx(j) + "~ on " + cf.label(slot));
                }
        check_zero(c, ex, lab, s, rep.failures);
    }

    // dσ = 0
    for (std::size_t u = 0; u < ns; ++u) {
        Form ds = d(cf.sigma[u]);
        std::vector<Expr> ex = coefficients(ds);
        check_zero(c, ex, std::vector<std::string>(ex.size(), "d sigma" + idx(u)), s, rep.failures);
    }

    // dη: only σ∧σ and σ∧η
    rep.e = table(ne, ns, ns);
    rep.f = table(ne, ns, ne);
    for (std::size_t r = 0; r < ne; ++r) {
        Form de = d(cf.eta[r]);
        std::vector<Expr> bad;
        std::vector<std::string> lab;
        for (std::size_t x = 0; x < m; ++x)
            for (std::size_t y = x + 1; y < m; ++y) {
                Expr v = coefficient(de, dual, x, y);
                bool xs = x >= n + ne && x < n + p, ys = y >= n + ne && y < n + p;
                bool xe = x >= n && x < n + ne;
                if (xs && ys)
                    rep.e[r][x - n - ne][y - n - ne] = v;
                else if (xe && ys)
                    rep.f[r][y - n - ne][x - n] = -v;
                else {
                    bad.push_back(v);
                    lab.push_back("d eta" + idx(r) + ": " + cf.label(x) + "^" + cf.label(y));
                }
            }
        check_zero(c, bad, lab, s, rep.failures);
    }

    // dθ mod θ: π∧π (A), conj π∧conj π (P conj A), nothing mixed
    rep.a = table(n, p, p);
    rep.c = table(n, n, n);
    rep.m = table(n, p, n);
    Table3 b = table(n, p, p);
    for (std::size_t i = 0; i < n; ++i) {
        Form dt = d(cf.theta[i]);
        std::vector<Expr> bad;
        std::vector<std::string> lab;
        for (std::size_t x = 0; x < m; ++x)
            for (std::size_t y = x + 1; y < m; ++y) {
                Expr v = coefficient(dt, dual, x, y);
                if (y < n)
                    rep.c[i][x][y] = v;
                else if (x < n && y < n + p)
                    rep.m[i][y - n][x] = -v;
                else if (x < n)
                    continue;  // θ ∧ conj π, checked by the Vessiot test
                else if (y < n + p)
                    rep.a[i][x - n][y - n] = v;
                else if (x >= n + p)
                    b[i][x - n - p][y - n - p] = v;
                else {
                    bad.push_back(v);
                    lab.push_back("d theta" + idx(i) + ": " + cf.label(x) + "^" + cf.label(y));
                }
            }
        check_zero(c, bad, lab, s, rep.failures);
    }
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t bb = a + 1; bb < p; ++bb) {
                    Expr t = b[i][a][bb];
                    for (std::size_t j = 0; j < n; ++j) t = t - rep.p[i][j] * conj(rep.a[j][a][bb]);
                    ex.push_back(t);
                    lab.push_back("B - P conj(A) at (" + idx(i) + "; " + idx(a) + idx(bb) + ")");
                }
        check_zero(c, ex, lab, s, rep.failures);
    }

    // A, E, F are Darboux invariants: killed by the duals of conj σ
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        auto add = [&](const Table3& t, const std::string& name) {
            for (std::size_t i = 0; i < t.size(); ++i)
                for (std::size_t a = 0; a < t[i].size(); ++a)
                    for (std::size_t bb = 0; bb < t[i][a].size(); ++bb) {
                        if (t[i][a][bb].is_zero()) continue;
                        for (std::size_t u = 0; u < ns; ++u) {
                            ex.push_back(dual[pibar_slot(ne + u)].apply(t[i][a][bb]));
                            lab.push_back(name + "(" + idx(i) + "; " + idx(a) + idx(bb) + ") varies along " +
                                          cf.label(pibar_slot(ne + u)));
                        }
                    }
        };
        add(rep.a, "A");
        add(rep.e, "E");
        add(rep.f, "F");
        check_zero(c, ex, lab, s, rep.failures);
    }
    rep.pass = rep.failures.empty();
    return rep;
}

VessiotReport verify_vessiot(const CoframeSet& cf, const Settings& s, const EllipticStructure* es) {
    VessiotReport rep;
    static_cast<AdaptedReport&>(rep) = verify_one_adapted(cf, s, es);
    if (rep.dual.empty()) return rep;
    const ChartPtr& c = cf.chart;
    const std::size_t n = cf.n(), p = cf.p(), ne = cf.eta.size();
    const std::vector<VectorField>& dual = rep.dual;

    // no θ ∧ conj π terms
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        for (std::size_t i = 0; i < n; ++i) {
            Form dt = d(cf.theta[i]);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t a = 0; a < p; ++a) {
                    ex.push_back(coefficient(dt, dual, j, n + p + a));
                    lab.push_back("d theta" + idx(i) + ": " + cf.label(j) + "^" + cf.label(n + p + a));
                }
        }
        check_zero(c, ex, lab, s, rep.failures);
    }

    // C real, constant, rational
    rep.constants = StructureConstants(static_cast<int>(n));
    std::vector<Expr> cs;
    std::vector<std::array<std::size_t, 3>> where;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) {
                cs.push_back(rep.c[i][j][k]);
                where.push_back({i, j, k});
            }
    if (!cs.empty()) {
        Samples smp = sample(expr_fn(cs, c->domain()), c->domain(), s.seed, kVessiotStream + 2, 1);
        std::vector<Expr> resid;
        std::vector<std::string> lab;
        for (std::size_t t = 0; t < cs.size(); ++t) {
            auto [i, j, k] = where[t];
            std::string name = "C^" + idx(i) + "_" + idx(j) + idx(k);
            Coef q;
            if (!rationalize_value(smp.values[0][t], q)) {
                std::ostringstream os;
                os << name << " = " << smp.values[0][t] << " has no rational form with denominator <= 64";
                rep.failures.push_back(os.str());
                continue;
            }
            if (!q.is_real()) rep.failures.push_back(name + " is not real");
            rep.constants.set(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k), q.re);
            resid.push_back(cs[t] - Expr(q));
            lab.push_back(name + " is not constant");
        }
        check_zero(c, resid, lab, s, rep.failures);
    }
    if (!rep.constants.jacobi()) rep.failures.push_back("structure constants fail the Jacobi identity");

    // C and M are Darboux invariants
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t j = 0; j < n; ++j) {
                    if (rep.m[i][a][j].is_zero()) continue;
                    for (std::size_t u = ne; u < p; ++u) {
                        ex.push_back(dual[n + p + u].apply(rep.m[i][a][j]));
                        lab.push_back("M(" + idx(i) + "; " + idx(a) + idx(j) + ") varies along " + cf.label(n + p + u));
                    }
                }
        check_zero(c, ex, lab, s, rep.failures);
    }

    // imaginary at m and P(m) = -1
    PointAssignment m0 = cf.base_point();
    double worst = 0, big = 0;
    for (const Form& th : cf.theta) {
        std::vector<cd> row;
        for (const Expr& e : th.row()) row.push_back(evaluate_at(e, m0));
        for (std::size_t k = 0; k < c->coordinates().size(); ++k) {
            const Coordinate& x0 = c->coordinates()[k];
            int j = c->direction(x0.name);
            if (x0.real) {
                worst = std::max(worst, std::abs(row[j].real()));
                big = std::max(big, std::abs(row[j]));
            } else {
                int jb = c->direction(x0.name, true);
                cd x = row[j] + row[jb], y = cd(0, 1) * (row[j] - row[jb]);
                worst = std::max({worst, std::abs(x.real()), std::abs(y.real())});
                big = std::max({big, std::abs(x), std::abs(y)});
            }
        }
    }
    if (worst > 1e-9 * std::max(1.0, big)) rep.failures.push_back("theta is not imaginary on real vectors at the base point");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cd v = evaluate_at(rep.p[i][j], m0);
            if (std::abs(v - (i == j ? cd(-1) : cd(0))) > 1e-9)
                rep.failures.push_back("P(m) differs from -1 at (" + idx(i) + ", " + idx(j) + ")");
        }

    // P conj(C) = -C P P with C real
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        const StructureConstants& C = rep.constants;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l)
                for (std::size_t mm = l + 1; mm < n; ++mm) {
                    std::vector<Expr> t;
                    for (std::size_t j = 0; j < n; ++j) {
                        const Rational& v = C(static_cast<int>(j), static_cast<int>(l), static_cast<int>(mm));
                        if (v != 0) t.push_back(rational_expr(v) * rep.p[i][j]);
                        for (std::size_t k = 0; k < n; ++k) {
                            const Rational& w = C(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k));
                            if (w != 0) t.push_back(rational_expr(w) * rep.p[j][l] * rep.p[k][mm]);
                        }
                    }
                    ex.push_back(add(t));
                    lab.push_back("C-P identity at (" + idx(i) + "; " + idx(l) + idx(mm) + ")");
                }
        check_zero(c, ex, lab, s, rep.failures);
    }
    rep.pass = rep.failures.empty();
    return rep;
}

ExprMatrix identity_matrix(std::size_t n) {
    ExprMatrix out(n, std::vector<Expr>(n, Expr(0)));
    for (std::size_t k = 0; k < n; ++k) out[k][k] = Expr(1);
    return out;
}

ExprMatrix multiply(const ExprMatrix& a, const ExprMatrix& b) {
    ExprMatrix out(a.size(), std::vector<Expr>(b.empty() ? 0 : b[0].size(), Expr(0)));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < out[i].size(); ++j) {
            std::vector<Expr> t;
            for (std::size_t k = 0; k < b.size(); ++k)
                if (!a[i][k].is_zero() && !b[k][j].is_zero()) t.push_back(a[i][k] * b[k][j]);
            out[i][j] = add(t);
        }
    return out;
}

ExprMatrix conj(const ExprMatrix& a) {
    ExprMatrix out = a;
    for (auto& row : out)
        for (Expr& e : row) e = conj(e);
    return out;
}

std::vector<Form> apply(const ExprMatrix& a, const std::vector<Form>& forms) {
    std::vector<Form> out;
    for (const auto& row : a) {
        Form f(forms.at(0).chart(), forms[0].degree());
        for (std::size_t j = 0; j < row.size(); ++j)
            if (!row[j].is_zero()) f = f + row[j] * forms[j];
        out.push_back(f);
    }
    return out;
}

bool same_matrix(const ChartPtr& c, const ExprMatrix& a, const ExprMatrix& b, const Settings& s) {
    if (a.size() != b.size()) return false;
    std::vector<Expr> ex;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].size() != b[i].size()) return false;
        for (std::size_t j = 0; j < a[i].size(); ++j) ex.push_back(a[i][j] - b[i][j]);
    }
    return is_zero(ex, c->domain(), s).zero;
}

bool same_forms(const std::vector<Form>& a, const std::vector<Form>& b, const Settings& s) {
    if (a.size() != b.size()) return false;
    std::vector<Expr> ex;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (const Expr& e : coefficients(a[i] - b[i])) ex.push_back(e);
    return ex.empty() || is_zero(ex, a[0].chart()->domain(), s).zero;
}

Adjusted adapt_imaginary_at_point(const CoframeSet& cf, const Settings& s) {
    const ChartPtr& c = cf.chart;
    const std::size_t n = cf.n();
    PointAssignment m0 = cf.base_point();
    // values of θ on a real basis of T_m M
    std::vector<std::vector<cd>> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<cd> row;
        for (const Expr& e : cf.theta[i].row()) row.push_back(evaluate_at(e, m0));
        for (const Coordinate& x : c->coordinates()) {
            int j = c->direction(x.name);
            if (x.real) {
                vals[i].push_back(row[j]);
            } else {
                int jb = c->direction(x.name, true);
                vals[i].push_back(row[j] + row[jb]);
                vals[i].push_back(cd(0, 1) * (row[j] - row[jb]));
            }
        }
    }
    const std::size_t nv = vals.empty() ? 0 : vals[0].size();
    // k = a + i b: Re(k Θ) = a Re Θ - b Im Θ
    Eigen::MatrixXd eq(nv, 2 * n);
    for (std::size_t v = 0; v < nv; ++v)
        for (std::size_t i = 0; i < n; ++i) {
            eq(v, i) = vals[i][v].real();
            eq(v, n + i) = -vals[i][v].imag();
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(eq, Eigen::ComputeFullV);
    double top = svd.singularValues().size() ? svd.singularValues()(0) : 0;
    int r = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k)
        if (svd.singularValues()(k) > 1e-10 * std::max(1.0, top)) ++r;
    Eigen::MatrixXd null = svd.matrixV().rightCols(2 * n - r);
    Eigen::MatrixXcd best;
    for (int attempt = 0; attempt < 2 && best.size() == 0; ++attempt) {
        Eigen::MatrixXcd k(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::VectorXd target = Eigen::VectorXd::Zero(2 * n);
            target(attempt == 0 ? i : n + i) = 1;
            Eigen::VectorXd proj = null * (null.transpose() * target);
            for (std::size_t j = 0; j < n; ++j) k(i, j) = cd(proj(j), proj(n + j));
        }
        if (std::abs(k.determinant()) > 1e-8) best = k;
    }
    if (best.size() == 0) throw Error("no constant change makes theta imaginary at the base point");
    Adjusted out;
    out.k.assign(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Coef q;
            if (!rationalize_value(best(i, j), q)) q = Coef(Rational(best(i, j).real()), Rational(best(i, j).imag()));
            out.k[i][j] = Expr(q);
        }
    out.k_inv = inverse(c, out.k, s, kVessiotStream + 3);
    out.coframe = cf;
    out.coframe.theta = eds::apply(out.k, cf.theta);
    return out;
}

Adjusted polarize_normalize(const CoframeSet& cf, const std::vector<std::string>& invariants, const Settings& s) {
    const ChartPtr& c = cf.chart;
    const std::size_t n = cf.n();
    std::map<std::string, Expr> holo, anti;
    for (const Coordinate& x : c->coordinates()) {
        auto it = cf.base.find(x.name);
        if (it == cf.base.end()) throw Error("base point misses coordinate '" + x.name + "'");
        bool keep = std::find(invariants.begin(), invariants.end(), x.name) != invariants.end();
        if (!keep) holo[x.name] = it->second;
        if (!x.real) anti[x.name] = conj(it->second);
    }
    auto freeze = [&](const Form& f) {
        std::vector<Expr> row = f.row();
        for (Expr& e : row) e = substitute_leaves(e, holo, anti);
        return row;
    };
    // P = θ(conj dual). Freezing commutes with inversion, so freeze the rows of
    // the conjugate coframe first and invert that: the dual frame itself may
    // carry removable singularities at m.
    ExprMatrix bar;
    for (const Form& f : cf.all()) bar.push_back(freeze(conj(f)));
    ExprMatrix h = inverse(c, bar, s, kVessiotStream + 4);
    Adjusted out;
    out.k.assign(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Expr> row = freeze(cf.theta[i]);
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<Expr> t;
            for (std::size_t k = 0; k < row.size(); ++k)
                if (!row[k].is_zero() && !h[k][j].is_zero()) t.push_back(row[k] * h[k][j]);
            out.k[i][j] = -add(t);
        }
    }
    out.k_inv = inverse(c, out.k, s, kVessiotStream + 6);
    out.coframe = cf;
    out.coframe.theta = eds::apply(out.k_inv, cf.theta);
    return out;
}

OmegaReport build_omega(const CoframeSet& cf, const StructureConstants& cc, const ExprMatrix& p, const ExprMatrix& r,
                        const ExprMatrix& s_mat, const Settings& s) {
    OmegaReport rep;
    const ChartPtr& c = cf.chart;
    const std::size_t n = cf.n();
    ExprMatrix q = multiply(multiply(r, p), inverse(c, conj(r), s, kVessiotStream + 5));
    std::vector<Form> psi = eds::apply(s_mat, cf.pi());
    std::vector<Form> psibar;
    for (const Form& f : psi) psibar.push_back(conj(f));
    std::vector<Form> rt = eds::apply(r, cf.theta), qp = eds::apply(q, psibar);
    for (std::size_t i = 0; i < n; ++i) rep.omega.push_back(rt[i] + psi[i] + qp[i]);

    maurer_cartan_numeric(c, rep.omega, cc, s, rep.failures);
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = k + 1; l < n; ++l) {
                    std::vector<Expr> t;
                    for (std::size_t j = 0; j < n; ++j) {
                        const Rational& v = cc(static_cast<int>(j), static_cast<int>(k), static_cast<int>(l));
                        if (v != 0) t.push_back(rational_expr(v) * r[i][j]);
                    }
                    for (std::size_t a = 0; a < n; ++a)
                        for (std::size_t b = 0; b < n; ++b) {
                            const Rational& v = cc(static_cast<int>(i), static_cast<int>(a), static_cast<int>(b));
                            if (v != 0) t.push_back(rational_expr(-v) * r[a][k] * r[b][l]);
                        }
                    ex.push_back(add(t));
                    lab.push_back("R automorphism at (" + idx(i) + "; " + idx(k) + idx(l) + ")");
                }
        check_zero(c, ex, lab, s, rep.failures);
    }
    {
        std::vector<Form> obar;
        for (const Form& f : rep.omega) obar.push_back(conj(f));
        std::vector<Form> qo = eds::apply(q, obar);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<Expr> ex = coefficients(rep.omega[i] - qo[i]);
            check_zero(c, ex, std::vector<std::string>(ex.size(), "omega" + idx(i) + " - (R P conj R^-1 conj omega)"), s,
                       rep.failures);
        }
    }
    rep.pass = rep.failures.empty();
    return rep;
}

ExprMatrix solve_s_semisimple(const VessiotReport& v, const ChartPtr& c, const Settings& s) {
    const StructureConstants& cc = v.constants;
    const int n = cc.n;
    if (!algebra_invariants(cc).semisimple)
        throw Error("Killing form is degenerate: supply R and S for this algebra");
    const std::size_t p = v.m.empty() ? 0 : v.m[0].size();
    // rows (i, j), columns l: C^i_lj
    RMat lin;
    std::vector<std::pair<int, int>> rows;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<Rational> row(n);
            for (int l = 0; l < n; ++l) row[l] = cc(i, l, j);
            RMat trial = lin;
            trial.push_back(row);
            if (rank_of(trial) > static_cast<int>(lin.size())) {
                lin.push_back(row);
                rows.emplace_back(i, j);
            }
        }
    if (static_cast<int>(lin.size()) != n) throw Error("adjoint representation is not faithful");
    // invert the selected square block
    RMat aug(n, std::vector<Rational>(2 * n, 0));
    for (int r = 0; r < n; ++r) {
        for (int k = 0; k < n; ++k) aug[r][k] = lin[r][k];
        aug[r][n + r] = 1;
    }
    echelon(aug);
    ExprMatrix sm(n, std::vector<Expr>(p, Expr(0)));
    for (std::size_t a = 0; a < p; ++a)
        for (int l = 0; l < n; ++l) {
            std::vector<Expr> t;
            for (int r = 0; r < n; ++r) {
                const Rational& w = aug[l][n + r];
                if (w != 0) t.push_back(rational_expr(w) * v.m[rows[r].first][a][rows[r].second]);
            }
            sm[l][a] = add(t);
        }
    std::vector<Expr> resid;
    for (std::size_t a = 0; a < p; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                std::vector<Expr> t{v.m[i][a][j]};
                for (int l = 0; l < n; ++l)
                    if (cc(i, l, j) != 0) t.push_back(rational_expr(-cc(i, l, j)) * sm[l][a]);
                resid.push_back(add(t));
            }
    if (!is_zero(resid, c->domain(), s).zero) throw Error("M is not of the form S C");
    return sm;
}

}  // namespace eds
