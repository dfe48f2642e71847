#include "eds/extension.hpp"

#include <sstream>

namespace eds {

namespace {

constexpr std::uint64_t kExtensionStream = 0xe47;

using RMat = std::vector<std::vector<Rational>>;

Expr rat(const Rational& r) { return Expr(Coef(r)); }

Certificate zero_certificate(const std::string& name, const ChartPtr& c, const std::vector<Expr>& exprs,
                             const std::vector<std::string>& labels, const Settings& s) {
    Certificate out{name, true, ""};
    std::vector<Expr> live;
    std::vector<std::string> lab;
    for (std::size_t k = 0; k < exprs.size(); ++k)
        if (!exprs[k].is_zero()) {
            live.push_back(exprs[k]);
            lab.push_back(labels[k]);
        }
    if (live.empty() || is_zero(live, c->domain(), s).zero) return out;
    out.pass = false;
    for (std::size_t k = 0; k < live.size(); ++k) {
        ZeroCertificate z = is_zero(live[k], c->domain(), s);
        if (!z.zero) {
            std::ostringstream os;
            double worst = 0;
            for (double r : z.residuals) worst = std::max(worst, r);
            os << lab[k] << " (residual " << worst << ")";
            out.witness = os.str();
            break;
        }
    }
    return out;
}

void push_form(std::vector<Expr>& ex, std::vector<std::string>& lab, const Form& f, const std::string& label) {
    for (const Expr& e : coefficients(f)) {
        ex.push_back(e);
        lab.push_back(label);
    }
}

// Rational matrix of a constant Expr matrix (real entries only).
std::vector<Rational> flatten_constant(const ExprMatrix& m) {
    std::vector<Rational> out;
    for (const auto& row : m)
        for (const Expr& e : row) {
            if (!e.is_const() || !e.value().is_real()) throw Error("basis matrices must be real rational");
            out.push_back(e.value().re);
        }
    return out;
}

// Solves sum_i c_i X_i = M for matrices with Expr (or Form) entries: picks
// independent rows of the flattened basis and inverts that block.
struct BasisSolver {
    std::vector<int> rows;  // flattened entry index per unknown
    RMat inv;               // n x n

    explicit BasisSolver(const std::vector<ExprMatrix>& basis) {
        const std::size_t n = basis.size();
        std::vector<std::vector<Rational>> cols;
        for (const ExprMatrix& x : basis) cols.push_back(flatten_constant(x));
        const std::size_t len = cols.at(0).size();
        RMat sel;
        for (std::size_t r = 0; r < len && rows.size() < n; ++r) {
            std::vector<Rational> row(n);
            for (std::size_t i = 0; i < n; ++i) row[i] = cols[i][r];
            RMat trial = sel;
            trial.push_back(row);
            if (rational_echelon(trial).size() > sel.size()) {
                sel.push_back(row);
                rows.push_back(static_cast<int>(r));
            }
        }
        if (rows.size() != n) throw Error("basis matrices are linearly dependent");
        RMat aug(n, std::vector<Rational>(2 * n, 0));
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < n; ++k) aug[r][k] = sel[r][k];
            aug[r][n + r] = 1;
        }
        rational_echelon(aug);
        inv.assign(n, std::vector<Rational>(n));
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t k = 0; k < n; ++k) inv[r][k] = aug[r][n + k];
    }

    template <class T, class Get>
    std::vector<T> solve(Get entry, T zero) const {
        std::vector<T> out;
        for (std::size_t i = 0; i < inv.size(); ++i) {
            T acc = zero;
            for (std::size_t r = 0; r < inv.size(); ++r)
                if (inv[i][r] != 0) acc = acc + rat(inv[i][r]) * entry(rows[r]);
            out.push_back(acc);
        }
        return out;
    }
};

ExprMatrix mat_mul(const ExprMatrix& a, const ExprMatrix& b) { return multiply(a, b); }

Matrix numeric(const ExprMatrix& m, const PointAssignment& p) {
    Matrix out(m.size(), m.empty() ? 0 : m[0].size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) out(i, j) = evaluate(m[i][j], p);
    return out;
}

bool holomorphic_direction(const ChartPtr& c, int j) {
    const Direction& d = c->directions()[j];
    return !d.bar && !c->coordinates()[d.coord].real;
}

}  // namespace

bool all_pass(const std::vector<Certificate>& cs) {
    for (const Certificate& c : cs)
        if (!c.pass) return false;
    return true;
}

LieGroupModel matrix_group(const ChartPtr& chart, const std::vector<std::string>& coords, const ExprMatrix& g,
                           const std::vector<ExprMatrix>& basis, const Settings& s) {
    LieGroupModel m;
    m.chart = chart;
    m.coords = coords;
    m.matrix = g;
    m.basis = basis;
    const std::size_t n = basis.size(), N = g.size();
    BasisSolver solver(basis);
    auto flat = [N](const ExprMatrix& x) {
        std::vector<Expr> out;
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) out.push_back(x[a][b]);
        return out;
    };

    m.c = StructureConstants(static_cast<int>(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            ExprMatrix br = mat_mul(basis[j], basis[k]);
            ExprMatrix rb = mat_mul(basis[k], basis[j]);
            for (std::size_t a = 0; a < N; ++a)
                for (std::size_t b = 0; b < N; ++b) br[a][b] = br[a][b] - rb[a][b];
            std::vector<Expr> f = flat(br);
            std::vector<Expr> coef = solver.solve<Expr>([&](int r) { return f[r]; }, Expr(0));
            std::vector<Expr> rebuilt(f.size(), Expr(0));
            for (std::size_t i = 0; i < n; ++i) {
                if (!coef[i].is_const() || !coef[i].value().is_real())
                    throw Error("basis does not close under the commutator");
                m.c(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)) = coef[i].value().re;
                std::vector<Expr> x = flat(basis[i]);
                for (std::size_t r = 0; r < f.size(); ++r) rebuilt[r] = rebuilt[r] + coef[i] * x[r];
            }
            for (std::size_t r = 0; r < f.size(); ++r)
                if (!(rebuilt[r] - f[r]).is_zero()) throw Error("basis does not close under the commutator");
        }

    ExprMatrix ginv = inverse(chart, g, s, kExtensionStream);
    std::vector<std::vector<Form>> dg(N, std::vector<Form>(N));
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < N; ++b) dg[a][b] = Form::differential(chart, g[a][b]);
    auto form_product = [&](bool left) {
        std::vector<Form> out;
        for (std::size_t a = 0; a < N; ++a)
            for (std::size_t b = 0; b < N; ++b) {
                Form f(chart, 1);
                for (std::size_t k = 0; k < N; ++k)
                    f = f + (left ? ginv[a][k] * dg[k][b] : ginv[k][b] * dg[a][k]);
                out.push_back(f);
            }
        return out;
    };
    std::vector<Form> left = form_product(true), right = form_product(false);
    m.mu_l = solver.solve<Form>([&](int r) { return left[r]; }, Form(chart, 1));
    m.mu_r = solver.solve<Form>([&](int r) { return right[r]; }, Form(chart, 1));

    // g^-1 X_j g = lambda^i_j X_i
    m.lambda.assign(n, std::vector<Expr>(n));
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<Expr> f = flat(mat_mul(mat_mul(ginv, basis[j]), g));
        std::vector<Expr> coef = solver.solve<Expr>([&](int r) { return f[r]; }, Expr(0));
        for (std::size_t i = 0; i < n; ++i) m.lambda[i][j] = coef[i];
    }
    m.omega = inverse(chart, m.lambda, s, kExtensionStream + 1);
    return m;
}

std::vector<Certificate> verify_group_model(const LieGroupModel& g, const Settings& s) {
    std::vector<Certificate> out;
    const ChartPtr& c = g.chart;
    const std::size_t n = g.mu_l.size();
    const StructureConstants& C = g.c;
    auto cc = [&](std::size_t i, std::size_t j, std::size_t k) {
        return C(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k));
    };
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        for (std::size_t i = 0; i < n; ++i) {
            Form r = d(g.mu_l[i]);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k)
                    if (cc(i, j, k) != 0) r = r + rat(cc(i, j, k)) * wedge(g.mu_l[j], g.mu_l[k]);
            push_form(ex, lab, r, "d mu_L" + std::to_string(i + 1) + " + C mu_L^mu_L");
        }
        out.push_back(zero_certificate("Maurer-Cartan", c, ex, lab, s));
    }
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        std::vector<Form> lm = apply(g.lambda, g.mu_r);
        for (std::size_t i = 0; i < n; ++i) push_form(ex, lab, g.mu_l[i] - lm[i], "mu_L" + std::to_string(i + 1) + " - (lambda mu_R)");
        out.push_back(zero_certificate("mu_L = lambda mu_R", c, ex, lab, s));
    }
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        ExprMatrix p = multiply(g.omega, g.lambda);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                ex.push_back(p[i][j] - Expr(i == j ? 1 : 0));
                lab.push_back("(omega lambda - 1) at " + std::to_string(i + 1) + std::to_string(j + 1));
            }
        out.push_back(zero_certificate("omega = lambda^-1", c, ex, lab, s));
    }
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                Form r = Form::differential(c, g.omega[i][j]);
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = 0; l < n; ++l)
                        if (cc(k, l, j) != 0) r = r - (rat(cc(k, l, j)) * g.omega[i][k]) * g.mu_l[l];
                push_form(ex, lab, r, "d omega - omega C mu_L at " + std::to_string(i + 1) + std::to_string(j + 1));
            }
        out.push_back(zero_certificate("d omega = omega C mu_L", c, ex, lab, s));
    }
    if (!g.matrix.empty()) {
        Certificate cert{"cocycle lambda(ab) = lambda(b) lambda(a)", true, ""};
        Sampler smp(c->domain(), s.seed, kExtensionStream + 2);
        const std::size_t nb = g.basis.size();
        Eigen::MatrixXcd basis(g.matrix.size() * g.matrix.size(), nb);
        for (std::size_t i = 0; i < nb; ++i) {
            PointAssignment none;
            Matrix x = numeric(g.basis[i], none);
            basis.col(i) = Eigen::Map<Eigen::VectorXcd>(x.data(), x.size());
        }
        double worst = 0;
        for (int t = 0; t < 3; ++t) {
            PointAssignment a = c->domain().assignment(smp.next()), b = c->domain().assignment(smp.next());
            Matrix ga = numeric(g.matrix, a), gb = numeric(g.matrix, b);
            Matrix ab = ga * gb, abinv = ab.inverse();
            Matrix lam(nb, nb);
            for (std::size_t j = 0; j < nb; ++j) {
                PointAssignment none;
                Matrix x = abinv * numeric(g.basis[j], none) * ab;
                Eigen::VectorXcd v = Eigen::Map<Eigen::VectorXcd>(x.data(), x.size());
                lam.col(j) = basis.colPivHouseholderQr().solve(v);
            }
            Matrix want = numeric(g.lambda, b) * numeric(g.lambda, a);
            worst = std::max(worst, (lam - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff()));
        }
        if (worst > 1e-8) {
            cert.pass = false;
            cert.witness = "relative mismatch " + std::to_string(worst);
        }
        out.push_back(cert);
    }
    return out;
}

std::vector<VectorField> left_invariant_fields(const LieGroupModel& g, const Settings& s) {
    const ChartPtr& c = g.chart;
    std::vector<int> dirs;
    for (const std::string& name : g.coords) dirs.push_back(c->direction(name));
    ExprMatrix a;
    for (const Form& f : g.mu_l) {
        std::vector<Expr> row = f.row(), r;
        for (int j : dirs) r.push_back(row[j]);
        a.push_back(r);
    }
    ExprMatrix inv = inverse(c, a, s, kExtensionStream + 3);
    std::vector<VectorField> out;
    for (std::size_t i = 0; i < g.mu_l.size(); ++i) {
        VectorField x(c);
        for (std::size_t k = 0; k < dirs.size(); ++k) x[dirs[k]] = inv[k][i];
        out.push_back(x);
    }
    return out;
}

std::vector<Certificate> verify_action(const std::vector<VectorField>& gens, const StructureConstants& c, const Settings& s) {
    std::vector<Certificate> out;
    if (gens.empty()) return out;
    const ChartPtr& ch = gens[0].chart();
    std::vector<Expr> ex, ex2;
    std::vector<std::string> lab, lab2;
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = 0; j < gens.size(); ++j) {
            std::string ij = std::to_string(i + 1) + "," + std::to_string(j + 1);
            if (j > i) {
                VectorField r = bracket(gens[i], gens[j]);
                for (std::size_t k = 0; k < gens.size(); ++k) {
                    const Rational& v = c(static_cast<int>(k), static_cast<int>(i), static_cast<int>(j));
                    if (v != 0) r = r - rat(v) * gens[k];
                }
                for (const Expr& e : r.coefs()) {
                    ex.push_back(e);
                    lab.push_back("[Z" + ij + "] - C Z");
                }
            }
            VectorField mixed = bracket(gens[i], conj(gens[j]));
            for (const Expr& e : mixed.coefs()) {
                ex2.push_back(e);
                lab2.push_back("[Z" + std::to_string(i + 1) + ", conj Z" + std::to_string(j + 1) + "]");
            }
        }
    out.push_back(zero_certificate("generator brackets", ch, ex, lab, s));
    out.push_back(zero_certificate("holomorphic and antiholomorphic generators commute", ch, ex2, lab2, s));
    return out;
}

StructureConstants extract_constants(const std::vector<VectorField>& gens, const Settings& s) {
    const int n = static_cast<int>(gens.size());
    StructureConstants out(n);
    if (n == 0) return out;
    const ChartPtr& ch = gens[0].chart();
    std::vector<VectorField> br;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) br.push_back(bracket(gens[i], gens[j]));
    Sampler smp(ch->domain(), s.seed, 0xe47 + 40);
    for (;;) {
        Point p = smp.next();
        Matrix z(static_cast<Eigen::Index>(ch->dim()), n), b(static_cast<Eigen::Index>(ch->dim()), static_cast<Eigen::Index>(br.size()));
        try {
            for (int k = 0; k < n; ++k) {
                std::vector<cd> v = field_at(gens[k], p);
                for (std::size_t r = 0; r < v.size(); ++r) z(static_cast<Eigen::Index>(r), k) = v[r];
            }
            for (std::size_t k = 0; k < br.size(); ++k) {
                std::vector<cd> v = field_at(br[k], p);
                for (std::size_t r = 0; r < v.size(); ++r) b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v[r];
            }
        } catch (const SingularPoint&) {
            smp.reject();
            continue;
        }
        Eigen::JacobiSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if (svd.rank() < n) throw NonGeneric("generators are dependent at a sample point");
        Matrix x = svd.solve(b);
        int col = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++col)
                for (int k = 0; k < n; ++k) {
                    cd v = x(k, col);
                    Rational q;
                    if (std::abs(v.imag()) > 1e-6 || !rationalize(v.real(), 64, 1e-6, q))
                        throw NonGeneric("bracket coefficients are not real rationals");
                    if (q != 0) out.set(k, i, j, q);
                }
        return out;
    }
}

Certificate verify_symmetry(const std::vector<VectorField>& gens, const SubBundle& h, const Settings& s) {
    Certificate out{"symmetry", true, ""};
    for (std::size_t i = 0; i < gens.size() && out.pass; ++i)
        for (std::size_t a = 0; a < h.forms.size() && out.pass; ++a)
            if (!contains_form(h, lie_derivative(gens[i], h.forms[a]), s)) {
                out.pass = false;
                out.witness = "L_Z" + std::to_string(i + 1) + " of generator " + std::to_string(a + 1) + " leaves the system";
            }
    return out;
}

Certificate check_transversality(const std::vector<VectorField>& gens, const SubBundle& h, const Settings& s) {
    Certificate out{"transversality", true, ""};
    if (gens.empty()) return out;
    ExprMatrix rows;
    for (const VectorField& z : gens) {
        std::vector<Expr> r;
        for (const Form& f : h.forms) r.push_back(pairing(f, z));
        rows.push_back(r);
    }
    int r = certified_rank(h.chart, rows, s, kExtensionStream + 4).rank;
    if (r != static_cast<int>(gens.size())) {
        out.pass = false;
        out.witness = "theta(Z) has rank " + std::to_string(r) + " < " + std::to_string(gens.size());
    }
    return out;
}

bool verify_invariant(const Expr& f, const std::vector<VectorField>& gens, InvarianceMode mode, const Settings& s) {
    if (gens.empty()) return true;
    std::vector<Expr> vals;
    for (const VectorField& z : gens) {
        Expr v = z.apply(f);
        if (mode == InvarianceMode::Real) v = v + conj(z).apply(f);
        vals.push_back(v);
    }
    return is_zero(vals, gens[0].chart()->domain(), s).zero;
}

VectorField prolong_contact_vf(const VectorField& z, const JetSpec& jet) {
    const ChartPtr& c = z.chart();
    VectorField out = z;
    int ind = c->direction(jet.independent);
    if (ind < 0) throw UnknownSymbol("unknown independent variable '" + jet.independent + "'");
    Expr dxi = jet.total.apply(z[ind]);
    for (const auto& chain : jet.chains) {
        int top = c->direction(chain.back());
        for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
            int here = c->direction(chain[k]), next = c->direction(chain[k + 1]);
            if (here < 0 || next < 0) throw UnknownSymbol("unknown jet coordinate in chain");
            const Expr& phi = out[here];
            if (jet.total[top].is_zero() && depends_on(phi, chain.back()))
                throw Error("component along " + chain[k] + " depends on the top jet coordinate " + chain.back());
            out[next] = jet.total.apply(phi) - c->function(next) * dxi;
        }
    }
    return out;
}

ExtensionReport build_extension(const LieGroupModel& g, const std::vector<Form>& psi, const std::vector<Form>& eta,
                                const Settings& s) {
    ExtensionReport rep;
    const ChartPtr& c = g.chart;
    if (psi.size() != g.mu_r.size()) throw Error("psi needs one form per group dimension");
    std::vector<Form> gens;
    for (std::size_t j = 0; j < psi.size(); ++j) gens.push_back(g.mu_r[j] - psi[j]);
    gens.insert(gens.end(), eta.begin(), eta.end());
    rep.h = make_bundle(c, gens, s);

    std::vector<Expr> ex;
    std::vector<std::string> lab;
    for (std::size_t a = 0; a < gens.size(); ++a) {
        std::vector<Expr> row = gens[a].row();
        for (std::size_t j = 0; j < row.size(); ++j)
            if (!holomorphic_direction(c, static_cast<int>(j))) {
                ex.push_back(row[j]);
                lab.push_back("generator " + std::to_string(a + 1) + " has a d" + c->direction_name(static_cast<int>(j)) + " term");
            } else {
                for (std::size_t k = 0; k < row.size(); ++k)
                    if (!holomorphic_direction(c, static_cast<int>(k))) {
                        ex.push_back(c->derivative(row[j], static_cast<int>(k)));
                        lab.push_back("generator " + std::to_string(a + 1) + " depends on " + c->direction_name(static_cast<int>(k)));
                    }
            }
    }
    rep.checks.push_back(zero_certificate("holomorphic", c, ex, lab, s));

    std::vector<VectorField> right = left_invariant_fields(g, s);
    Certificate inv = verify_symmetry(right, rep.h, s);
    inv.name = "invariant under right multiplication";
    rep.checks.push_back(inv);
    rep.checks.push_back(check_transversality(right, rep.h, s));

    FlagReport flag = terminal_derived(rep.h, s);
    Certificate term{"H^(inf) = 0", flag.terminal().rank() == 0, ""};
    if (!term.pass) term.witness = "terminal derived system has rank " + std::to_string(flag.terminal().rank());
    rep.checks.push_back(term);
    return rep;
}

std::vector<Certificate> verify_quotient_diagram(const QuotientDiagram& q, const Settings& s) {
    std::vector<Certificate> out;
    const ChartPtr& src = q.pi_g.source();
    CoordinateMap lhs = compose(q.phi_inv, q.pi_g), rhs = compose(q.q_g, q.psi);
    {
        std::vector<Expr> ex;
        std::vector<std::string> lab;
        for (const auto& [name, e] : lhs.images()) {
            auto it = rhs.images().find(name);
            if (it == rhs.images().end()) throw Error("diagram maps disagree on target coordinates");
            ex.push_back(e - it->second);
            lab.push_back("coordinate " + name + " differs");
        }
        out.push_back(zero_certificate("diagram commutes", src, ex, lab, s));
    }
    {
        std::vector<Form> pulled;
        for (const Form& f : q.extension) pulled.push_back(q.psi.pullback(f));
        Certificate c{"psi^* H equals the source system", same_span(make_bundle(src, pulled, s), make_bundle(src, q.source, s), s), ""};
        if (!c.pass) c.witness = "spans differ";
        out.push_back(c);
    }
    {
        Certificate c{"quotient system pulls back into E", true, ""};
        for (std::size_t k = 0; k < q.quotient.size() && c.pass; ++k)
            if (!contains_form(q.real_system, q.pi_g.pullback(q.quotient[k]), s)) {
                c.pass = false;
                c.witness = "generator " + std::to_string(k + 1) + " of the quotient system";
            }
        out.push_back(c);
    }
    return out;
}

ChartPtr plane_chart(const std::vector<Expr>& guards) {
    std::vector<Guard> g;
    for (const Expr& e : guards) {
        Guard x;
        x.expr = e;
        g.push_back(x);
    }
    return make_chart({Coordinate{"z", false}}, g);
}

namespace {

// data symbol -> replacement: f -> f(z), f1 -> f'(z), ...
std::map<std::string, Expr> data_map(const std::vector<std::string>& names, const DataSample& sample, const Expr& target) {
    std::map<std::string, bool> syms;
    collect_symbols(target, syms);
    std::map<std::string, Expr> out;
    for (const std::string& name : names) {
        auto it = sample.find(name);
        if (it == sample.end()) throw Error("sample does not bind '" + name + "'");
        for (const auto& [sym, real] : syms) {
            if (sym.rfind(name, 0) != 0) continue;
            std::string rest = sym.substr(name.size());
            if (!rest.empty() && rest.find_first_not_of("0123456789") != std::string::npos) continue;
            int order = rest.empty() ? 0 : std::stoi(rest);
            Expr e = it->second;
            for (int k = 0; k < order; ++k) e = wirtinger(e, "z");
            out[sym] = e;
        }
    }
    return out;
}

Expr bind_plane(const Expr& e) {
    static const ChartPtr plane = plane_chart();
    return plane->bind(e);
}

}  // namespace

Expr compose_solution(const Expr& jet_expr, const SolutionFormula& f, const DataSample& sample) {
    std::map<std::string, Expr> fields;
    for (const auto& [name, e] : f.fields) fields[name] = bind_plane(substitute(e, data_map(f.data, sample, e)));
    std::map<std::string, bool> syms;
    collect_symbols(jet_expr, syms);
    std::map<std::string, Expr> jets;
    for (const auto& [sym, real] : syms) {
        auto us = sym.find('_');
        std::string base = us == std::string::npos ? sym : sym.substr(0, us);
        auto it = fields.find(base);
        if (it == fields.end()) continue;
        Expr e = it->second;
        if (us != std::string::npos) {
            std::string ds = sym.substr(us + 1);
            if (ds.empty() || ds.find_first_not_of("zb") != std::string::npos) continue;
            for (char ch : ds) e = wirtinger(e, "z", ch == 'b');
        }
        jets[sym] = e;
    }
    Expr out = substitute(jet_expr, jets);
    return bind_plane(substitute(out, data_map(f.data, sample, out)));
}

ResidualReport verify_solution_formula(const SolutionFormula& f, const std::vector<DataSample>& samples, double tol,
                                       const Settings& s, int points) {
    ResidualReport rep;
    std::uint64_t stream = kExtensionStream + 16;
    for (const DataSample& sample : samples) {
        std::vector<Expr> guards;
        for (const Expr& g : f.guards) guards.push_back(compose_solution(g, f, sample));
        ChartPtr plane = plane_chart(guards);
        std::vector<Expr> res;
        for (const Expr& r : f.residuals) res.push_back(compose_solution(r, f, sample));
        try {
            Samples smp = eds::sample(expr_fn(res, plane->domain()), plane->domain(), s.seed, stream++, points);
            rep.points += static_cast<int>(smp.points.size());
            for (const auto& vals : smp.values)
                for (const cd& v : vals) rep.max_residual = std::max(rep.max_residual, std::abs(v));
        } catch (const DomainTooThin&) {
            ++rep.skipped_samples;
            std::ostringstream os;
            os << "sample " << (&sample - samples.data()) + 1 << " skipped: guards leave no admissible points";
            rep.notes.push_back(os.str());
        }
    }
    if (rep.skipped_samples == static_cast<int>(samples.size())) {
        rep.pass = false;
        rep.notes.push_back("every sample was skipped");
    } else {
        rep.pass = rep.max_residual < tol;
    }
    return rep;
}

bool verify_restricted_holomorphy(const Expr& xi, const SolutionFormula& f, const std::vector<DataSample>& samples,
                                  const Settings& s) {
    for (const DataSample& sample : samples) {
        std::vector<Expr> guards;
        for (const Expr& g : f.guards) guards.push_back(compose_solution(g, f, sample));
        ChartPtr plane = plane_chart(guards);
        if (!is_zero(wirtinger(compose_solution(xi, f, sample), "z", true), plane->domain(), s).zero) return false;
    }
    return true;
}

Expr schwarzian(const Expr& f) {
    Expr f1 = wirtinger(f, "z"), f2 = wirtinger(f1, "z"), f3 = wirtinger(f2, "z");
    return f3 / f1 - Expr(Coef(Rational(3, 2))) * pow(f2 / f1, 2);
}

bool verify_schwarzian(const std::vector<DataSample>& samples, const Settings& s) {
    SolutionFormula u;
    u.data = {"f"};
    u.fields["u"] = parse("ln(4*f1*f1~/(1 + f*f~)^2)");
    u.guards = {parse("f1")};
    Expr xi = parse("u_zz - u_z^2/2");
    for (const DataSample& sample : samples) {
        ChartPtr plane = plane_chart({compose_solution(u.guards[0], u, sample)});
        Expr lhs = compose_solution(xi, u, sample);
        Expr rhs = schwarzian(bind_plane(sample.at("f")));
        if (!is_zero(lhs - rhs, plane->domain(), s).zero) return false;
    }
    return true;
}

}  // namespace eds
