#include "eds/flags.hpp"

#include <algorithm>
#include <random>

namespace eds {

namespace {

constexpr std::uint64_t kBundleStream = 0x5eed0001;
constexpr double kShadowTol = 1e-8;

std::vector<Expr> flatten(const ExprMatrix& m) {
    std::vector<Expr> v;
    for (const auto& r : m) v.insert(v.end(), r.begin(), r.end());
    return v;
}

ExprMatrix rows_of(const std::vector<Form>& fs) {
    ExprMatrix m;
    for (const Form& f : fs) m.push_back(f.row());
    return m;
}

ExprMatrix rows_of(const std::vector<VectorField>& xs) {
    ExprMatrix m;
    for (const VectorField& x : xs) m.push_back(x.coefs());
    return m;
}

std::string point_str(const Point& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(p[i].real()) + (p[i].imag() < 0 ? "" : "+") + std::to_string(p[i].imag()) + "i";
    }
    return s + ")";
}

// Select an independent subset of rows by incremental rank at the given
// evaluated matrices.
std::vector<int> greedy_rows(const std::vector<Matrix>& mats, const std::vector<double>& scales, double tol) {
    std::vector<int> keep;
    if (mats.empty()) return keep;
    const Eigen::Index nr = mats[0].rows();
    for (Eigen::Index r = 0; r < nr; ++r) {
        int votes = 0;
        for (std::size_t k = 0; k < mats.size(); ++k) {
            const Matrix& m = mats[k];
            Matrix sub(static_cast<Eigen::Index>(keep.size()) + 1, m.cols());
            for (std::size_t q = 0; q < keep.size(); ++q) sub.row(q) = m.row(keep[q]);
            sub.row(keep.size()) = m.row(r);
            votes += numeric_rank(sub, tol, scales[k]) > static_cast<int>(keep.size());
        }
        // independence at one point implies generic independence
        if (votes > 0) keep.push_back(static_cast<int>(r));
    }
    return keep;
}

}  // namespace

MatrixFn::MatrixFn(const ChartPtr& c, const ExprMatrix& m)
    : chart_(c), rows_(m.size()), cols_(m.empty() ? 0 : m[0].size()) {
    tape_ = std::make_shared<Tape>(c->domain().compile(flatten(m)));
}

bool MatrixFn::operator()(const Point& p, Matrix& out) const {
    double scale;
    return (*this)(p, out, scale);
}

bool MatrixFn::operator()(const Point& p, Matrix& out, double& scale) const {
    std::vector<cd> v;
    if (!tape_->run(chart_->domain().slots(p), v, scale)) return false;
    out.resize(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(r, c) = v[r * cols_ + c];
    return true;
}

int numeric_rank(const Matrix& m, double rel_tol, double scale) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    double cut = rel_tol * std::max(sv(0), scale);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++r;
    return r;
}

std::vector<Point> certificate_points(const ChartPtr& c, const ExprMatrix& m, const Settings& s,
                                      std::uint64_t stream) {
    MatrixFn f(c, m);
    Sampler smp(c->domain(), s.seed, stream, 5 * s.samples);
    std::vector<Point> pts;
    Matrix out;
    while (pts.size() < 3) {
        Point p = smp.next();
        if (!f(p, out)) {
            smp.reject();
            continue;
        }
        smp.accept();
        pts.push_back(p);
    }
    return pts;
}

RankCertificate certified_rank(const ChartPtr& c, const ExprMatrix& rows, const Settings& s, std::uint64_t stream) {
    RankCertificate cert;
    if (rows.empty()) return cert;
    MatrixFn f(c, rows);
    Sampler smp(c->domain(), s.seed, stream, 5 * s.samples);
    Matrix out;
    auto next = [&](Point& p) {
        for (;;) {
            p = smp.next();
            double scale;
            if (f(p, out, scale)) {
                smp.accept();
                return numeric_rank(out, s.rank_tol, scale);
            }
            smp.reject();
        }
    };
    std::vector<int> ranks(3);
    cert.points.resize(3);
    for (int k = 0; k < 3; ++k) ranks[k] = next(cert.points[k]);
    cert.ranks = ranks;
    int top = *std::max_element(ranks.begin(), ranks.end());
    int agree = static_cast<int>(std::count(ranks.begin(), ranks.end(), top));
    if (agree == 2) {
        int low = static_cast<int>(std::find_if(ranks.begin(), ranks.end(), [&](int r) { return r != top; }) - ranks.begin());
        for (int attempt = 0; attempt < 3 && ranks[low] != top; ++attempt) ranks[low] = next(cert.points[low]);
        agree = static_cast<int>(std::count(ranks.begin(), ranks.end(), top));
    }
    if (agree != 3) {
        std::string msg = "rank differs between certificate points:";
        for (int k = 0; k < 3; ++k) msg += " " + std::to_string(ranks[k]) + " at " + point_str(cert.points[k]);
        throw NonGeneric(msg);
    }
    cert.rank = top;
    return cert;
}

ExprMatrix kernel(const ChartPtr& c, const ExprMatrix& m0, const Settings& s, std::uint64_t stream) {
    if (m0.empty()) return {};
    const std::size_t nr = m0.size(), nc = m0[0].size();
    ExprMatrix a = m0;
    std::vector<Point> pts = certificate_points(c, a, s, stream);
    MatrixFn f(c, a);
    std::vector<Matrix> sh(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) f(pts[k], sh[k]);
    std::vector<double> scale(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) scale[k] = std::max(1.0, sh[k].cwiseAbs().maxCoeff());

    std::vector<Expr> zeroed;
    std::vector<int> pivot_col;  // per pivot row, in order
    std::vector<int> pivot_row;
    std::vector<bool> used(nr, false);
    auto small = [&](std::size_t r, std::size_t col) {
        for (std::size_t k = 0; k < sh.size(); ++k)
            if (std::abs(sh[k](r, col)) > kShadowTol * scale[k]) return false;
        return true;
    };
    auto large = [&](std::size_t r, std::size_t col) {
        for (std::size_t k = 0; k < sh.size(); ++k)
            if (std::abs(sh[k](r, col)) <= kShadowTol * scale[k]) return false;
        return true;
    };
    for (std::size_t col = 0; col < nc; ++col) {
        int best = -1;
        for (std::size_t r = 0; r < nr; ++r) {
            if (used[r] || a[r][col].is_zero() || !large(r, col)) continue;
            if (best < 0 || a[r][col].size() < a[best][col].size() ||
                (a[r][col].size() == a[best][col].size() && a[r][col].str() < a[best][col].str()))
                best = static_cast<int>(r);
        }
        bool mixed = false;
        for (std::size_t r = 0; r < nr; ++r)
            if (!used[r] && !a[r][col].is_zero() && !large(r, col) && !small(r, col)) mixed = true;
        if (best < 0) {
            if (mixed) throw NonGeneric("pivot vanishes at some but not all certificate points");
            continue;
        }
        used[best] = true;
        pivot_col.push_back(static_cast<int>(col));
        pivot_row.push_back(best);
        Expr inv = pow(a[best][col], -1);
        for (std::size_t k = 0; k < sh.size(); ++k) {
            cd p = sh[k](best, col);
            sh[k].row(best) /= p;
        }
        for (std::size_t j = 0; j < nc; ++j) a[best][j] = j == col ? Expr(1) : a[best][j] * inv;
        for (std::size_t r = 0; r < nr; ++r) {
            if (static_cast<int>(r) == best || a[r][col].is_zero()) continue;
            Expr factor = a[r][col];
            for (std::size_t k = 0; k < sh.size(); ++k) {
                cd fv = sh[k](r, col);
                sh[k].row(r) -= fv * sh[k].row(best);
            }
            for (std::size_t j = 0; j < nc; ++j) {
                if (j == col) {
                    a[r][j] = Expr(0);
                    continue;
                }
                if (a[best][j].is_zero()) continue;
                a[r][j] = a[r][j] - factor * a[best][j];
                if (!a[r][j].is_zero() && small(r, j)) {
                    zeroed.push_back(a[r][j]);
                    a[r][j] = Expr(0);
                    for (auto& m : sh) m(r, j) = 0;
                }
            }
        }
    }
    if (!zeroed.empty()) {
        ZeroCertificate z = is_zero(zeroed, c->domain(), s);
        if (!z.zero) throw NonGeneric("elimination cancelled an entry that is not identically zero");
    }
    ExprMatrix out;
    std::vector<bool> is_pivot(nc, false);
    for (int pc : pivot_col) is_pivot[pc] = true;
    for (std::size_t fc = 0; fc < nc; ++fc) {
        if (is_pivot[fc]) continue;
        std::vector<Expr> v(nc, Expr(0));
        v[fc] = Expr(1);
        for (std::size_t k = 0; k < pivot_col.size(); ++k) v[pivot_col[k]] = -a[pivot_row[k]][fc];
        out.push_back(std::move(v));
    }
    return out;
}

ExprMatrix inverse(const ChartPtr& c, const ExprMatrix& m, const Settings& s, std::uint64_t stream) {
    const std::size_t n = m.size();
    ExprMatrix aug(n, std::vector<Expr>(2 * n, Expr(0)));
    for (std::size_t r = 0; r < n; ++r) {
        if (m[r].size() != n) throw Error("inverse of a non-square matrix");
        for (std::size_t j = 0; j < n; ++j) aug[r][j] = m[r][j];
        aug[r][n + r] = Expr(-1);
    }
    // kernel vectors (x, e_k) of [m | -1] carry column k of the inverse
    ExprMatrix k = kernel(c, aug, s, stream);
    if (k.size() != n) throw NonGeneric("matrix is singular");
    ExprMatrix out(n, std::vector<Expr>(n));
    for (std::size_t col = 0; col < n; ++col) {
        if (!k[col][n + col].is_one()) throw NonGeneric("matrix is singular");
        for (std::size_t r = 0; r < n; ++r) out[r][col] = k[col][r];
    }
    return out;
}

ExprMatrix SubBundle::rows() const { return variance == Variance::Forms ? rows_of(forms) : rows_of(fields); }

namespace {

template <class T>
std::vector<int> independent(const ChartPtr& c, const std::vector<T>& gens, const Settings& s) {
    ExprMatrix rows = rows_of(gens);
    if (rows.empty()) return {};
    RankCertificate cert = certified_rank(c, rows, s, kBundleStream);
    MatrixFn f(c, rows);
    std::vector<Matrix> mats(3);
    std::vector<double> scales(3);
    for (int k = 0; k < 3; ++k) f(cert.points[k], mats[k], scales[k]);
    std::vector<int> keep = greedy_rows(mats, scales, s.rank_tol);
    if (static_cast<int>(keep.size()) != cert.rank) throw NonGeneric("greedy generator selection lost rank");
    return keep;
}

}  // namespace

SubBundle make_bundle(const ChartPtr& c, const std::vector<Form>& gens, const Settings& s) {
    SubBundle b{c, Variance::Forms, {}, {}};
    for (int k : independent(c, gens, s)) b.forms.push_back(gens[k]);
    return b;
}

SubBundle make_bundle(const ChartPtr& c, const std::vector<VectorField>& gens, const Settings& s) {
    SubBundle b{c, Variance::Fields, {}, {}};
    for (int k : independent(c, gens, s)) b.fields.push_back(gens[k]);
    return b;
}

SubBundle conj(const SubBundle& b) {
    SubBundle r{b.chart, b.variance, {}, {}};
    for (const Form& f : b.forms) r.forms.push_back(conj(f));
    for (const VectorField& x : b.fields) r.fields.push_back(conj(x));
    return r;
}

int span_rank(const std::vector<const SubBundle*>& parts, const Settings& s) {
    ExprMatrix rows;
    ChartPtr c;
    for (const SubBundle* p : parts) {
        if (c && p->chart != c) throw Error("chart mismatch");
        c = p->chart;
        ExprMatrix r = p->rows();
        rows.insert(rows.end(), r.begin(), r.end());
    }
    if (rows.empty()) return 0;
    return certified_rank(c, rows, s, kBundleStream + 1).rank;
}

int sum_rank(const SubBundle& a, const SubBundle& b, const Settings& s) {
    if (a.variance != b.variance) throw Error("variance mismatch");
    return span_rank({&a, &b}, s);
}

int intersection_rank(const SubBundle& a, const SubBundle& b, const Settings& s) {
    return static_cast<int>(a.rank() + b.rank()) - sum_rank(a, b, s);
}

bool contains(const SubBundle& a, const SubBundle& b, const Settings& s) {
    return sum_rank(a, b, s) == static_cast<int>(a.rank());
}

bool same_span(const SubBundle& a, const SubBundle& b, const Settings& s) {
    return a.rank() == b.rank() && contains(a, b, s);
}

bool contains_form(const SubBundle& a, const Form& f, const Settings& s) {
    SubBundle b{a.chart, Variance::Forms, {f}, {}};
    return contains(a, b, s);
}

bool contains_field(const SubBundle& a, const VectorField& x, const Settings& s) {
    SubBundle b{a.chart, Variance::Fields, {}, {x}};
    return contains(a, b, s);
}

SubBundle annihilator(const SubBundle& b, const Settings& s) {
    const ChartPtr& c = b.chart;
    ExprMatrix ker;
    if (b.rank() == 0) {
        for (std::size_t j = 0; j < c->dim(); ++j) {
            std::vector<Expr> v(c->dim(), Expr(0));
            v[j] = Expr(1);
            ker.push_back(v);
        }
    } else {
        ker = kernel(c, b.rows(), s, kBundleStream + 2);
    }
    if (b.variance == Variance::Fields) {
        std::vector<Form> fs;
        for (auto& v : ker) fs.push_back(Form::one_form(c, v));
        return make_bundle(c, fs, s);
    }
    std::vector<VectorField> xs;
    for (auto& v : ker) xs.emplace_back(c, v);
    return make_bundle(c, xs, s);
}

SubBundle derived_system(const SubBundle& i, const Settings& s, const SubBundle* annihilated) {
    if (i.variance != Variance::Forms) throw Error("derived_system needs one-forms");
    if (i.rank() == 0) return i;
    SubBundle dist = annihilated ? *annihilated : annihilator(i, s);
    const auto& xs = dist.fields;
    ExprMatrix mt;  // rows: pairs (a, b); columns: generators
    std::vector<Form> ds;
    for (const Form& f : i.forms) ds.push_back(d(f));
    for (std::size_t a = 0; a < xs.size(); ++a)
        for (std::size_t b = a + 1; b < xs.size(); ++b) {
            std::vector<Expr> row;
            bool nonzero = false;
            for (const Form& df : ds) {
                row.push_back(evaluate_on(df, {xs[a], xs[b]}));
                nonzero = nonzero || !row.back().is_zero();
            }
            if (nonzero) mt.push_back(std::move(row));
        }
    if (mt.empty()) return i;
    ExprMatrix lam = kernel(i.chart, mt, s, kBundleStream + 3);
    if (lam.size() == i.rank()) return i;
    std::vector<Form> gens;
    for (const auto& l : lam) {
        Form g(i.chart, 1);
        for (std::size_t k = 0; k < l.size(); ++k)
            if (!l[k].is_zero()) g = g + l[k] * i.forms[k];
        gens.push_back(g);
    }
    return make_bundle(i.chart, gens, s);
}

FlagReport terminal_derived(const SubBundle& i, const Settings& s, const SubBundle* annihilated) {
    FlagReport r;
    r.stages.push_back(i);
    r.ranks.push_back(static_cast<int>(i.rank()));
    for (;;) {
        SubBundle next = derived_system(r.stages.back(), s, r.stages.size() == 1 ? annihilated : nullptr);
        if (next.rank() == r.stages.back().rank()) break;
        r.ranks.push_back(static_cast<int>(next.rank()));
        r.stages.push_back(std::move(next));
    }
    r.stabilization = static_cast<int>(r.stages.size()) - 1;
    return r;
}

FlagReport bracket_flag(const SubBundle& dist, const Settings& s) {
    if (dist.variance != Variance::Fields) throw Error("bracket_flag needs vector fields");
    FlagReport r;
    r.stages.push_back(dist);
    r.ranks.push_back(static_cast<int>(dist.rank()));
    const std::size_t m = dist.chart->dim();
    while (r.stages.back().rank() < m) {
        const auto& xs = r.stages.back().fields;
        std::vector<VectorField> gens = xs;
        for (std::size_t a = 0; a < xs.size(); ++a)
            for (std::size_t b = a + 1; b < xs.size(); ++b) gens.push_back(bracket(xs[a], xs[b]));
        SubBundle next = make_bundle(dist.chart, gens, s);
        if (next.rank() == r.stages.back().rank()) break;
        r.ranks.push_back(static_cast<int>(next.rank()));
        r.stages.push_back(std::move(next));
    }
    r.stabilization = static_cast<int>(r.stages.size()) - 1;
    return r;
}

SubBundle cauchy_characteristics(const SubBundle& m, const SubBundle& i, const Settings& s) {
    SubBundle dist = annihilator(i, s);
    const auto& xs = dist.fields;
    ExprMatrix rows;
    for (const Form& phi : m.forms) {
        Form dphi = d(phi);
        for (std::size_t b = 0; b < xs.size(); ++b) {
            std::vector<Expr> row;
            for (std::size_t a = 0; a < xs.size(); ++a) row.push_back(evaluate_on(dphi, {xs[a], xs[b]}));
            rows.push_back(std::move(row));
        }
    }
    ExprMatrix ker;
    bool all_zero = true;
    for (const auto& r : rows)
        for (const Expr& e : r) all_zero = all_zero && e.is_zero();
    if (all_zero) return dist;
    ker = kernel(i.chart, rows, s, kBundleStream + 4);
    std::vector<VectorField> gens;
    for (const auto& v : ker) {
        VectorField x(i.chart);
        for (std::size_t a = 0; a < v.size(); ++a)
            if (!v[a].is_zero()) x = x + v[a] * xs[a];
        gens.push_back(x);
    }
    return make_bundle(i.chart, gens, s);
}

std::vector<cd> field_at(const VectorField& x, const Point& p) {
    Tape t = x.chart()->domain().compile(x.coefs());
    std::vector<cd> out;
    double scale;
    if (!t.run(x.chart()->domain().slots(p), out, scale)) throw SingularPoint("field singular at point");
    return out;
}

namespace {

struct PolarData {
    Matrix theta;                 // rank(I) x m
    std::vector<Matrix> omegas;   // antisymmetric m x m
};

PolarData polar_data(const SubBundle& i, const std::vector<Form>& two_forms, const Point& p) {
    const ChartPtr& c = i.chart;
    const std::size_t m = c->dim();
    PolarData pd;
    MatrixFn f(c, i.rows());
    if (!f(p, pd.theta)) throw SingularPoint("system singular at point");
    for (const Form& w : two_forms) {
        ExprMatrix a(m, std::vector<Expr>(m, Expr(0)));
        for (const auto& [idx, e] : w.terms()) {
            a[idx[0]][idx[1]] = e;
            a[idx[1]][idx[0]] = -e;
        }
        Matrix om;
        if (!MatrixFn(c, a)(p, om)) throw SingularPoint("two-form singular at point");
        pd.omegas.push_back(om);
    }
    return pd;
}

int polar_rank_of(const PolarData& pd, const Eigen::VectorXcd& x, double tol) {
    Matrix rows(pd.theta.rows() + static_cast<Eigen::Index>(pd.omegas.size()), pd.theta.cols());
    rows.topRows(pd.theta.rows()) = pd.theta;
    for (std::size_t k = 0; k < pd.omegas.size(); ++k)
        rows.row(pd.theta.rows() + k) = x.transpose() * pd.omegas[k];
    return numeric_rank(rows, tol);
}

}  // namespace

int polar_rank(const SubBundle& i, const std::vector<Form>& two_forms, const Point& p, const std::vector<cd>& x,
               const Settings& s) {
    PolarData pd = polar_data(i, two_forms, p);
    Eigen::VectorXcd xv = Eigen::Map<const Eigen::VectorXcd>(x.data(), static_cast<Eigen::Index>(x.size()));
    return polar_rank_of(pd, xv, s.rank_tol);
}

bool is_singular_integral_element(const SubBundle& i, const std::vector<Form>& two_forms, const Point& p,
                                  const std::vector<cd>& x, const Settings& s) {
    const ChartPtr& c = i.chart;
    const Eigen::Index m = static_cast<Eigen::Index>(c->dim());
    PolarData pd = polar_data(i, two_forms, p);
    Eigen::VectorXcd xv = Eigen::Map<const Eigen::VectorXcd>(x.data(), m);
    double xn = xv.norm();
    if (xn == 0) throw Error("zero vector");
    if ((pd.theta * xv).norm() > 1e-9 * std::max(1.0, pd.theta.norm()) * xn)
        throw Error("vector is not annihilated by the system");
    // Real tangent vectors in the Wirtinger frame: t -> a, z -> a + ib, z~ -> a - ib.
    Matrix t = Matrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Direction& dr = c->directions()[j];
        bool real = c->coordinates()[dr.coord].real;
        if (real) {
            t(j, j) = 1;
        } else if (!dr.bar) {
            t(j, j) = 1;
            t(j, j + 1) = cd(0, 1);
            t(j + 1, j) = 1;
            t(j + 1, j + 1) = cd(0, -1);
        }
    }
    Matrix th = pd.theta * t;
    Eigen::MatrixXd realsys(2 * th.rows(), m);
    realsys << th.real(), th.imag();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(realsys);
    lu.setThreshold(1e-10);
    Eigen::MatrixXd ker = lu.kernel();
    std::mt19937_64 rng(mix_seed(s.seed, 0x9e11));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int generic = 0;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd coef(ker.cols());
        for (Eigen::Index k = 0; k < coef.size(); ++k) coef(k) = u(rng);
        Eigen::VectorXcd dir = t * (ker * coef).cast<cd>();
        generic = std::max(generic, polar_rank_of(pd, dir, s.rank_tol));
    }
    return polar_rank_of(pd, xv, s.rank_tol) < generic;
}

}  // namespace eds
