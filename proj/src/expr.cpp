#include "eds/expr.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace eds {

namespace mp = boost::multiprecision;

// ---------------------------------------------------------------------------
// Coef

Coef operator/(const Coef& a, const Coef& b) {
    if (b.is_zero()) throw Error("division by zero");
    Rational den = b.re * b.re + b.im * b.im;
    return Coef((a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den);
}

Coef Coef::pow(int n) const {
    if (n < 0) return Coef(1) / pow(-n);
    Coef r(1), b = *this;
    while (n) {
        if (n & 1) r = r * b;
        b = b * b;
        n >>= 1;
    }
    return r;
}

std::string rational_str(const Rational& r) {
    std::ostringstream os;
    os << mp::numerator(r);
    if (mp::denominator(r) != 1) os << "/" << mp::denominator(r);
    return os.str();
}

std::string Coef::str() const {
    if (im == 0) return rational_str(re);
    std::string ims;
    Rational a = mp::abs(im);
    if (a == 1)
        ims = "i";
    else if (mp::denominator(a) == 1)
        ims = rational_str(a) + "*i";
    else
        ims = (mp::numerator(a) == 1 ? std::string("i") : rational_str(mp::numerator(a)) + "*i") + "/" +
              rational_str(mp::denominator(a));
    if (re == 0) return im < 0 ? "-" + ims : ims;
    return "(" + rational_str(re) + (im < 0 ? " - " : " + ") + ims + ")";
}

bool rationalize(double x, long max_den, double tol, Rational& out) {
    bool found = false;
    double best = tol;
    for (long q = 1; q <= max_den; ++q) {
        double p = std::round(x * q);
        double err = std::abs(x - p / q);
        if (err <= best) {
            if (!found || err < best * 0.5) {
                out = Rational(static_cast<long long>(p), q);
                best = std::max(err, 1e-15);
                found = true;
            }
            if (err < 1e-12) break;
        }
    }
    return found;
}

// ---------------------------------------------------------------------------
// nodes

namespace {

constexpr std::uint64_t kPrime = 1099511628211ULL;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h * kPrime;
}

std::uint64_t hash_rational(const Rational& r) {
    static const mp::cpp_int m("1000000000000000003");
    mp::cpp_int a = mp::numerator(r) % m, b = mp::denominator(r) % m;
    return mix(static_cast<std::uint64_t>(a.convert_to<long long>()),
               static_cast<std::uint64_t>(b.convert_to<long long>()));
}

std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) h = (h ^ c) * kPrime;
    return h;
}

Expr make(Node n) {
    std::uint64_t h = mix(0xcbf29ce484222325ULL, static_cast<std::uint64_t>(n.op));
    std::size_t size = 1;
    switch (n.op) {
    case Op::Const:
        h = mix(mix(h, hash_rational(n.value.re)), hash_rational(n.value.im));
        break;
    case Op::Sym:
    case Op::Conj:
        h = mix(mix(h, hash_string(n.name)), n.real);
        break;
    default:
        h = mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(n.exponent)));
        for (const Expr& a : n.args) {
            h = mix(h, a.hash());
            size += a.size();
        }
    }
    n.hash = h;
    n.size = size;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr make_op(Op op, std::vector<Expr> args, int exponent = 0) {
    Node n;
    n.op = op;
    n.args = std::move(args);
    n.exponent = exponent;
    return make(std::move(n));
}

Expr raw_pow(const Expr& b, int e) { return e == 1 ? b : make_op(Op::Pow, {b}, e); }

int cmp_rational(const Rational& a, const Rational& b) { return a < b ? -1 : (b < a ? 1 : 0); }

}  // namespace

Expr::Expr() : Expr(Coef(0)) {}
Expr::Expr(int v) : Expr(Coef(v)) {}
Expr::Expr(long v) : Expr(Coef(v)) {}
Expr::Expr(long long v) : Expr(Coef(v)) {}
Expr::Expr(const Coef& c) {
    Node n;
    n.op = Op::Const;
    n.value = c;
    *this = make(std::move(n));
}

Expr Expr::symbol(const std::string& name, bool real) {
    Node n;
    n.op = Op::Sym;
    n.name = name;
    n.real = real;
    return make(std::move(n));
}

int compare(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return 0;
    if (a.op() != b.op()) return a.op() < b.op() ? -1 : 1;
    switch (a.op()) {
    case Op::Const: {
        int c = cmp_rational(a.value().re, b.value().re);
        return c ? c : cmp_rational(a.value().im, b.value().im);
    }
    case Op::Sym:
    case Op::Conj: {
        int c = a.name().compare(b.name());
        if (c) return c < 0 ? -1 : 1;
        return a.is_real_symbol() == b.is_real_symbol() ? 0 : (a.is_real_symbol() ? -1 : 1);
    }
    default:
        break;
    }
    if (a.hash() != b.hash()) return a.hash() < b.hash() ? -1 : 1;
    if (a.exponent() != b.exponent()) return a.exponent() < b.exponent() ? -1 : 1;
    if (a.args().size() != b.args().size()) return a.args().size() < b.args().size() ? -1 : 1;
    for (std::size_t i = 0; i < a.args().size(); ++i)
        if (int c = compare(a.arg(i), b.arg(i))) return c;
    return 0;
}

namespace {
bool less_expr(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

// c * rest, with rest free of a constant factor.
void split_coef(const Expr& t, Coef& c, Expr& rest) {
    if (t.op() == Op::Mul && t.arg(0).is_const()) {
        c = t.arg(0).value();
        std::vector<Expr> r(t.args().begin() + 1, t.args().end());
        rest = r.size() == 1 ? r[0] : make_op(Op::Mul, std::move(r));
    } else {
        c = Coef(1);
        rest = t;
    }
}

// Coefficient of the term with the smallest non-constant part; a constant
// term wins outright.
Coef lead_coef(const Expr& sum) {
    Coef best;
    Expr best_rest;
    bool have = false;
    for (const Expr& a : sum.args()) {
        if (a.is_const()) return a.value();
        Coef c;
        Expr rest;
        split_coef(a, c, rest);
        if (!have || compare(rest, best_rest) < 0) {
            best = c;
            best_rest = rest;
            have = true;
        }
    }
    return best;
}

Expr scaled(const Coef& c, const Expr& rest) {
    if (c.is_one()) return rest;
    std::vector<Expr> f{Expr(c)};
    if (rest.op() == Op::Mul)
        f.insert(f.end(), rest.args().begin(), rest.args().end());
    else
        f.push_back(rest);
    return make_op(Op::Mul, std::move(f));
}
}  // namespace

Expr add(std::vector<Expr> terms) {
    Coef constant(0);
    std::vector<std::pair<Expr, Coef>> items;
    std::vector<Expr> stack = std::move(terms);
    std::vector<Expr> flat;
    while (!stack.empty()) {
        Expr t = std::move(stack.back());
        stack.pop_back();
        if (t.op() == Op::Add)
            for (const Expr& a : t.args()) stack.push_back(a);
        else
            flat.push_back(std::move(t));
    }
    for (const Expr& t : flat) {
        if (t.is_const()) {
            constant = constant + t.value();
            continue;
        }
        Coef c;
        Expr rest;
        split_coef(t, c, rest);
        items.emplace_back(rest, c);
    }
    std::sort(items.begin(), items.end(), [](auto& a, auto& b) { return less_expr(a.first, b.first); });
    std::vector<Expr> out;
    for (std::size_t i = 0; i < items.size();) {
        Coef c = items[i].second;
        std::size_t j = i + 1;
        while (j < items.size() && same(items[j].first, items[i].first)) c = c + items[j++].second;
        if (!c.is_zero()) out.push_back(scaled(c, items[i].first));
        i = j;
    }
    if (!constant.is_zero()) out.push_back(Expr(constant));
    if (out.empty()) return Expr(0);
    if (out.size() == 1) return out[0];
    std::sort(out.begin(), out.end(), less_expr);
    return make_op(Op::Add, std::move(out));
}

Expr mul(std::vector<Expr> factors) {
    Coef c(1);
    std::vector<std::pair<Expr, int>> items;
    std::vector<std::pair<Expr, int>> stack;
    for (auto& f : factors) stack.emplace_back(std::move(f), 1);
    while (!stack.empty()) {
        auto [f, e] = std::move(stack.back());
        stack.pop_back();
        switch (f.op()) {
        case Op::Mul:
            for (const Expr& a : f.args()) stack.emplace_back(a, e);
            break;
        case Op::Const:
            if (f.value().is_zero() && e < 0) throw Error("division by zero");
            c = c * f.value().pow(e);
            break;
        case Op::Pow:
            stack.emplace_back(f.arg(0), f.exponent() * e);
            break;
        default:
            items.emplace_back(std::move(f), e);
        }
    }
    if (c.is_zero()) return Expr(0);
    for (bool again = true; again;) {
        again = false;
        std::sort(items.begin(), items.end(), [](auto& a, auto& b) { return less_expr(a.first, b.first); });
        std::vector<std::pair<Expr, int>> merged;
        for (std::size_t i = 0; i < items.size();) {
            int e = items[i].second;
            std::size_t j = i + 1;
            while (j < items.size() && same(items[j].first, items[i].first)) e += items[j++].second;
            if (e != 0) merged.emplace_back(items[i].first, e);
            i = j;
        }
        items.clear();
        for (auto& [b, e] : merged) {
            if (b.op() == Op::Sqrt && (e >= 2 || e <= -2)) {
                int whole = e / 2;  // truncates toward zero
                const Expr& x = b.arg(0);
                if (x.is_const()) {
                    if (x.value().is_zero() && whole < 0) throw Error("division by zero");
                    c = c * x.value().pow(whole);
                } else {
                    items.emplace_back(x, whole);
                }
                if (e % 2) items.emplace_back(b, e % 2);
                again = true;
            } else {
                items.emplace_back(b, e);
            }
        }
        if (again) continue;
        // Inside a genuine product every sum is scaled so its leading term
        // has coefficient 1; a lone sum times a constant is distributed below.
        if (items.size() == 1 && items[0].second == 1) break;
        for (auto& [b, e] : items) {
            if (b.op() != Op::Add) continue;
            Coef lead = lead_coef(b);
            if (lead.is_one()) continue;
            std::vector<Expr> t;
            Coef inv = Coef(1) / lead;
            for (const Expr& a : b.args()) t.push_back(mul({Expr(inv), a}));
            b = add(std::move(t));
            c = c * lead.pow(e);
            again = true;
        }
    }
    if (c.is_zero()) return Expr(0);
    if (items.empty()) return Expr(c);
    if (items.size() == 1 && items[0].second == 1) {
        const Expr& f = items[0].first;
        if (c.is_one()) return f;
        if (f.op() == Op::Add) {
            std::vector<Expr> t;
            for (const Expr& a : f.args()) {
                Coef ac;
                Expr rest;
                split_coef(a, ac, rest);
                t.push_back(a.is_const() ? Expr(c * a.value()) : scaled(c * ac, rest));
            }
            return add(std::move(t));
        }
    }
    std::vector<Expr> out;
    for (auto& [b, e] : items) out.push_back(raw_pow(b, e));
    std::sort(out.begin(), out.end(), less_expr);
    if (!c.is_one()) out.insert(out.begin(), Expr(c));
    if (out.size() == 1) return out[0];
    return make_op(Op::Mul, std::move(out));
}

Expr pow(const Expr& b, int n) {
    if (n == 0) return Expr(1);
    if (n == 1) return b;
    if (b.is_const()) {
        if (b.value().is_zero() && n < 0) throw Error("division by zero");
        return Expr(b.value().pow(n));
    }
    return mul({raw_pow(b, n)});
}

Expr exp(const Expr& x) {
    if (x.is_zero()) return Expr(1);
    if (x.op() == Op::Ln) return x.arg(0);
    return make_op(Op::Exp, {x});
}

Expr ln(const Expr& x) {
    if (x.is_one()) return Expr(0);
    return make_op(Op::Ln, {x});
}

Expr sin(const Expr& x) { return x.is_zero() ? Expr(0) : make_op(Op::Sin, {x}); }
Expr cos(const Expr& x) { return x.is_zero() ? Expr(1) : make_op(Op::Cos, {x}); }
Expr tan(const Expr& x) { return x.is_zero() ? Expr(0) : make_op(Op::Tan, {x}); }

Expr sqrt(const Expr& x) {
    if (x.is_const() && x.value().is_real() && x.value().re >= 0) {
        mp::cpp_int p = mp::numerator(x.value().re), q = mp::denominator(x.value().re);
        mp::cpp_int sp = mp::sqrt(p), sq = mp::sqrt(q);
        if (sp * sp == p && sq * sq == q) return Expr(Coef(Rational(sp, sq)));
    }
    return make_op(Op::Sqrt, {x});
}

Expr conj(const Expr& x) {
    switch (x.op()) {
    case Op::Const:
        return Expr(x.value().conj());
    case Op::Sym: {
        if (x.is_real_symbol()) return x;
        Node n;
        n.op = Op::Conj;
        n.name = x.name();
        return make(std::move(n));
    }
    case Op::Conj:
        return Expr::symbol(x.name(), false);
    case Op::Add:
    case Op::Mul: {
        std::vector<Expr> a;
        for (const Expr& c : x.args()) a.push_back(conj(c));
        return x.op() == Op::Add ? add(std::move(a)) : mul(std::move(a));
    }
    case Op::Pow:
        return pow(conj(x.arg(0)), x.exponent());
    case Op::Exp:
        return exp(conj(x.arg(0)));
    case Op::Ln:
        return ln(conj(x.arg(0)));
    case Op::Sin:
        return sin(conj(x.arg(0)));
    case Op::Cos:
        return cos(conj(x.arg(0)));
    case Op::Tan:
        return tan(conj(x.arg(0)));
    case Op::Sqrt:
        return sqrt(conj(x.arg(0)));
    }
    return x;
}

Expr re(const Expr& x) { return (x + conj(x)) * Expr(Coef(Rational(1, 2))); }
Expr im(const Expr& x) { return (x - conj(x)) * Expr(Coef(0, Rational(-1, 2))); }

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({Expr(-1), b})}); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, -1)}); }

namespace {
Expr rebuild(const Expr& e, std::vector<Expr> a) {
    switch (e.op()) {
    case Op::Add:
        return add(std::move(a));
    case Op::Mul:
        return mul(std::move(a));
    case Op::Pow:
        return pow(a[0], e.exponent());
    case Op::Exp:
        return exp(a[0]);
    case Op::Ln:
        return ln(a[0]);
    case Op::Sin:
        return sin(a[0]);
    case Op::Cos:
        return cos(a[0]);
    case Op::Tan:
        return tan(a[0]);
    case Op::Sqrt:
        return sqrt(a[0]);
    default:
        return e;
    }
}

template <class Leaf>
Expr transform(const Expr& e, std::map<const Node*, Expr>& memo, const Leaf& leaf) {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    Expr r;
    if (e.op() == Op::Const)
        r = e;
    else if (e.op() == Op::Sym || e.op() == Op::Conj)
        r = leaf(e);
    else {
        std::vector<Expr> a;
        a.reserve(e.args().size());
        for (const Expr& c : e.args()) a.push_back(transform(c, memo, leaf));
        r = rebuild(e, std::move(a));
    }
    memo.emplace(e.get(), r);
    return r;
}
}  // namespace

Expr normalize(const Expr& e) {
    std::map<const Node*, Expr> memo;
    return transform(e, memo, [](const Expr& x) { return x; });
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
    std::map<const Node*, Expr> memo;
    return transform(e, memo, [&](const Expr& x) {
        auto it = repl.find(x.name());
        if (it == repl.end()) return x;
        return x.op() == Op::Sym ? it->second : conj(it->second);
    });
}

Expr substitute_leaves(const Expr& e, const std::map<std::string, Expr>& holo,
                       const std::map<std::string, Expr>& anti) {
    std::map<const Node*, Expr> memo;
    return transform(e, memo, [&](const Expr& x) {
        const auto& m = x.op() == Op::Sym ? holo : anti;
        auto it = m.find(x.name());
        return it == m.end() ? x : it->second;
    });
}

Expr bind_symbols(const Expr& e, const std::map<std::string, bool>& realness, bool allow_free) {
    std::map<const Node*, Expr> memo;
    return transform(e, memo, [&](const Expr& x) {
        auto it = realness.find(x.name());
        if (it == realness.end()) {
            if (!allow_free) throw UnknownSymbol("unknown symbol '" + x.name() + "'");
            return x;
        }
        Expr s = Expr::symbol(x.name(), it->second);
        return x.op() == Op::Sym ? s : conj(s);
    });
}

void collect_symbols(const Expr& e, std::map<std::string, bool>& out) {
    if (e.op() == Op::Sym || e.op() == Op::Conj) {
        out.emplace(e.name(), e.is_real_symbol());
        return;
    }
    for (const Expr& a : e.args()) collect_symbols(a, out);
}

bool depends_on(const Expr& e, const std::string& name) {
    if (e.op() == Op::Sym || e.op() == Op::Conj) return e.name() == name;
    for (const Expr& a : e.args())
        if (depends_on(a, name)) return true;
    return false;
}

namespace {
Expr diff(const Expr& e, const std::string& v, bool bar, std::map<const Node*, Expr>& memo) {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    Expr r;
    switch (e.op()) {
    case Op::Const:
        r = Expr(0);
        break;
    case Op::Sym:
        r = Expr(e.name() == v && (e.is_real_symbol() || !bar) ? 1 : 0);
        break;
    case Op::Conj:
        r = Expr(e.name() == v && bar ? 1 : 0);
        break;
    case Op::Add: {
        std::vector<Expr> t;
        for (const Expr& a : e.args()) t.push_back(diff(a, v, bar, memo));
        r = add(std::move(t));
        break;
    }
    case Op::Mul: {
        std::vector<Expr> t;
        for (std::size_t i = 0; i < e.args().size(); ++i) {
            Expr d = diff(e.arg(i), v, bar, memo);
            if (d.is_zero()) continue;
            std::vector<Expr> f;
            for (std::size_t j = 0; j < e.args().size(); ++j)
                if (j != i) f.push_back(e.arg(j));
            f.push_back(d);
            t.push_back(mul(std::move(f)));
        }
        r = add(std::move(t));
        break;
    }
    default: {
        const Expr& x = e.arg(0);
        Expr dx = diff(x, v, bar, memo);
        if (dx.is_zero()) {
            r = Expr(0);
            break;
        }
        Expr outer;
        switch (e.op()) {
        case Op::Pow:
            outer = Expr(e.exponent()) * pow(x, e.exponent() - 1);
            break;
        case Op::Exp:
            outer = e;
            break;
        case Op::Ln:
            outer = pow(x, -1);
            break;
        case Op::Sin:
            outer = cos(x);
            break;
        case Op::Cos:
            outer = -sin(x);
            break;
        case Op::Tan:
            outer = Expr(1) + pow(e, 2);
            break;
        case Op::Sqrt:
            outer = Expr(Coef(Rational(1, 2))) / e;
            break;
        default:
            break;
        }
        r = outer * dx;
    }
    }
    memo.emplace(e.get(), r);
    return r;
}
}  // namespace

Expr wirtinger(const Expr& e, const std::string& v, bool bar) {
    std::map<const Node*, Expr> memo;
    return diff(e, v, bar, memo);
}

// ---------------------------------------------------------------------------
// printing

namespace {
enum Prec { kSum = 1, kProd = 2, kUnary = 3, kPow = 4, kAtom = 5 };

bool negative_lead(const Expr& e) {
    if (e.is_const()) return e.value().im == 0 ? e.value().re < 0 : (e.value().re == 0 && e.value().im < 0);
    if (e.op() == Op::Mul && e.arg(0).is_const()) return negative_lead(e.arg(0));
    return false;
}

void print(const Expr& e, std::ostream& os, int ctx);

void print_const(const Coef& c, std::ostream& os, int ctx) {
    std::string s = c.str();
    bool compound = s[0] == '-' || s.find('/') != std::string::npos || s.find('*') != std::string::npos;
    if (s[0] == '(') compound = false;
    if (compound && ctx >= kProd)
        os << "(" << s << ")";
    else
        os << s;
}

void print_den(const std::vector<Expr>& den, std::ostream& os) {
    os << "/";
    if (den.size() == 1) {
        print(den[0], os, kPow);
        return;
    }
    os << "(";
    for (std::size_t i = 0; i < den.size(); ++i) {
        if (i) os << "*";
        print(den[i], os, kProd + 1);
    }
    os << ")";
}

void print_product(const std::vector<Expr>& num, const std::vector<Expr>& den, std::ostream& os) {
    if (num.empty()) os << "1";
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (i) os << "*";
        print(num[i], os, kProd + (i ? 1 : 0));
    }
    if (!den.empty()) print_den(den, os);
}

void print(const Expr& e, std::ostream& os, int ctx) {
    switch (e.op()) {
    case Op::Const:
        print_const(e.value(), os, ctx);
        return;
    case Op::Sym:
        os << e.name();
        return;
    case Op::Conj:
        os << e.name() << "~";
        return;
    case Op::Add: {
        if (ctx > kSum) os << "(";
        bool first = true;
        for (const Expr& t : e.args()) {
            if (!first && negative_lead(t)) {
                os << " - ";
                print(-t, os, kSum + 1);
            } else {
                if (!first) os << " + ";
                print(t, os, kSum + 1);
            }
            first = false;
        }
        if (ctx > kSum) os << ")";
        return;
    }
    case Op::Mul: {
        std::vector<Expr> num, den;
        Coef c(1);
        for (const Expr& f : e.args()) {
            if (f.is_const())
                c = f.value();
            else if (f.op() == Op::Pow && f.exponent() < 0)
                den.push_back(pow(f.arg(0), -f.exponent()));
            else
                num.push_back(f);
        }
        bool paren = ctx > kProd;
        if (paren) os << "(";
        if (c.is_real() && c.re < 0) {
            os << "-";
            c = -c;
        }
        if (c.is_real()) {
            // 3/4*x prints as 3*x/4
            // 3/4*x prints as 3*x/4; with other denominators the fraction
            // stays in front so that reparsing does not distribute it.
            if (den.empty() || mp::denominator(c.re) == 1) {
                if (mp::numerator(c.re) != 1) num.insert(num.begin(), Expr(Coef(Rational(mp::numerator(c.re)))));
                if (mp::denominator(c.re) != 1) den.insert(den.begin(), Expr(Coef(Rational(mp::denominator(c.re)))));
                print_product(num, den, os);
            } else {
                os << rational_str(c.re);
                if (!num.empty()) os << "*";
                std::vector<Expr> none;
                if (!num.empty()) print_product(num, none, os);
                print_den(den, os);
            }
        } else {
            print_const(c, os, kProd);
            if (!num.empty()) {
                os << "*";
                print_product(num, den, os);
            } else if (!den.empty()) {
                print_den(den, os);
            }
        }
        if (paren) os << ")";
        return;
    }
    case Op::Pow:
        if (e.exponent() < 0) {
            if (ctx > kProd) os << "(";
            os << "1/";
            Expr b = pow(e.arg(0), -e.exponent());
            print(b, os, kPow);
            if (ctx > kProd) os << ")";
            return;
        }
        print(e.arg(0), os, kAtom);
        os << "^" << e.exponent();
        return;
    default: {
        static const char* names[] = {"", "", "", "", "", "", "exp", "ln", "sin", "cos", "tan", "sqrt"};
        os << names[static_cast<int>(e.op())] << "(";
        print(e.arg(0), os, 0);
        os << ")";
    }
    }
}
}  // namespace

std::string Expr::str() const {
    std::ostringstream os;
    print(*this, os, 0);
    return os.str();
}

// ---------------------------------------------------------------------------
// parsing

namespace {
struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, pos); }

    Expr expr() {
        Expr r = term();
        for (;;) {
            if (eat('+'))
                r = r + term();
            else if (eat('-'))
                r = r - term();
            else
                return r;
        }
    }
    Expr term() {
        Expr r = unary();
        for (;;) {
            if (eat('*'))
                r = r * unary();
            else if (eat('/')) {
                std::size_t at = pos;
                Expr d = unary();
                if (d.is_zero()) throw SyntaxError("division by literal zero", at);
                r = r / d;
            } else
                return r;
        }
    }
    Expr unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return power();
    }
    Expr power() {
        Expr b = postfix();
        if (eat('^')) {
            skip();
            int sign = 1;
            if (eat('-'))
                sign = -1;
            else
                eat('+');
            skip();
            std::size_t st = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (st == pos) fail("expected integer exponent");
            int n = sign * std::stoi(s.substr(st, pos - st));
            if (b.is_zero() && n < 0) throw SyntaxError("division by literal zero", st);
            b = pow(b, n);
        }
        return b;
    }
    Expr postfix() {
        Expr b = base();
        while (eat('~')) b = conj(b);
        return b;
    }
    Expr base() {
        skip();
        if (pos >= s.size()) fail("unexpected end of input");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            Expr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t st = pos;
            while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
            std::string id = s.substr(st, pos - st);
            skip();
            if (pos < s.size() && s[pos] == '(') {
                static const std::map<std::string, Expr (*)(const Expr&)> fns = {
                    {"exp", &eds::exp}, {"ln", &eds::ln},   {"sin", &eds::sin},   {"cos", &eds::cos},
                    {"tan", &eds::tan}, {"sqrt", &eds::sqrt}, {"conj", &eds::conj}, {"Re", &eds::re},
                    {"Im", &eds::im}};
                auto it = fns.find(id);
                if (it == fns.end()) {
                    pos = st;
                    fail("unknown function '" + id + "'");
                }
                ++pos;
                Expr a = expr();
                if (!eat(')')) fail("expected ')'");
                return it->second(a);
            }
            if (id == "i") return Expr::imag_unit();
            return Expr::symbol(id);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
    Expr number() {
        std::size_t st = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        std::string whole = s.substr(st, pos - st);
        std::string frac;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            std::size_t fs = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            frac = s.substr(fs, pos - fs);
        }
        if (whole.empty() && frac.empty()) {
            pos = st;
            fail("malformed number");
        }
        mp::cpp_int n(whole.empty() ? "0" : whole);
        mp::cpp_int d = 1;
        for (char ch : frac) {
            n = n * 10 + (ch - '0');
            d *= 10;
        }
        return Expr(Coef(Rational(n, d)));
    }
};
}  // namespace

Expr parse(const std::string& text) {
    Parser p{text};
    Expr e = p.expr();
    p.skip();
    if (p.pos != text.size()) p.fail("unexpected trailing input");
    return e;
}

// ---------------------------------------------------------------------------
// evaluation

Tape::Tape(const std::vector<Expr>& outputs, const Resolver& resolve) {
    std::map<const Node*, int> seen;
    for (const Expr& e : outputs) outputs_.push_back(emit(e, seen, resolve));
    regs_.resize(code_.size());
}

int Tape::emit(const Expr& e, std::map<const Node*, int>& seen, const Resolver& resolve) {
    if (auto it = seen.find(e.get()); it != seen.end()) return it->second;
    Instr in;
    in.op = e.op();
    in.exponent = e.exponent();
    if (e.op() == Op::Const)
        in.value = e.value().value();
    else if (e.op() == Op::Sym || e.op() == Op::Conj)
        in.slot = resolve(e.name(), e.op() == Op::Conj);
    else {
        std::vector<int> ops;
        for (const Expr& a : e.args()) ops.push_back(emit(a, seen, resolve));
        in.first = static_cast<int>(operands_.size());
        in.count = static_cast<int>(ops.size());
        operands_.insert(operands_.end(), ops.begin(), ops.end());
    }
    code_.push_back(in);
    int idx = static_cast<int>(code_.size()) - 1;
    seen.emplace(e.get(), idx);
    return idx;
}

namespace {
constexpr double kSingular = 1e-13;

cd ipow(cd b, int n) {
    bool inv = n < 0;
    unsigned m = inv ? -n : n;
    cd r = 1;
    while (m) {
        if (m & 1) r *= b;
        b *= b;
        m >>= 1;
    }
    return inv ? 1.0 / r : r;
}
}  // namespace

bool Tape::run(std::span<const cd> slots, std::vector<cd>& out, double& scale) const {
    scale = 0;
    regs_.resize(code_.size());
    for (std::size_t k = 0; k < code_.size(); ++k) {
        const Instr& in = code_[k];
        const int* ops = operands_.data() + in.first;
        cd v;
        switch (in.op) {
        case Op::Const:
            v = in.value;
            break;
        case Op::Sym:
        case Op::Conj:
            v = slots[in.slot];
            break;
        case Op::Add:
            v = 0;
            for (int i = 0; i < in.count; ++i) v += regs_[ops[i]];
            break;
        case Op::Mul:
            v = 1;
            for (int i = 0; i < in.count; ++i) v *= regs_[ops[i]];
            break;
        case Op::Pow: {
            cd b = regs_[ops[0]];
            if (in.exponent < 0 && std::abs(b) < kSingular) return false;
            v = ipow(b, in.exponent);
            break;
        }
        case Op::Exp:
            v = std::exp(regs_[ops[0]]);
            break;
        case Op::Ln:
            if (std::abs(regs_[ops[0]]) < kSingular) return false;
            v = std::log(regs_[ops[0]]);
            break;
        case Op::Sin:
            v = std::sin(regs_[ops[0]]);
            break;
        case Op::Cos:
            v = std::cos(regs_[ops[0]]);
            break;
        case Op::Tan:
            if (std::abs(std::cos(regs_[ops[0]])) < kSingular) return false;
            v = std::tan(regs_[ops[0]]);
            break;
        case Op::Sqrt:
            if (std::abs(regs_[ops[0]]) < kSingular) return false;
            v = std::sqrt(regs_[ops[0]]);
            break;
        }
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        scale = std::max(scale, std::abs(v));
        regs_[k] = v;
    }
    out.resize(outputs_.size());
    for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = regs_[outputs_[i]];
    return true;
}

cd evaluate(const Expr& e, const PointAssignment& p) {
    std::vector<cd> slots;
    std::map<std::pair<std::string, bool>, int> idx;
    Tape t({e}, [&](const std::string& name, bool c) {
        auto it = p.find(name);
        if (it == p.end()) throw UnknownSymbol("no value for '" + name + "'");
        auto key = std::make_pair(name, c);
        auto [pos, fresh] = idx.emplace(key, static_cast<int>(slots.size()));
        if (fresh) slots.push_back(c ? std::conj(it->second) : it->second);
        return pos->second;
    });
    std::vector<cd> out;
    double scale;
    if (!t.run(slots, out, scale)) throw SingularPoint("singular point while evaluating " + e.str());
    return out[0];
}

// ---------------------------------------------------------------------------
// domains and sampling

Domain::Domain(std::vector<Variable> vars, std::vector<Guard> guards)
    : vars_(std::move(vars)), guards_(std::move(guards)) {
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (!index_.emplace(vars_[i].name, static_cast<int>(i)).second)
            throw Error("duplicate coordinate '" + vars_[i].name + "'");
    }
    std::vector<Expr> g;
    for (const Guard& x : guards_) g.push_back(x.expr);
    guard_tape_ = std::make_shared<Tape>(compile(g));
}

int Domain::index(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

Tape Domain::compile(const std::vector<Expr>& exprs) const {
    return Tape(exprs, [this](const std::string& name, bool c) {
        int k = index(name);
        if (k < 0) throw UnknownSymbol("unknown symbol '" + name + "'");
        return vars_[k].real ? 2 * k : 2 * k + (c ? 1 : 0);
    });
}

std::vector<cd> Domain::slots(const Point& p) const {
    std::vector<cd> s(2 * vars_.size());
    for (std::size_t k = 0; k < vars_.size(); ++k) {
        s[2 * k] = p[k];
        s[2 * k + 1] = std::conj(p[k]);
    }
    return s;
}

bool Domain::admissible(const Point& p) const {
    if (guards_.empty()) return true;
    std::vector<cd> out;
    double scale;
    if (!guard_tape_->run(slots(p), out, scale)) return false;
    for (std::size_t i = 0; i < guards_.size(); ++i) {
        const Guard& g = guards_[i];
        if (g.kind == Guard::Kind::NonZero ? std::abs(out[i]) <= g.margin : out[i].real() <= g.margin) return false;
    }
    return true;
}

PointAssignment Domain::assignment(const Point& p) const {
    PointAssignment a;
    for (std::size_t k = 0; k < vars_.size(); ++k) a[vars_[k].name] = p[k];
    return a;
}

Point Domain::point(const PointAssignment& a) const {
    Point p(vars_.size());
    for (std::size_t k = 0; k < vars_.size(); ++k) {
        auto it = a.find(vars_[k].name);
        if (it == a.end()) throw UnknownSymbol("no value for coordinate '" + vars_[k].name + "'");
        p[k] = vars_[k].real ? cd(it->second.real(), 0) : it->second;
    }
    return p;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {
// Grid numerators j/32 with magnitude window [0.3, 1.7].
constexpr int kDen = 32;
constexpr int kJmin = 10, kJmax = 54;
}  // namespace

Sampler::Sampler(const Domain& d, std::uint64_t seed, std::uint64_t stream, int reject_limit)
    : dom_(&d), state_(mix_seed(seed, stream)), limit_(reject_limit) {}

cd Sampler::draw(bool real) {
    std::mt19937_64 rng(state_);
    state_ = rng();
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    if (real) {
        int j = kJmin + pick(kJmax - kJmin + 1);
        return {(pick(2) ? -1.0 : 1.0) * j / kDen, 0.0};
    }
    for (;;) {
        int a = pick(2 * kJmax + 1) - kJmax, b = pick(2 * kJmax + 1) - kJmax;
        double r2 = static_cast<double>(a * a + b * b) / (kDen * kDen);
        if (r2 >= 0.09 && r2 <= 2.89) return {static_cast<double>(a) / kDen, static_cast<double>(b) / kDen};
    }
}

void Sampler::reject() {
    if (++consecutive_ > limit_)
        throw DomainTooThin("more than " + std::to_string(limit_) + " consecutive samples rejected");
}

Point Sampler::next() {
    for (;;) {
        Point p(dom_->dim());
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = draw(dom_->variables()[k].real);
        if (dom_->admissible(p)) return p;
        reject();
    }
}

PointFn expr_fn(const std::vector<Expr>& exprs, const Domain& d) {
    auto tape = std::make_shared<Tape>(d.compile(exprs));
    const Domain* dp = &d;
    return [tape, dp](const Point& p, std::vector<cd>& out, double& scale) {
        return tape->run(dp->slots(p), out, scale);
    };
}

Samples sample(const PointFn& f, const Domain& d, std::uint64_t seed, std::uint64_t stream, int k) {
    Sampler s(d, seed, stream, 5 * k);
    Samples r;
    std::vector<cd> v;
    double scale;
    while (static_cast<int>(r.points.size()) < k) {
        Point p = s.next();
        if (!f(p, v, scale)) {
            s.reject();
            continue;
        }
        s.accept();
        r.points.push_back(std::move(p));
        r.values.push_back(v);
        r.scales.push_back(scale);
    }
    return r;
}

ZeroCertificate is_zero(const PointFn& f, const Domain& d, const Settings& s, std::uint64_t stream) {
    Samples smp = sample(f, d, s.seed, stream, s.samples);
    ZeroCertificate c;
    c.seed = s.seed;
    for (std::size_t i = 0; i < smp.points.size(); ++i) {
        double res = 0;
        double tol = s.tol_abs + s.tol_rel * smp.scales[i];
        for (std::size_t j = 0; j < smp.values[i].size(); ++j) {
            double a = std::abs(smp.values[i][j]);
            res = std::max(res, a);
            if (a / tol > c.worst) {
                c.worst = a / tol;
                c.worst_index = static_cast<int>(j);
            }
        }
        c.residuals.push_back(res);
        c.scales.push_back(smp.scales[i]);
    }
    c.points = std::move(smp.points);
    c.zero = c.worst < 1.0;
    return c;
}

ZeroCertificate is_zero(const std::vector<Expr>& exprs, const Domain& d, const Settings& s) {
    std::vector<Expr> live;
    for (const Expr& e : exprs)
        if (!e.is_zero()) live.push_back(e);
    if (live.empty()) {
        ZeroCertificate c;
        c.seed = s.seed;
        return c;
    }
    return is_zero(expr_fn(live, d), d, s);
}

ZeroCertificate is_zero(const Expr& e, const Domain& d, const Settings& s) {
    return is_zero(std::vector<Expr>{e}, d, s);
}

bool directional_derivative(const std::function<bool(std::span<const cd>, std::vector<cd>&)>& f,
                            std::span<const cd> slots, std::span<const cd> dir, std::vector<cd>& out) {
    constexpr int N = 16;
    double norm = 0;
    for (cd v : dir) norm = std::max(norm, std::abs(v));
    out.clear();
    if (norm == 0) {
        std::vector<cd> v;
        if (!f(slots, v)) return false;
        out.assign(v.size(), 0);
        return true;
    }
    double r = 2e-3 / norm;
    std::vector<cd> s(slots.begin(), slots.end()), v;
    for (int k = 0; k < N; ++k) {
        cd w = std::polar(1.0, 2 * std::numbers::pi * k / N);
        cd h = r * w;
        for (std::size_t j = 0; j < s.size(); ++j) s[j] = slots[j] + h * dir[j];
        if (!f(s, v)) return false;
        if (out.empty()) out.assign(v.size(), 0);
        for (std::size_t j = 0; j < v.size(); ++j) out[j] += v[j] / w;
    }
    for (cd& o : out) o /= (N * r);
    return true;
}

}  // namespace eds
