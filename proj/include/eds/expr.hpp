#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace eds {

using Rational = boost::multiprecision::cpp_rational;
using cd = std::complex<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
    std::size_t offset;
    SyntaxError(const std::string& what, std::size_t off)
        : Error(what + " at offset " + std::to_string(off)), offset(off) {}
};

struct UnknownSymbol : Error {
    using Error::Error;
};

struct SingularPoint : Error {
    using Error::Error;
};

struct DomainTooThin : Error {
    using Error::Error;
};

// Rank or kernel dimension changed between certificate points.
struct NonGeneric : Error {
    using Error::Error;
};

// Exact complex rational re + im*i.
struct Coef {
    Rational re, im;

    Coef() = default;
    Coef(long long v) : re(v) {}
    Coef(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_one() const { return re == 1 && im == 0; }
    bool is_real() const { return im == 0; }
    Coef conj() const { return Coef(re, -im); }
    cd value() const { return {static_cast<double>(re), static_cast<double>(im)}; }
    Coef pow(int n) const;
    std::string str() const;

    friend Coef operator+(const Coef& a, const Coef& b) { return Coef(a.re + b.re, a.im + b.im); }
    friend Coef operator-(const Coef& a, const Coef& b) { return Coef(a.re - b.re, a.im - b.im); }
    friend Coef operator-(const Coef& a) { return Coef(-a.re, -a.im); }
    friend Coef operator*(const Coef& a, const Coef& b) {
        return Coef(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
    }
    friend Coef operator/(const Coef& a, const Coef& b);
    friend bool operator==(const Coef& a, const Coef& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const Coef& a, const Coef& b) { return !(a == b); }
};

// Closest fraction with denominator <= max_den, accepted when within tol.
bool rationalize(double x, long max_den, double tol, Rational& out);
std::string rational_str(const Rational& r);

enum class Op : std::uint8_t { Const, Sym, Conj, Add, Mul, Pow, Exp, Ln, Sin, Cos, Tan, Sqrt };

class Expr;

struct Node {
    Op op = Op::Const;
    bool real = false;  // Sym / Conj leaf
    int exponent = 0;   // Pow
    std::uint64_t hash = 0;
    std::size_t size = 1;
    Coef value;
    std::string name;
    std::vector<Expr> args;
};

class Expr {
public:
    Expr();
    Expr(int v);
    Expr(long v);
    Expr(long long v);
    Expr(const Coef& c);
    explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

    static Expr symbol(const std::string& name, bool real = false);
    static Expr imag_unit() { return Expr(Coef(0, 1)); }

    Op op() const { return n_->op; }
    const Node* get() const { return n_.get(); }
    const std::vector<Expr>& args() const { return n_->args; }
    const Expr& arg(std::size_t i) const { return n_->args[i]; }
    const std::string& name() const { return n_->name; }
    bool is_real_symbol() const { return n_->real; }
    int exponent() const { return n_->exponent; }
    const Coef& value() const { return n_->value; }
    std::uint64_t hash() const { return n_->hash; }
    std::size_t size() const { return n_->size; }

    bool is_const() const { return op() == Op::Const; }
    bool is_zero() const { return is_const() && value().is_zero(); }
    bool is_one() const { return is_const() && value().is_one(); }

    std::string str() const;

private:
    std::shared_ptr<const Node> n_;
};

int compare(const Expr& a, const Expr& b);
inline bool same(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, int n);
Expr exp(const Expr& x);
Expr ln(const Expr& x);
Expr sin(const Expr& x);
Expr cos(const Expr& x);
Expr tan(const Expr& x);
Expr sqrt(const Expr& x);
Expr conj(const Expr& x);
Expr re(const Expr& x);
Expr im(const Expr& x);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

// Rebuild bottom-up through the smart constructors.
Expr normalize(const Expr& e);

// d e / d v, or d e / d conj(v) when bar is set. Real symbols ignore bar.
Expr wirtinger(const Expr& e, const std::string& v, bool bar = false);

// conj(s) leaves become conj(replacement).
Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl);

// Holomorphic leaves s are looked up in `holo`, leaves conj(s) in `anti`.
// Names missing from a map are left alone.
Expr substitute_leaves(const Expr& e, const std::map<std::string, Expr>& holo,
                       const std::map<std::string, Expr>& anti);

// Re-stamp realness of every symbol. Names absent from `realness` raise
// UnknownSymbol unless allow_free.
Expr bind_symbols(const Expr& e, const std::map<std::string, bool>& realness, bool allow_free = false);

void collect_symbols(const Expr& e, std::map<std::string, bool>& out);
bool depends_on(const Expr& e, const std::string& name);

Expr parse(const std::string& text);

using PointAssignment = std::map<std::string, cd>;
cd evaluate(const Expr& e, const PointAssignment& p);

// Compiled evaluation over a slot vector: slot 2k is variable k, slot 2k+1
// its conjugate leaf. Slots are treated as independent complex inputs, so every
// output is holomorphic in the slot vector.
class Tape {
public:
    using Resolver = std::function<int(const std::string& name, bool conj_leaf)>;

    Tape() = default;
    Tape(const std::vector<Expr>& outputs, const Resolver& resolve);

    // False at a singular point. scale receives the largest intermediate
    // magnitude.
    bool run(std::span<const cd> slots, std::vector<cd>& out, double& scale) const;
    std::size_t outputs() const { return outputs_.size(); }

private:
    struct Instr {
        Op op;
        int exponent = 0;
        int slot = -1;
        int first = 0;
        int count = 0;
        cd value;
    };
    int emit(const Expr& e, std::map<const Node*, int>& seen, const Resolver& resolve);

    std::vector<Instr> code_;
    std::vector<int> operands_;
    std::vector<int> outputs_;
    mutable std::vector<cd> regs_;
};

struct Guard {
    enum class Kind { NonZero, Positive };
    Kind kind = Kind::NonZero;
    Expr expr;
    double margin = 1e-3;
};

struct Variable {
    std::string name;
    bool real = false;
};

using Point = std::vector<cd>;  // one value per variable

struct Settings {
    std::uint64_t seed = 42;
    int samples = 8;
    double tol_abs = 1e-9;
    double tol_rel = 1e-9;
    double rank_tol = 1e-9;
};

class Domain {
public:
    Domain() = default;
    Domain(std::vector<Variable> vars, std::vector<Guard> guards);

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Guard>& guards() const { return guards_; }
    int index(const std::string& name) const;  // -1 when absent
    std::size_t dim() const { return vars_.size(); }

    Tape compile(const std::vector<Expr>& exprs) const;
    std::vector<cd> slots(const Point& p) const;
    bool admissible(const Point& p) const;
    PointAssignment assignment(const Point& p) const;
    Point point(const PointAssignment& a) const;

private:
    std::vector<Variable> vars_;
    std::vector<Guard> guards_;
    std::map<std::string, int> index_;
    std::shared_ptr<Tape> guard_tape_;
};

// Deterministic stream of admissible points.
class Sampler {
public:
    Sampler(const Domain& d, std::uint64_t seed, std::uint64_t stream = 0, int reject_limit = 40);
    Point next();
    // Count a caller-side rejection (singular point); throws DomainTooThin
    // past the limit. Reset by accept().
    void reject();
    void accept() { consecutive_ = 0; }

private:
    cd draw(bool real);
    const Domain* dom_;
    std::uint64_t state_;
    int limit_;
    int consecutive_ = 0;
};

// Numeric function of a point: fills values and scale, false when singular.
using PointFn = std::function<bool(const Point&, std::vector<cd>&, double&)>;

PointFn expr_fn(const std::vector<Expr>& exprs, const Domain& d);

struct ZeroCertificate {
    bool zero = true;
    std::uint64_t seed = 0;
    std::vector<Point> points;
    std::vector<double> residuals;  // max |value| per point
    std::vector<double> scales;
    int worst_index = -1;  // output with the largest ratio
    double worst = 0;      // max |value| / (tol_abs + tol_rel * scale)
};

ZeroCertificate is_zero(const PointFn& f, const Domain& d, const Settings& s, std::uint64_t stream = 0);
ZeroCertificate is_zero(const std::vector<Expr>& exprs, const Domain& d, const Settings& s);
ZeroCertificate is_zero(const Expr& e, const Domain& d, const Settings& s);

// k admissible, non-singular points of a stream with their values.
struct Samples {
    std::vector<Point> points;
    std::vector<std::vector<cd>> values;
    std::vector<double> scales;
};
Samples sample(const PointFn& f, const Domain& d, std::uint64_t seed, std::uint64_t stream, int k);

// Directional derivative of a holomorphic point function along a slot-space
// direction (Cauchy integral on a small circle).
bool directional_derivative(const std::function<bool(std::span<const cd>, std::vector<cd>&)>& f,
                            std::span<const cd> slots, std::span<const cd> dir, std::vector<cd>& out);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace eds
