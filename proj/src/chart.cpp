#include "eds/chart.hpp"

#include <algorithm>
#include <sstream>

namespace eds {

namespace {

std::vector<Variable> variables_of(const std::vector<Coordinate>& cs) {
    std::vector<Variable> v;
    for (const Coordinate& c : cs) v.push_back({c.name, c.real});
    return v;
}

void require_same(const ChartPtr& a, const ChartPtr& b) {
    if (a.get() != b.get()) throw Error("chart mismatch");
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

// Sort idx in place; returns the permutation sign, 0 on a repeated entry.
int sort_sign(std::vector<int>& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i)
        for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
            if (idx[j - 1] == idx[j]) return 0;
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
        }
    return sign;
}

}  // namespace

Chart::Chart(std::vector<Coordinate> coords, std::vector<Guard> guards) : coords_(std::move(coords)) {
    for (std::size_t k = 0; k < coords_.size(); ++k) {
        const Coordinate& c = coords_[k];
        if (!index_.emplace(c.name, static_cast<int>(k)).second) throw Error("duplicate coordinate '" + c.name + "'");
        realness_[c.name] = c.real;
        first_.push_back(static_cast<int>(dirs_.size()));
        dirs_.push_back({static_cast<int>(k), false});
        if (!c.real) dirs_.push_back({static_cast<int>(k), true});
    }
    conj_.resize(dirs_.size());
    for (std::size_t j = 0; j < dirs_.size(); ++j) {
        const Direction& dr = dirs_[j];
        conj_[j] = coords_[dr.coord].real ? static_cast<int>(j) : first_[dr.coord] + (dr.bar ? 0 : 1);
    }
    for (Guard& g : guards) g.expr = bind(g.expr);
    domain_ = Domain(variables_of(coords_), std::move(guards));
}

int Chart::coordinate(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

int Chart::direction(const std::string& name, bool bar) const {
    int k = coordinate(name);
    if (k < 0) return -1;
    if (coords_[k].real) return bar ? -1 : first_[k];
    return first_[k] + (bar ? 1 : 0);
}

Expr Chart::function(int j) const {
    const Coordinate& c = coords_[dirs_[j].coord];
    Expr s = Expr::symbol(c.name, c.real);
    return dirs_[j].bar ? conj(s) : s;
}

std::string Chart::direction_name(int j) const {
    return coords_[dirs_[j].coord].name + (dirs_[j].bar ? "~" : "");
}

Expr Chart::derivative(const Expr& e, int j) const {
    return wirtinger(e, coords_[dirs_[j].coord].name, dirs_[j].bar);
}

Expr Chart::bind(const Expr& e) const { return bind_symbols(e, realness_); }

ChartPtr make_chart(std::vector<Coordinate> coords, std::vector<Guard> guards) {
    return std::make_shared<const Chart>(std::move(coords), std::move(guards));
}

ChartPtr make_chart(const std::string& decl, const std::vector<std::string>& guard_text) {
    std::vector<Coordinate> cs;
    std::stringstream ss(decl);
    std::string item;
    while (std::getline(ss, item, ';')) {
        std::stringstream is(item);
        std::string kind, name;
        if (!(is >> kind)) continue;
        bool real;
        if (kind == "real")
            real = true;
        else if (kind == "complex" || kind == "pair")
            real = false;
        else
            throw SyntaxError("expected 'real', 'complex' or 'pair'", 0);
        while (is >> name) {
            if (!name.empty() && name.back() == ',') name.pop_back();
            if (!name.empty()) cs.push_back({name, real});
        }
    }
    std::map<std::string, bool> realness;
    for (const Coordinate& c : cs) realness[c.name] = c.real;
    std::vector<Guard> gs;
    for (const std::string& t : guard_text) {
        Guard g;
        std::size_t at;
        if ((at = t.find("!=")) != std::string::npos) {
            g.kind = Guard::Kind::NonZero;
            g.expr = parse(t.substr(0, at)) - parse(t.substr(at + 2));
        } else if ((at = t.find('>')) != std::string::npos) {
            g.kind = Guard::Kind::Positive;
            g.expr = parse(t.substr(0, at)) - parse(t.substr(at + 1));
        } else {
            throw SyntaxError("guard needs '!=' or '>'", 0);
        }
        g.expr = bind_symbols(g.expr, realness);
        gs.push_back(g);
    }
    return make_chart(std::move(cs), std::move(gs));
}

// ---------------------------------------------------------------------------
// vector fields

VectorField::VectorField(ChartPtr c) : chart_(std::move(c)), c_(chart_->dim(), Expr(0)) {}

VectorField::VectorField(ChartPtr c, std::vector<Expr> coefs) : chart_(std::move(c)), c_(std::move(coefs)) {
    if (c_.size() != chart_->dim()) throw Error("vector field has wrong number of components");
}

VectorField VectorField::partial(ChartPtr c, int j) {
    VectorField x(std::move(c));
    x.c_[j] = Expr(1);
    return x;
}

Expr VectorField::apply(const Expr& f) const {
    std::vector<Expr> t;
    for (std::size_t j = 0; j < c_.size(); ++j)
        if (!c_[j].is_zero()) t.push_back(c_[j] * chart_->derivative(f, static_cast<int>(j)));
    return add(std::move(t));
}

std::string VectorField::str() const {
    std::string s;
    for (std::size_t j = 0; j < c_.size(); ++j) {
        if (c_[j].is_zero()) continue;
        if (!s.empty()) s += " + ";
        s += "(" + c_[j].str() + ")*d_" + chart_->direction_name(static_cast<int>(j));
    }
    return s.empty() ? "0" : s;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
    require_same(a.chart(), b.chart());
    VectorField r(a.chart());
    for (std::size_t j = 0; j < r.coefs().size(); ++j) r[j] = a[j] + b[j];
    return r;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
    require_same(a.chart(), b.chart());
    VectorField r(a.chart());
    for (std::size_t j = 0; j < r.coefs().size(); ++j) r[j] = a[j] - b[j];
    return r;
}

VectorField operator*(const Expr& f, const VectorField& a) {
    VectorField r(a.chart());
    for (std::size_t j = 0; j < r.coefs().size(); ++j) r[j] = f * a[j];
    return r;
}

VectorField bracket(const VectorField& a, const VectorField& b) {
    require_same(a.chart(), b.chart());
    VectorField r(a.chart());
    for (std::size_t j = 0; j < r.coefs().size(); ++j) r[j] = a.apply(b[j]) - b.apply(a[j]);
    return r;
}

VectorField conj(const VectorField& a) {
    VectorField r(a.chart());
    for (std::size_t j = 0; j < r.coefs().size(); ++j) r[a.chart()->conj_direction(j)] = conj(a[j]);
    return r;
}

// ---------------------------------------------------------------------------
// forms

Form::Form(ChartPtr c, int degree) : chart_(std::move(c)), degree_(degree) {}

Form Form::scalar(ChartPtr c, const Expr& f) {
    Form r(std::move(c), 0);
    r.add_term({}, f);
    return r;
}

Form Form::basis(ChartPtr c, int j) {
    Form r(std::move(c), 1);
    r.add_term({j}, Expr(1));
    return r;
}

Form Form::differential(ChartPtr c, const Expr& f) {
    Form r(c, 1);
    for (std::size_t j = 0; j < c->dim(); ++j) r.add_term({static_cast<int>(j)}, c->derivative(f, j));
    return r;
}

Form Form::one_form(ChartPtr c, const std::vector<Expr>& coefs) {
    Form r(c, 1);
    for (std::size_t j = 0; j < coefs.size(); ++j) r.add_term({static_cast<int>(j)}, coefs[j]);
    return r;
}

Expr Form::coef(const Index& idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? Expr(0) : it->second;
}

void Form::add_term(Index idx, const Expr& f) {
    if (f.is_zero()) return;
    if (static_cast<int>(idx.size()) != degree_) throw Error("term degree mismatch");
    int s = sort_sign(idx);
    if (s == 0) return;
    Expr v = s > 0 ? f : -f;
    auto it = terms_.find(idx);
    if (it == terms_.end()) {
        terms_.emplace(std::move(idx), v);
    } else {
        it->second = it->second + v;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

std::vector<Expr> Form::row() const {
    if (degree_ != 1) throw Error("row() needs a one-form");
    std::vector<Expr> r(chart_->dim(), Expr(0));
    for (const auto& [idx, f] : terms_) r[idx[0]] = f;
    return r;
}

std::string Form::str() const {
    std::string s;
    for (const auto& [idx, f] : terms_) {
        if (!s.empty()) s += " + ";
        s += "(" + f.str() + ")";
        for (std::size_t k = 0; k < idx.size(); ++k)
            s += (k ? "^d" : "*d") + chart_->direction_name(idx[k]);
    }
    return s.empty() ? "0" : s;
}

Form operator+(const Form& a, const Form& b) {
    require_same(a.chart(), b.chart());
    if (a.degree() != b.degree()) throw Error("degree mismatch");
    Form r = a;
    for (const auto& [idx, f] : b.terms()) r.add_term(idx, f);
    return r;
}

Form operator-(const Form& a) {
    Form r(a.chart(), a.degree());
    for (const auto& [idx, f] : a.terms()) r.add_term(idx, -f);
    return r;
}

Form operator-(const Form& a, const Form& b) { return a + (-b); }

Form operator*(const Expr& f, const Form& a) {
    Form r(a.chart(), a.degree());
    for (const auto& [idx, g] : a.terms()) r.add_term(idx, f * g);
    return r;
}

Form wedge(const Form& a, const Form& b) {
    require_same(a.chart(), b.chart());
    Form r(a.chart(), a.degree() + b.degree());
    for (const auto& [ia, fa] : a.terms())
        for (const auto& [ib, fb] : b.terms()) {
            Form::Index idx = ia;
            idx.insert(idx.end(), ib.begin(), ib.end());
            r.add_term(std::move(idx), fa * fb);
        }
    return r;
}

Form d(const Form& a) {
    const ChartPtr& c = a.chart();
    Form r(c, a.degree() + 1);
    for (const auto& [idx, f] : a.terms())
        for (std::size_t j = 0; j < c->dim(); ++j) {
            Expr g = c->derivative(f, j);
            if (g.is_zero()) continue;
            Form::Index k{static_cast<int>(j)};
            k.insert(k.end(), idx.begin(), idx.end());
            r.add_term(std::move(k), g);
        }
    return r;
}

Form interior(const VectorField& x, const Form& a) {
    require_same(x.chart(), a.chart());
    if (a.degree() == 0) return Form(a.chart(), 0);
    Form r(a.chart(), a.degree() - 1);
    for (const auto& [idx, f] : a.terms())
        for (std::size_t s = 0; s < idx.size(); ++s) {
            const Expr& xc = x[idx[s]];
            if (xc.is_zero()) continue;
            Form::Index k = idx;
            k.erase(k.begin() + s);
            r.add_term(std::move(k), (s % 2 ? -xc : xc) * f);
        }
    return r;
}

Form lie_derivative(const VectorField& x, const Form& a) {
    Form r = interior(x, d(a));
    if (a.degree() > 0) r = r + d(interior(x, a));
    return r;
}

Form conj(const Form& a) {
    Form r(a.chart(), a.degree());
    for (const auto& [idx, f] : a.terms()) {
        Form::Index k;
        for (int j : idx) k.push_back(a.chart()->conj_direction(j));
        r.add_term(std::move(k), conj(f));
    }
    return r;
}

Expr pairing(const Form& a, const VectorField& x) {
    if (a.degree() != 1) throw Error("pairing needs a one-form");
    require_same(x.chart(), a.chart());
    std::vector<Expr> t;
    for (const auto& [idx, f] : a.terms())
        if (!x[idx[0]].is_zero()) t.push_back(f * x[idx[0]]);
    return add(std::move(t));
}

Expr evaluate_on(const Form& a, const std::vector<VectorField>& xs) {
    if (static_cast<int>(xs.size()) != a.degree()) throw Error("wrong number of vectors");
    Form f = a;
    for (const VectorField& x : xs) f = interior(x, f);
    return f.coef({});
}

std::vector<Expr> coefficients(const Form& a) {
    std::vector<Expr> r;
    for (const auto& [idx, f] : a.terms()) r.push_back(f);
    return r;
}

// ---------------------------------------------------------------------------
// coordinate maps

CoordinateMap::CoordinateMap(ChartPtr source, ChartPtr target, std::map<std::string, Expr> images)
    : src_(std::move(source)), dst_(std::move(target)) {
    for (const Coordinate& c : dst_->coordinates()) {
        auto it = images.find(c.name);
        if (it == images.end()) throw Error("coordinate map misses target '" + c.name + "'");
        images_[c.name] = src_->bind(it->second);
    }
    for (std::size_t j = 0; j < dst_->dim(); ++j) {
        const Direction& dr = dst_->directions()[j];
        Expr img = images_[dst_->coordinates()[dr.coord].name];
        dimages_.push_back(Form::differential(src_, dr.bar ? conj(img) : img));
    }
}

Expr CoordinateMap::pullback(const Expr& f) const { return substitute(dst_->bind(f), images_); }

Form CoordinateMap::pullback(const Form& a) const {
    require_same(a.chart(), dst_);
    Form r(src_, a.degree());
    for (const auto& [idx, f] : a.terms()) {
        Form t = Form::scalar(src_, pullback(f));
        for (int j : idx) t = wedge(t, dimages_[j]);
        r = r + t;
    }
    return r;
}

CoordinateMap compose(const CoordinateMap& f, const CoordinateMap& g) {
    require_same(f.source(), g.target());
    std::map<std::string, Expr> im;
    for (const auto& [name, e] : f.images()) im[name] = g.pullback(e);
    return CoordinateMap(g.source(), f.target(), std::move(im));
}

// ---------------------------------------------------------------------------
// text input

namespace {

// Split e, linear in the given formal symbols, into coefficients. Formal
// symbols are complex; conj leaves give the conjugate object.
std::map<std::pair<std::string, bool>, Expr> linear_split(const Expr& e, const std::map<std::string, bool>& formal) {
    std::map<std::pair<std::string, bool>, Expr> out;
    std::map<std::string, Expr> zero;
    for (const auto& [name, r] : formal) {
        (void)r;
        zero[name] = Expr(0);
        for (bool bar : {false, true}) {
            Expr c = wirtinger(e, name, bar);
            if (c.is_zero()) continue;
            for (const auto& kv : formal)
                if (depends_on(c, kv.first)) throw Error("expression is not linear in '" + kv.first + "'");
            out[{name, bar}] = c;
        }
    }
    if (!substitute(e, zero).is_zero()) throw Error("expression has a term without a differential");
    return out;
}

std::map<std::string, bool> bind_table(const ChartPtr& c, const std::map<std::string, bool>& formal) {
    std::map<std::string, bool> t;
    for (const Coordinate& k : c->coordinates()) t[k.name] = k.real;
    for (const auto& kv : formal) t[kv.first] = false;
    return t;
}

}  // namespace

Form parse_form(const ChartPtr& c, const std::string& text, const std::map<std::string, Form>& named) {
    std::string t = trim(text);
    if (t.size() > 3 && t[0] == 'd' && t[1] == '(' && t.back() == ')') {
        // whole text d(...) only when the parentheses match
        int depth = 0;
        bool whole = true;
        for (std::size_t i = 1; i < t.size(); ++i) {
            depth += t[i] == '(' ? 1 : t[i] == ')' ? -1 : 0;
            if (depth == 0 && i + 1 < t.size()) whole = false;
        }
        if (whole) return Form::differential(c, c->parse(t.substr(2, t.size() - 3)));
    }
    std::map<std::string, bool> formal;
    for (const Coordinate& k : c->coordinates()) {
        if (c->coordinate("d" + k.name) >= 0) throw Error("coordinate name clashes with differential d" + k.name);
        formal["d" + k.name] = false;
    }
    for (const auto& kv : named) formal[kv.first] = false;
    Expr e = bind_symbols(eds::parse(t), bind_table(c, formal));
    Form r(c, 1);
    for (const auto& [key, coef] : linear_split(e, formal)) {
        const auto& [name, bar] = key;
        auto it = named.find(name);
        if (it != named.end()) {
            r = r + coef * (bar ? conj(it->second) : it->second);
            continue;
        }
        std::string coord = name.substr(1);
        int j = c->direction(coord, bar);
        if (j < 0) throw Error("no differential d" + coord + (bar ? "~" : ""));
        r.add_term({j}, coef);
    }
    return r;
}

VectorField parse_field(const ChartPtr& c, const std::string& text, const std::map<std::string, VectorField>& named) {
    std::map<std::string, bool> formal;
    for (const Coordinate& k : c->coordinates()) formal["d_" + k.name] = false;
    for (const auto& kv : named) formal[kv.first] = false;
    Expr e = bind_symbols(eds::parse(trim(text)), bind_table(c, formal));
    VectorField r(c);
    for (const auto& [key, coef] : linear_split(e, formal)) {
        const auto& [name, bar] = key;
        auto it = named.find(name);
        if (it != named.end()) {
            r = r + coef * (bar ? conj(it->second) : it->second);
            continue;
        }
        std::string coord = name.substr(2);
        int j = c->direction(coord, bar);
        if (j < 0) throw Error("no partial d_" + coord + (bar ? "~" : ""));
        r[j] = r[j] + coef;
    }
    return r;
}

}  // namespace eds
