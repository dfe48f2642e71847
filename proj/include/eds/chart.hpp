#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "eds/expr.hpp"

namespace eds {

struct Coordinate {
    std::string name;
    bool real = false;  // false: complex pair (z, conj z)
};

// Frame directions: one per real coordinate, two (z then conj z) per pair.
struct Direction {
    int coord = 0;
    bool bar = false;
};

class Chart {
public:
    Chart(std::vector<Coordinate> coords, std::vector<Guard> guards = {});

    const std::vector<Coordinate>& coordinates() const { return coords_; }
    const std::vector<Direction>& directions() const { return dirs_; }
    std::size_t dim() const { return dirs_.size(); }
    const Domain& domain() const { return domain_; }

    int coordinate(const std::string& name) const;  // -1 when absent
    int direction(const std::string& name, bool bar = false) const;
    int conj_direction(int j) const { return conj_[j]; }
    // The function whose differential is direction j (z, conj z or t).
    Expr function(int j) const;
    std::string direction_name(int j) const;  // "z", "z~", "t"

    Expr derivative(const Expr& e, int j) const;
    // Stamp realness of chart symbols; unknown names raise UnknownSymbol.
    Expr bind(const Expr& e) const;
    Expr parse(const std::string& text) const { return bind(eds::parse(text)); }

private:
    std::vector<Coordinate> coords_;
    std::vector<Direction> dirs_;
    std::vector<int> conj_;
    std::vector<int> first_;
    std::map<std::string, int> index_;
    std::map<std::string, bool> realness_;
    Domain domain_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::vector<Coordinate> coords, std::vector<Guard> guards = {});
// "complex z; real u; pair w" style declaration list.
ChartPtr make_chart(const std::string& decl, const std::vector<std::string>& guards = {});

class VectorField {
public:
    VectorField() = default;
    explicit VectorField(ChartPtr c);
    VectorField(ChartPtr c, std::vector<Expr> coefs);
    static VectorField partial(ChartPtr c, int j);

    const ChartPtr& chart() const { return chart_; }
    const std::vector<Expr>& coefs() const { return c_; }
    const Expr& operator[](int j) const { return c_[j]; }
    Expr& operator[](int j) { return c_[j]; }

    Expr apply(const Expr& f) const;
    std::string str() const;

private:
    ChartPtr chart_;
    std::vector<Expr> c_;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(const Expr& f, const VectorField& a);
VectorField bracket(const VectorField& a, const VectorField& b);
VectorField conj(const VectorField& a);

class Form {
public:
    using Index = std::vector<int>;

    Form() = default;
    Form(ChartPtr c, int degree);
    static Form scalar(ChartPtr c, const Expr& f);
    static Form basis(ChartPtr c, int j);
    static Form differential(ChartPtr c, const Expr& f);  // df
    // One-form from row coefficients.
    static Form one_form(ChartPtr c, const std::vector<Expr>& coefs);

    const ChartPtr& chart() const { return chart_; }
    int degree() const { return degree_; }
    const std::map<Index, Expr>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    Expr coef(const Index& idx) const;
    // Accumulate f dx^idx; idx need not be sorted, repeated entries drop the term.
    void add_term(Index idx, const Expr& f);
    // Coefficient row of a one-form.
    std::vector<Expr> row() const;

    std::string str() const;

private:
    ChartPtr chart_;
    int degree_ = 0;
    std::map<Index, Expr> terms_;
};

Form operator+(const Form& a, const Form& b);
Form operator-(const Form& a, const Form& b);
Form operator-(const Form& a);
Form operator*(const Expr& f, const Form& a);
Form wedge(const Form& a, const Form& b);
Form d(const Form& a);
Form interior(const VectorField& x, const Form& a);
Form lie_derivative(const VectorField& x, const Form& a);
Form conj(const Form& a);
Expr pairing(const Form& a, const VectorField& x);
// a(x1, ..., xk) with k = degree.
Expr evaluate_on(const Form& a, const std::vector<VectorField>& xs);
// Coefficients of the form as a flat list (for zero tests).
std::vector<Expr> coefficients(const Form& a);

// Target coordinate images in source symbols. A pair target gets the image of
// z; its conjugate image is conj of that.
class CoordinateMap {
public:
    CoordinateMap(ChartPtr source, ChartPtr target, std::map<std::string, Expr> images);

    const ChartPtr& source() const { return src_; }
    const ChartPtr& target() const { return dst_; }
    const std::map<std::string, Expr>& images() const { return images_; }

    Expr pullback(const Expr& f) const;
    Form pullback(const Form& a) const;

private:
    ChartPtr src_, dst_;
    std::map<std::string, Expr> images_;
    std::vector<Form> dimages_;  // pullback of each target direction
};

// (f ∘ g): first apply g, then f.
CoordinateMap compose(const CoordinateMap& f, const CoordinateMap& g);

// Parse "a*dx + b*dz~ + c*theta1" style text linear in differentials and in
// named forms. d(expr) as the whole right side gives an exact form.
Form parse_form(const ChartPtr& c, const std::string& text, const std::map<std::string, Form>& named = {});
// "Dx - i*Dy + 2*u*d_u1" with d_<coord> (d_<coord>~ for the conjugate) and
// named fields.
VectorField parse_field(const ChartPtr& c, const std::string& text,
                        const std::map<std::string, VectorField>& named = {});

}  // namespace eds
