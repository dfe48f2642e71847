#include <doctest.h>

#include "eds/elliptic.hpp"

using namespace eds;

namespace {

const Expr I = Expr::imag_unit();

struct Laplace {
    ChartPtr c = make_chart("real x1 x2 u u1 u2 u11 u12");
    Settings s;
    std::vector<Form> theta{parse_form(c, "du - u1*dx1 - u2*dx2"), parse_form(c, "du1 - u11*dx1 - u12*dx2"),
                            parse_form(c, "du2 - u12*dx1 + u11*dx2")};
    VectorField d1 = parse_field(c, "d_x1 + u1*d_u + u11*d_u1 + u12*d_u2");
    VectorField d2 = parse_field(c, "d_x2 + u2*d_u + u12*d_u1 - u11*d_u2");
    VectorField p11 = parse_field(c, "d_u11"), p12 = parse_field(c, "d_u12");
    SubBundle i = make_bundle(c, theta, s);
    SubBundle dplus = make_bundle(c, std::vector<VectorField>{d1 - I * d2, p11 + I * p12}, s);
};

}  // namespace

TEST_CASE("Laplace is elliptic, decomposable and Darboux integrable") {
    Laplace L;
    const Settings& s = L.s;
    EllipticStructure es = check_elliptic(L.dplus, s, &L.i);
    for (const Clause& c : es.clauses) CHECK_MESSAGE(c.pass, c.name << ": " << c.witness);
    CHECK(es.elliptic());
    CHECK(es.dist_flag.ranks == std::vector<int>{4, 6, 7});
    CHECK(check_decomposable(es, s));
    CHECK(check_decomposable(es, {d(L.theta[1]), d(L.theta[2])}, s));

    DIReport r = check_darboux(es, s);
    CHECK(r.integrable);
    CHECK(r.m == 7);
    CHECK(r.d == 2);
    CHECK(r.q == 3);
    CHECK(r.n == 1);
    CHECK(r.numeta == r.q - r.d);
    CHECK(r.classification == DIClass::Neither);
    for (const char* f : {"x1 + i*x2", "u1 - i*u2", "u11 - i*u12"})
        CHECK(verify_darboux_invariant(L.c->parse(f), es, s));
    CHECK_FALSE(verify_darboux_invariant(L.c->parse("x1 - i*x2"), es, s));
    CHECK_FALSE(verify_darboux_invariant(L.c->parse("u"), es, s));

    CHECK(is_normal(es, s));
    CHECK(singular_system(es, {}).one_forms.rank() == 5);
    CHECK(conformal_symbol(L.i, s).type == SymbolType::Elliptic);
}

TEST_CASE("swapping D+ and D- keeps the verdict") {
    Laplace L;
    const Settings& s = L.s;
    DIReport a = check_darboux(check_elliptic(L.dplus, s, &L.i), s);
    DIReport b = check_darboux(check_elliptic(conj(L.dplus), s, &L.i), s);
    CHECK(a.integrable == b.integrable);
    CHECK(a.q == b.q);
    CHECK(a.classification == b.classification);
}

TEST_CASE("ellipticity failures name the clause") {
    Laplace L;
    const Settings& s = L.s;
    // conjugate choice in the second slot: the mixed bracket leaves D
    SubBundle bad = make_bundle(L.c, std::vector<VectorField>{L.d1 - I * L.d2, L.p11 - I * L.p12}, s);
    EllipticStructure es = check_elliptic(bad, s, &L.i);
    CHECK_FALSE(es.elliptic());
    CHECK(es.clauses[0].pass);
    CHECK(es.clauses[2].pass);
    CHECK_FALSE(es.clauses[3].pass);
    CHECK(es.clauses[3].witness.find("leaves D") != std::string::npos);

    // a direction outside ann(I)
    SubBundle out = make_bundle(L.c, std::vector<VectorField>{L.d1 - I * L.d2 + parse_field(L.c, "d_u"), L.p11 + I * L.p12}, s);
    EllipticStructure eo = check_elliptic(out, s, &L.i);
    CHECK_FALSE(eo.clauses[2].pass);

    // D+ = D-
    SubBundle real = make_bundle(L.c, std::vector<VectorField>{L.d1, L.p11}, s);
    CHECK_FALSE(check_elliptic(real, s, &L.i).clauses[0].pass);
}

TEST_CASE("benexample1 is minimally integrable") {
    ChartPtr c = make_chart("real x y u v u1 v1", {"u^2 + v^2 != 0"});
    Settings s;
    SubBundle i = make_bundle(
        c, std::vector<Form>{parse_form(c, "du - u1*dx + v1*dy"), parse_form(c, "dv - v1*dx - (u1 - u^2 - v^2)*dy")}, s);
    std::map<std::string, VectorField> named{{"Dx", parse_field(c, "d_x + u1*d_u + v1*d_v")},
                                             {"Dy", parse_field(c, "d_y - v1*d_u + (u1 - u^2 - v^2)*d_v")}};
    SubBundle dplus = make_bundle(
        c, std::vector<VectorField>{parse_field(c, "Dx - i*Dy + 2*(u*u1 + v*v1)*d_u1", named), parse_field(c, "d_u1 - i*d_v1")},
        s);
    EllipticStructure es = check_elliptic(dplus, s, &i);
    CHECK(es.elliptic());
    CHECK(check_decomposable(es, s));
    DIReport r = check_darboux(es, s);
    CHECK(r.integrable);
    CHECK(r.q == 2);
    CHECK(r.d == 2);
    CHECK(r.numeta == 0);
    CHECK(r.classification == DIClass::Minimal);
    CHECK(verify_darboux_invariant(c->parse("x + i*y"), es, s));
    CHECK(verify_darboux_invariant(c->parse("(u1 + i*v1)/(u + i*v) - u"), es, s));
}

TEST_CASE("Cauchy-Riemann system is maximal") {
    ChartPtr c = make_chart("real x y u v u1 v1");
    Settings s;
    SubBundle i = make_bundle(c, std::vector<Form>{parse_form(c, "du - u1*dx + v1*dy"), parse_form(c, "dv - v1*dx - u1*dy")}, s);
    std::map<std::string, VectorField> named{{"Dx", parse_field(c, "d_x + u1*d_u + v1*d_v")},
                                             {"Dy", parse_field(c, "d_y - v1*d_u + u1*d_v")}};
    SubBundle dplus =
        make_bundle(c, std::vector<VectorField>{parse_field(c, "Dx - i*Dy", named), parse_field(c, "d_u1 - i*d_v1")}, s);
    EllipticStructure es = check_elliptic(dplus, s, &i);
    CHECK(es.clauses[0].pass);
    CHECK(es.clauses[2].pass);
    CHECK(es.clauses[3].pass);
    DIReport r = check_darboux(es, s);
    CHECK(r.integrable);
    CHECK(r.q == 3);
    CHECK(r.n == 0);
    CHECK(r.classification == DIClass::Maximal);
    for (const char* f : {"x + i*y", "u + i*v", "u1 + i*v1"}) CHECK(verify_darboux_invariant(c->parse(f), es, s));
}

TEST_CASE("a two-form with mixed type is not decomposable") {
    ChartPtr c = make_chart("complex z1 z2");
    Settings s;
    SubBundle dplus = make_bundle(c, std::vector<VectorField>{parse_field(c, "d_z1"), parse_field(c, "d_z2")}, s);
    EllipticStructure es = check_elliptic(dplus, s);
    CHECK(es.forms.rank() == 0);
    Form sum = parse_form(c, "z1*dz2");  // d gives dz1 ∧ dz2
    Form omega = d(sum) + d(parse_form(c, "z1~*dz2~"));
    CHECK_FALSE(check_decomposable(es, {omega}, s));
    CHECK(check_decomposable(es, {d(sum)}, s));
    // Λ²V alone: normal only if it sits in d(V) on D-
    CHECK(is_normal(es, {d(sum)}, s) == false);
}

TEST_CASE("conformal symbol type") {
    Settings s;
    ChartPtr c = make_chart("real x1 x2 u u1 u2 u11 u12");
    SubBundle wave = make_bundle(c,
                                 std::vector<Form>{parse_form(c, "du - u1*dx1 - u2*dx2"), parse_form(c, "du1 - u11*dx1 - u12*dx2"),
                                                   parse_form(c, "du2 - u12*dx1 - u11*dx2")},
                                 s);
    SymbolReport w = conformal_symbol(wave, s);
    CHECK(w.type == SymbolType::Hyperbolic);
    CHECK(w.eigenvalues.size() == 3);

    ChartPtr g = make_chart("real u; complex z p r", {"1 - p^2 != 0", "sin(u) != 0", "cos(u) != 0"});
    Form b0 = parse_form(g, "du - 2*p/(1-p^2)*dz - 2*p~/(1-p~^2)*dz~");
    Form b1 = parse_form(g, "dp - r*dz - (1-p^2)*(1+p~^2)/(2*(1-p~^2)*cos(u))*dz~");
    SubBundle gi = make_bundle(g, std::vector<Form>{b0, b1, conj(b1)}, s);
    CHECK(conformal_symbol(gi, s).type == SymbolType::Elliptic);
}
