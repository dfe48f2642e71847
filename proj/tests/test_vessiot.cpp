#include <doctest.h>

#include "eds/vessiot.hpp"

using namespace eds;

namespace {

ExprMatrix parse_matrix(const ChartPtr& c, const std::vector<std::vector<std::string>>& rows) {
    ExprMatrix out;
    for (const auto& r : rows) {
        std::vector<Expr> row;
        for (const std::string& e : r) row.push_back(c->parse(e));
        out.push_back(row);
    }
    return out;
}

StructureConstants constants(int n, const std::vector<std::tuple<int, int, int, int>>& entries) {
    StructureConstants c(n);
    for (auto [i, j, k, v] : entries) c.set(i - 1, j - 1, k - 1, Rational(v));
    return c;
}

// C'^i_jk for the basis e'_a = q_ab e_b.
StructureConstants change_basis(const StructureConstants& c, const std::vector<std::vector<int>>& q,
                                const std::vector<std::vector<int>>& q_inv) {
    StructureConstants out(c.n);
    for (int i = 0; i < c.n; ++i)
        for (int j = 0; j < c.n; ++j)
            for (int k = 0; k < c.n; ++k) {
                Rational t = 0;
                for (int a = 0; a < c.n; ++a)
                    for (int b = 0; b < c.n; ++b)
                        for (int e = 0; e < c.n; ++e) t += q[j][a] * q[k][b] * c(e, a, b) * q_inv[e][i];
                out(i, j, k) = t;
            }
    return out;
}

struct Ben {
    ChartPtr c = make_chart("complex z W xi", {"W != 0"});
    Settings s;
    CoframeSet cf;
    Ben() {
        std::map<std::string, Form> named;
        named["theta1"] = parse_form(c, "dW/W - dW~/W~ - xi*dz + xi~*dz~");
        cf.chart = c;
        cf.base = parse_basepoint(c, "z=0, xi=0, W=i");
        cf.theta = {named["theta1"], parse_form(c, "2*dW~/(W*W~) - dz - (W~ + 2*xi~)/W*dz~ - i*theta1", named)};
        cf.sigma = {parse_form(c, "dz"), parse_form(c, "dxi")};
    }
};

}  // namespace

TEST_CASE("symbolic inverse") {
    ChartPtr c = make_chart("complex a b", {"a != 0"});
    Settings s;
    ExprMatrix m = parse_matrix(c, {{"a", "b"}, {"0", "a~"}});
    ExprMatrix inv = inverse(c, m, s);
    CHECK(same_matrix(c, multiply(m, inv), identity_matrix(2), s));
    CHECK(same_matrix(c, inv, parse_matrix(c, {{"1/a", "-b/(a*a~)"}, {"0", "1/a~"}}), s));
    CHECK_THROWS_AS(inverse(c, parse_matrix(c, {{"a", "b"}, {"2*a", "2*b"}}), s), NonGeneric);
}

TEST_CASE("algebra invariants separate su2 from sl2") {
    StructureConstants su2 = constants(3, {{1, 2, 3, 1}, {2, 3, 1, 1}, {3, 1, 2, 1}});
    StructureConstants sl2 = constants(3, {{1, 1, 2, 1}, {2, 1, 3, 1}, {3, 2, 3, 1}});
    CHECK(su2.jacobi());
    CHECK(sl2.jacobi());
    AlgebraInvariants a = algebra_invariants(su2), b = algebra_invariants(sl2);
    CHECK(a.positive == 0);
    CHECK(a.negative == 3);
    CHECK(b.positive == 2);
    CHECK(b.negative == 1);
    CHECK(b.semisimple);
    CHECK(b.derived == std::vector<int>{3});
    CHECK(algebras_isomorphic_lowdim(su2, sl2) == Verdict::No);
    CHECK(algebras_isomorphic_lowdim(sl2, sl2) == Verdict::Yes);

    std::vector<std::vector<int>> q{{1, 1, 0}, {0, 1, 1}, {0, 0, 1}}, q_inv{{1, -1, 1}, {0, 1, -1}, {0, 0, 1}};
    std::vector<std::vector<int>> r{{2, 1, 0}, {1, 1, 0}, {0, 3, 1}}, r_inv{{1, -1, 0}, {-1, 2, 0}, {3, -6, 1}};
    for (const auto& [m, mi] : {std::pair{q, q_inv}, std::pair{r, r_inv}}) {
        StructureConstants t = change_basis(sl2, m, mi);
        CHECK(t.antisymmetric());
        CHECK(t.jacobi());
        AlgebraInvariants x = algebra_invariants(t);
        CHECK(x.positive == 2);
        CHECK(x.negative == 1);
        CHECK(algebras_isomorphic_lowdim(t, sl2) == Verdict::Yes);
        CHECK(algebras_isomorphic_lowdim(change_basis(su2, m, mi), su2) == Verdict::Yes);
    }

    StructureConstants heis = constants(3, {{3, 1, 2, 1}});
    StructureConstants r2 = constants(3, {{1, 1, 2, 1}});
    CHECK(algebra_invariants(heis).nilpotent_derived);
    CHECK_FALSE(algebra_invariants(r2).nilpotent_derived);
    CHECK(algebras_isomorphic_lowdim(heis, r2) == Verdict::No);
    CHECK(algebras_isomorphic_lowdim(StructureConstants(2), constants(2, {{1, 1, 2, 1}})) == Verdict::No);
    StructureConstants bad = constants(3, {{1, 1, 2, 1}, {2, 2, 3, 1}});
    CHECK_FALSE(bad.jacobi());
}

TEST_CASE("benequation3 coframe") {
    Ben b;
    VessiotReport v = verify_vessiot(b.cf, b.s);
    for (const std::string& f : v.failures) MESSAGE(f);
    CHECK(v.pass);
    CHECK(v.constants.table() == std::vector<std::string>{"C^2_12 = -1"});
    ExprMatrix p = parse_matrix(b.c, {{"-1", "0"}, {"i + (2 - i*W~)/W", "W~/W"}});
    CHECK(same_matrix(b.c, v.p, p, b.s));

    ExprMatrix smat = parse_matrix(b.c, {{"xi", "0"}, {"1 - i*xi", "0"}});
    OmegaReport o = build_omega(b.cf, v.constants, p, identity_matrix(2), smat, b.s);
    for (const std::string& f : o.failures) MESSAGE(f);
    CHECK(o.pass);
    std::map<std::string, Form> named{{"omega1", parse_form(b.c, "dW/W - dW~/W~")}};
    CHECK(same_forms(o.omega, {named["omega1"], parse_form(b.c, "2*dW~/(W*W~) - i*omega1", named)}, b.s));

    // a wrong S breaks the Maurer-Cartan equation
    OmegaReport bad = build_omega(b.cf, v.constants, p, identity_matrix(2), parse_matrix(b.c, {{"xi", "0"}, {"1", "0"}}), b.s);
    CHECK_FALSE(bad.pass);
}

TEST_CASE("Vessiot failures are itemised") {
    Ben b;
    CoframeSet cf = b.cf;
    cf.base = parse_basepoint(b.c, "z=0, xi=0, W=1");
    VessiotReport v = verify_vessiot(cf, b.s);
    CHECK_FALSE(v.pass);
    bool found = false;
    for (const std::string& f : v.failures) found = found || f.find("P(m)") != std::string::npos;
    CHECK(found);

    cf = b.cf;
    cf.sigma[1] = parse_form(b.c, "dxi + z*dW");
    CHECK_FALSE(verify_one_adapted(cf, b.s).pass);
    CHECK_THROWS(parse_basepoint(b.c, "q=0"));
}

TEST_CASE("Laplace coframe is imaginary after a constant change") {
    ChartPtr c = make_chart("real x1 x2 u u1 u2 u11 u12");
    Settings s;
    std::map<std::string, Form> named{{"dz", parse_form(c, "dx1 + i*dx2")}};
    CoframeSet cf;
    cf.chart = c;
    cf.base = parse_basepoint(c, "x1=0, x2=0, u=0, u1=0, u2=0, u11=0, u12=0");
    cf.theta = {parse_form(c, "du - u1*dx1 - u2*dx2")};
    cf.eta = {parse_form(c, "du1 - i*du2 - (u11 - i*u12)*dz", named)};
    cf.sigma = {named["dz"], parse_form(c, "du11 - i*du12")};
    AdaptedReport a = verify_one_adapted(cf, s);
    for (const std::string& f : a.failures) MESSAGE(f);
    CHECK(a.pass);
    CHECK_FALSE(verify_vessiot(cf, s).pass);

    Adjusted adj = adapt_imaginary_at_point(cf, s);
    CHECK(same_matrix(c, adj.k, {{Expr::imag_unit()}}, s));
    VessiotReport v = verify_vessiot(adj.coframe, s);
    for (const std::string& f : v.failures) MESSAGE(f);
    CHECK(v.pass);
    CHECK(v.constants.zero());
}

TEST_CASE("Goursat coframe: polarization, sl2 constants, omega") {
    ChartPtr c = make_chart("real u; complex z p xi", {"1 - p^2 != 0", "sin(u) != 0", "cos(u) != 0", "xi != 0"});
    Settings s;
    const std::string r = "(xi*(1 - p^2) + (1 + p^2)*tan(u)/2)";
    Form b0 = parse_form(c, "du - 2*p/(1-p^2)*dz - 2*p~/(1-p~^2)*dz~");
    Form b1 = parse_form(c, "dp - " + r + "*dz - (1-p^2)*(1+p~^2)/(2*(1-p~^2)*cos(u))*dz~");
    ExprMatrix a = parse_matrix(
        c, {{"-p/(4*xi*(1-p^2))", "-1/(4*(1-p^2))", "((1-p^2)*sin(u) + (1+p^2)*cos(u)/xi)/(4*(1-p^2)*(1-p~^2))"},
            {"i*p/(4*xi*(1-p^2))", "-i/(4*(1-p^2))", "(i*(1-p^2)*sin(u) - i*(1+p^2)*cos(u)/xi)/(4*(1-p^2)*(1-p~^2))"},
            {"2*i*(1+p^2)/(4*(1-p^2))", "0", "-8*i*p*cos(u)/(4*(1-p^2)*(1-p~^2))"}});
    CoframeSet cf;
    cf.chart = c;
    cf.base = parse_basepoint(c, "u=0, z=0, p=0, xi=1");
    cf.theta = eds::apply(a, {b0, b1, conj(b1)});
    cf.sigma = {parse_form(c, "dz"), parse_form(c, "dxi")};

    AdaptedReport one = verify_one_adapted(cf, s);
    for (const std::string& f : one.failures) MESSAGE(f);
    CHECK(one.pass);

    Adjusted pol = polarize_normalize(cf, {"z", "xi"}, s);
    ExprMatrix k_inv = parse_matrix(
        c, {{"(xi+1)/2", "i*(xi-1)/2", "0"}, {"i*(1-xi)/2", "(xi+1)/2", "0"}, {"0", "0", "1"}});
    CHECK(same_matrix(c, pol.k_inv, k_inv, s));

    VessiotReport v = verify_vessiot(pol.coframe, s);
    for (const std::string& f : v.failures) MESSAGE(f);
    CHECK(v.pass);
    CHECK(v.constants.table() == std::vector<std::string>{"C^1_23 = -2", "C^2_13 = -2", "C^3_12 = -16"});
    AlgebraInvariants inv = algebra_invariants(v.constants);
    CHECK(inv.positive == 2);
    CHECK(inv.negative == 1);
    CHECK(algebras_isomorphic_lowdim(v.constants, constants(3, {{1, 1, 2, 1}, {2, 1, 3, 1}, {3, 2, 3, 1}})) ==
          Verdict::Yes);

    ExprMatrix smat = solve_s_semisimple(v, c, s);
    CHECK(same_matrix(c, smat, parse_matrix(c, {{"(1 - 2*xi)/8", "0"}, {"-i*(2*xi + 1)/8", "0"}, {"0", "0"}}), s));

    OmegaReport o = build_omega(pol.coframe, v.constants, v.p, identity_matrix(3), smat, s);
    for (const std::string& f : o.failures) MESSAGE(f);
    CHECK(o.pass);
    std::vector<Form> want{
        parse_form(c, "p/(4*(p^2-1))*du + 1/(4*(p^2-1))*dp + ((cos(u) - sin(u))*p^2 + sin(u) + cos(u))/(4*(p^2-1)*(p~^2-1))*dp~"),
        parse_form(c, "-i*p/(4*(p^2-1))*du + i/(4*(p^2-1))*dp - i*(p^2*(sin(u) + cos(u)) - sin(u) + cos(u))/(4*(p^2-1)*(p~^2-1))*dp~"),
        parse_form(c, "-i*(p^2+1)/(2*(p^2-1))*du - 2*i*p*cos(u)/((p^2-1)*(p~^2-1))*dp~")};
    CHECK(same_forms(o.omega, want, s));
}

TEST_CASE("biharmonic coframe has abelian constants and closed omega") {
    ChartPtr c = make_chart("complex z uz vz p q; real u v");
    Settings s;
    std::map<std::string, Form> f;
    f["Du"] = parse_form(c, "du - uz*dz - uz~*dz~");
    f["Duz"] = parse_form(c, "duz - (p + z~*vz)/2*dz - v/2*dz~");
    f["Duzb"] = conj(f["Duz"]);
    f["Dv"] = parse_form(c, "dv - vz*dz - vz~*dz~");
    f["Dvz"] = parse_form(c, "dvz - q/2*dz");
    CoframeSet cf;
    cf.chart = c;
    cf.base = parse_basepoint(c, "z=0, uz=0, vz=0, p=0, q=0, u=0, v=0");
    cf.theta = {parse_form(c, "i*Du - i*z~*Duzb", f), parse_form(c, "Duz - Duzb - z~/2*Dv", f),
                parse_form(c, "i*Duz + i*Duzb - i*z~/2*Dv", f), parse_form(c, "i*Dv", f)};
    cf.eta = {parse_form(c, "2*Dvz", f)};
    cf.sigma = {parse_form(c, "dz"), parse_form(c, "dp"), parse_form(c, "dq")};
    VessiotReport v = verify_vessiot(cf, s);
    for (const std::string& x : v.failures) MESSAGE(x);
    CHECK(v.pass);
    CHECK(v.constants.zero());

    ExprMatrix r = parse_matrix(c, {{"1", "-i*z/2", "-z/2", "0"}, {"0", "1", "0", "-i*z/2"}, {"0", "0", "1", "-z/2"},
                                    {"0", "0", "0", "1"}});
    // columns follow pi = (eta, dz, dp, dq)
    ExprMatrix smat = parse_matrix(c, {{"0", "-i*p*z/2", "0", "0"},
                                       {"0", "(p + z*vz)/2", "0", "0"},
                                       {"0", "i*(p - z*vz)/2", "0", "0"},
                                       {"0", "i*vz", "0", "0"}});
    OmegaReport o = build_omega(cf, v.constants, v.p, r, smat, s);
    for (const std::string& x : o.failures) MESSAGE(x);
    CHECK(o.pass);
}
